//! Online adaptation of the sensor-to-node coupling.
//!
//! Each control step the 24 readings are binarized and written into the
//! nodes the sensors are mapped to, the network takes one synchronous step,
//! and the two output nodes switch the wheels. A trial runs `T` such steps
//! and scores the mean per-step objective. The adaptive walk perturbs the
//! mapping by rewiring `q` sensors, runs a trial, and keeps the new mapping
//! only if it scores strictly better than the best so far. Network state and
//! robot pose carry over from trial to trial: the robot lives one continuous
//! life.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bn::{BooleanNetwork, NetworkState, SENSOR_COUNT};
use crate::error::ConfigError;
use crate::world::{RobotPose, World};

pub const DEFAULT_THETA: f64 = 0.1;
pub const DEFAULT_STEPS: usize = 1200;
/// Largest number of sensors rewired per iteration; `q` is uniform in `1..=MAX_REWIRE`.
pub const MAX_REWIRE: usize = 6;

/// Meaning of 1 on the sensor and wheel nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Encoding {
    /// Obstacle writes 1; a wheel turns when its node is 1.
    Positive,
    /// Obstacle writes 0; a wheel turns when its node is 0.
    Negative,
}

impl Encoding {
    pub fn as_str(self) -> &'static str {
        match self {
            Encoding::Positive => "positive",
            Encoding::Negative => "negative",
        }
    }

    /// Node value for a sensor that does (or does not) detect an obstacle.
    #[inline]
    pub fn sensor_bit(self, obstacle: bool) -> bool {
        match self {
            Encoding::Positive => obstacle,
            Encoding::Negative => !obstacle,
        }
    }

    /// Whether a wheel driven by an output node with `value` is on.
    #[inline]
    pub fn wheel_on(self, value: bool) -> bool {
        match self {
            Encoding::Positive => value,
            Encoding::Negative => !value,
        }
    }
}

impl std::fmt::Display for Encoding {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Step-function binarization with a strict threshold.
#[inline]
pub fn binarize(reading: f64, theta: f64, enc: Encoding) -> bool {
    enc.sensor_bit(reading > theta)
}

/// Per-step objective `(1 - p_max) (1 - |l - r|) (l + r) / 2`.
///
/// With binary wheels it is `1 - p_max` when both wheels are on, else 0.
#[inline]
pub fn step_objective(p_max: f64, left: bool, right: bool) -> f64 {
    let (l, r) = (left as u8 as f64, right as u8 as f64);
    (1.0 - p_max) * (1.0 - (l - r).abs()) * (l + r) / 2.0
}

/// Injective assignment of sensor `i` to network node `targets[i]`, never an
/// output node.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SensorMapping {
    targets: Vec<usize>,
}

impl SensorMapping {
    pub fn new(targets: Vec<usize>, net: &BooleanNetwork) -> Result<Self, ConfigError> {
        let mapping = Self { targets };
        mapping.check(net)?;
        Ok(mapping)
    }

    /// 24 distinct non-output nodes chosen uniformly, in random order.
    pub fn random<R: Rng + ?Sized>(net: &BooleanNetwork, rng: &mut R) -> Self {
        let eligible: Vec<usize> = (0..net.n()).filter(|&i| !net.is_output(i)).collect();
        assert!(eligible.len() >= SENSOR_COUNT, "network too small for {SENSOR_COUNT} sensors");
        let picks = index::sample(rng, eligible.len(), SENSOR_COUNT);
        Self {
            targets: picks.iter().map(|p| eligible[p]).collect(),
        }
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn check(&self, net: &BooleanNetwork) -> Result<(), ConfigError> {
        if self.targets.len() != SENSOR_COUNT {
            return Err(ConfigError::Invalid(format!(
                "mapping has {} targets, expected {SENSOR_COUNT}",
                self.targets.len()
            )));
        }
        let mut used = vec![false; net.n()];
        for (sensor, &node) in self.targets.iter().enumerate() {
            if node >= net.n() || net.is_output(node) {
                return Err(ConfigError::Invalid(format!(
                    "sensor {sensor} mapped to node {node}, which is out of range or an output"
                )));
            }
            if std::mem::replace(&mut used[node], true) {
                return Err(ConfigError::Invalid(format!("node {node} mapped twice")));
            }
        }
        Ok(())
    }

    /// Number of sensors mapped to different nodes in `self` and `other`.
    pub fn differences(&self, other: &SensorMapping) -> usize {
        self.targets.iter().zip(&other.targets).filter(|(a, b)| a != b).count()
    }
}

/// Rewires `q` distinct, uniformly chosen sensors.
///
/// Each chosen sensor, in turn, moves to a node drawn uniformly from those
/// that are neither outputs nor currently mapped (its own node included), so
/// exactly `q` entries change and the mapping stays injective.
pub fn rewire<R: Rng + ?Sized>(mapping: &SensorMapping, q: usize, net: &BooleanNetwork, rng: &mut R) -> SensorMapping {
    assert!((1..=SENSOR_COUNT).contains(&q), "q = {q} outside 1..={SENSOR_COUNT}");
    assert!(
        net.n() > SENSOR_COUNT + 2,
        "rewiring needs a free non-output node; n = {}",
        net.n()
    );
    let mut targets = mapping.targets.clone();
    let mut mapped = vec![false; net.n()];
    for &t in &targets {
        mapped[t] = true;
    }
    let mut free: Vec<usize> = Vec::with_capacity(net.n());
    for slot in index::sample(rng, SENSOR_COUNT, q) {
        free.clear();
        free.extend((0..net.n()).filter(|&i| !mapped[i] && !net.is_output(i)));
        let node = free[rng.random_range(0..free.len())];
        mapped[targets[slot]] = false;
        mapped[node] = true;
        targets[slot] = node;
    }
    SensorMapping { targets }
}

/// One control step as seen from outside, for trajectory dumps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSample {
    /// Pose after the wheels moved.
    pub pose: RobotPose,
    pub left: bool,
    pub right: bool,
    /// Largest reading at the start of the step.
    pub p_max: f64,
}

/// Runs `steps` control steps and returns the mean step objective.
///
/// `state` and `world` are advanced in place. Order within a step: sense,
/// binarize, override the mapped nodes, synchronous update, decode the
/// output nodes, drive, score.
#[allow(clippy::too_many_arguments)]
pub fn run_trial<F: FnMut(&StepSample)>(
    net: &BooleanNetwork,
    state: &mut NetworkState,
    mapping: &SensorMapping,
    world: &mut World,
    enc: Encoding,
    theta: f64,
    steps: usize,
    mut observe: F,
) -> f64 {
    assert!(steps >= 1, "a trial needs at least one step");
    debug_assert!(mapping.check(net).is_ok());
    let [left_node, right_node] = net.output_nodes();
    let mut next = NetworkState::zeros(net.n());
    let mut total = 0.0;
    for _ in 0..steps {
        let readings = world.sense();
        let p_max = readings.p_max();
        for (&node, &reading) in mapping.targets.iter().zip(&readings.0) {
            state.set(node, binarize(reading, theta, enc));
        }
        net.step_into(state, &mut next);
        std::mem::swap(state, &mut next);
        let left = enc.wheel_on(state.get(left_node));
        let right = enc.wheel_on(state.get(right_node));
        world.drive(left, right);
        total += step_objective(p_max, left, right);
        observe(&StepSample {
            pose: world.pose(),
            left,
            right,
            p_max,
        });
    }
    total / steps as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkConfig {
    pub encoding: Encoding,
    pub theta: f64,
    pub iterations: usize,
    pub steps_per_trial: usize,
    /// Put the robot back at its start pose before every trial.
    pub reset_pose_each_trial: bool,
}

impl Default for WalkConfig {
    fn default() -> Self {
        Self {
            encoding: Encoding::Positive,
            theta: DEFAULT_THETA,
            iterations: 120,
            steps_per_trial: DEFAULT_STEPS,
            reset_pose_each_trial: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub iteration: usize,
    /// Sensors rewired before this trial; 0 for the initial mapping.
    pub q: usize,
    pub f_trial: f64,
    pub accepted: bool,
    pub f_best: f64,
}

#[derive(Debug, Clone)]
pub struct WalkResult {
    pub records: Vec<TrialRecord>,
    /// The incumbent mapping when the walk ended.
    pub mapping: SensorMapping,
}

impl WalkResult {
    pub fn final_best(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.f_best)
    }
}

/// Accept-if-strictly-better walk over sensor mappings.
///
/// Iteration 0 scores `initial` and is always accepted. Every later
/// iteration draws `q` uniformly from `1..=6`, rewires the incumbent, and
/// runs one trial. The network starts from the all-zero state.
pub fn adaptive_walk<R: Rng + ?Sized, F: FnMut(&StepSample)>(
    net: &BooleanNetwork,
    initial: SensorMapping,
    world: &mut World,
    cfg: &WalkConfig,
    rng: &mut R,
    mut observe: F,
) -> WalkResult {
    assert!(cfg.iterations >= 1, "at least one iteration required");
    let start = world.pose();
    let mut state = NetworkState::zeros(net.n());
    let mut trial = |mapping: &SensorMapping, world: &mut World, state: &mut NetworkState| {
        if cfg.reset_pose_each_trial {
            world.set_pose(start);
        }
        run_trial(net, state, mapping, world, cfg.encoding, cfg.theta, cfg.steps_per_trial, &mut observe)
    };

    let mut best = trial(&initial, world, &mut state);
    let mut incumbent = initial;
    let mut records = Vec::with_capacity(cfg.iterations);
    records.push(TrialRecord {
        iteration: 0,
        q: 0,
        f_trial: best,
        accepted: true,
        f_best: best,
    });
    for iteration in 1..cfg.iterations {
        let q = rng.random_range(1..=MAX_REWIRE);
        let candidate = rewire(&incumbent, q, net, rng);
        let f = trial(&candidate, world, &mut state);
        let accepted = f > best;
        if accepted {
            best = f;
            incumbent = candidate;
        }
        records.push(TrialRecord {
            iteration,
            q,
            f_trial: f,
            accepted,
            f_best: best,
        });
    }
    WalkResult {
        records,
        mapping: incumbent,
    }
}
