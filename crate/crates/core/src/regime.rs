//! Dynamical regime of a network: ordered, critical or chaotic.
//!
//! The regime is measured by one-step Derrida sensitivity `lambda`: flip one
//! random node of a random state and count how many nodes differ after one
//! synchronous update. For random networks with in-degree `k` and bias `b`
//! the expectation is `2 b (1 - b) k`, and the critical line is `lambda = 1`.
//!
//! The `lambda` band around 1 used by [`classify`] is a proxy: a finite
//! network has no sharp transition, so the band width is a parameter.

use std::fmt;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bn::{BooleanNetwork, NetworkState};
use crate::error::ConfigError;
use crate::rng::{mix_seed, seeded_stream};

pub const DEFAULT_EPSILON: f64 = 0.1;

/// Samples per independently seeded block; blocks may run on any thread.
const BLOCK: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensitivityEstimate {
    pub lambda: f64,
    pub samples: usize,
    pub std_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Ordered,
    Critical,
    Chaotic,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Ordered => "ordered",
            Regime::Critical => "critical",
            Regime::Chaotic => "chaotic",
        })
    }
}

/// Biases on the critical line for in-degree `k`: the roots of
/// `2 b (1 - b) k = 1`, low root first.
pub fn critical_bias(k: usize) -> Result<(f64, f64), ConfigError> {
    if k < 2 {
        return Err(ConfigError::Invalid(format!(
            "no critical bias exists for k = {k}; need k >= 2"
        )));
    }
    // b^2 - b + 1/(2k) = 0
    let disc = (1.0 - 2.0 / k as f64).max(0.0);
    let half = disc.sqrt() / 2.0;
    Ok((0.5 - half, 0.5 + half))
}

/// Expected sensitivity of the random-network ensemble with in-degree `k` and bias `b`.
pub fn ensemble_sensitivity(k: usize, bias: f64) -> f64 {
    2.0 * bias * (1.0 - bias) * k as f64
}

/// Exact expected one-step sensitivity of one network under a uniform
/// random state and a uniformly chosen single flip: the mean over nodes of
/// the summed activities of their inputs.
pub fn exact_sensitivity(net: &BooleanNetwork) -> f64 {
    let len = net.table_len();
    let mut total = 0.0;
    for node in 0..net.n() {
        let table = net.table(node);
        let ins: Vec<usize> = net.inputs(node).collect();
        for (j, _) in ins.iter().enumerate() {
            let sensitive = (0..len).filter(|&e| table[e] != table[e ^ (1 << j)]).count();
            total += sensitive as f64 / len as f64;
        }
    }
    total / net.n() as f64
}

/// Monte Carlo one-step Derrida sensitivity on the free-running network.
///
/// Samples are split into blocks of 1024, block `i` drawing from its own
/// stream derived from `(seed, i)`. Hamming distances are summed as
/// integers, so the estimate does not depend on how blocks are scheduled.
pub fn estimate_sensitivity(net: &BooleanNetwork, samples: usize, seed: u64) -> SensitivityEstimate {
    assert!(samples >= 1, "at least one sample required");
    let blocks = samples.div_ceil(BLOCK);
    let (sum, sum_sq) = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let count = BLOCK.min(samples - b * BLOCK);
            sample_block(net, count, mix_seed(&[seed, b as u64]))
        })
        .reduce(|| (0u64, 0u64), |a, b| (a.0 + b.0, a.1 + b.1));

    let m = samples as f64;
    let lambda = sum as f64 / m;
    let std_error = if samples > 1 {
        let var = (sum_sq as f64 - m * lambda * lambda) / (m - 1.0);
        (var.max(0.0) / m).sqrt()
    } else {
        0.0
    };
    SensitivityEstimate {
        lambda,
        samples,
        std_error,
    }
}

fn sample_block(net: &BooleanNetwork, count: usize, seed: u64) -> (u64, u64) {
    let mut rng = seeded_stream(seed, 0);
    let n = net.n();
    let mut next_a = NetworkState::zeros(n);
    let mut next_b = NetworkState::zeros(n);
    let (mut sum, mut sum_sq) = (0u64, 0u64);
    for _ in 0..count {
        let a = NetworkState::random(n, &mut rng);
        let mut b = a.clone();
        b.flip(rng.random_range(0..n));
        net.step_into(&a, &mut next_a);
        net.step_into(&b, &mut next_b);
        let h = next_a.hamming(&next_b) as u64;
        sum += h;
        sum_sq += h * h;
    }
    (sum, sum_sq)
}

/// Labels `lambda` against the band `[1 - epsilon, 1 + epsilon]`.
pub fn classify(est: &SensitivityEstimate, epsilon: f64) -> Regime {
    classify_lambda(est.lambda, epsilon)
}

pub fn classify_lambda(lambda: f64, epsilon: f64) -> Regime {
    assert!(epsilon > 0.0 && epsilon < 0.5, "epsilon must lie in (0, 0.5)");
    if lambda < 1.0 - epsilon {
        Regime::Ordered
    } else if lambda > 1.0 + epsilon {
        Regime::Chaotic
    } else {
        Regime::Critical
    }
}
