//! Boolean-network robot controllers with online sensor-coupling adaptation.
//!
//! A random Boolean network (RBN) drives the two wheels of a simulated
//! robot. The robot's 24 proximity sensors write into a subset of the
//! network's nodes, and during its lifetime the robot rewires which nodes
//! the sensors feed, keeping a new coupling only when it improves an
//! obstacle-avoidance objective. The network itself never changes.
//!
//! Modules, bottom up:
//!
//! - [`bn`]: network generation by bias, synchronous stepping, input overrides,
//!   attractor search and JSON serialization.
//! - [`regime`]: critical-line biases and one-step Derrida sensitivity, used to
//!   label networks ordered, critical or chaotic.
//! - [`world`]: square arena with a central box and a differential-drive robot
//!   with a ring of ray-cast proximity sensors.
//! - [`adaptation`]: sensor mappings, binarization, the per-step objective, trials
//!   and the accept-if-better adaptive walk.
//! - [`experiment`]: replica sweeps, summaries, rank-sum tests and CSV output.
//! - [`cli`]: the `run`, `analyze` and `trace` commands behind the `bnplast` binary.
//!
//! All randomness flows through [`rng`], which hands out independent,
//! reproducible ChaCha8 streams per replica.

pub mod adaptation;
pub mod bn;
pub mod cli;
pub mod error;
pub mod experiment;
pub mod regime;
pub mod rng;
pub mod world;

pub use adaptation::{
    adaptive_walk, binarize, rewire, run_trial, step_objective, Encoding, SensorMapping, TrialRecord,
    WalkConfig, WalkResult,
};
pub use bn::{BooleanNetwork, NetworkState};
pub use error::{ConfigError, Error};
pub use experiment::{
    rank_sum_test, run_sweep, summarize, Alternative, ConfigKey, ReplicaResult, SummaryRow, SweepConfig,
};
pub use regime::{classify, critical_bias, estimate_sensitivity, Regime, SensitivityEstimate};
pub use rng::{ReplicaStreams, SimRng, Stream};
pub use world::{ArenaGeometry, RobotParams, RobotPose, SensorReadings, World};
