//! Agent-based simulation of conspiracy-theory diffusion on a small-world
//! network populated by humans, malicious bots and two kinds of useful
//! bots, together with the sweep harness and statistics used to analyse it.

pub mod analysis;
pub mod engine;
pub mod error;
pub mod experiments;
pub mod fmt;
pub mod network;
pub mod stats;

pub use engine::{
    DefenderBasis, FlipRule, HumanState, NetworkConfig, Population, RelayMode, Role, RunOutcome, SimParams, Simulation,
    TickStats, Valence,
};
pub use error::{Error, Result};
pub use experiments::{
    build_experiment, derive_seed, run_sweep, summarize, ConditionSummary, ExperimentId, RunRecord, SweepSpec,
};
pub use experiments::{Outcome, OutcomeSummary};
pub use fmt::save_json;
pub use network::{GraphModel, Network, SmallWorldSpec};
pub use stats::{AnovaTable, LinearFit, PowerSpec, QuadraticSurface};
