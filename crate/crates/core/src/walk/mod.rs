//! Simulation of the walk `S_n = a_1 ξ_1 + … + a_n ξ_n` with i.i.d. uniform
//! unit directions `ξ_i`.
//!
//! Randomness is deterministic: a single simulation uses stream 0 of its seed,
//! and Monte Carlo trial `i` uses stream `i` of the master seed (see
//! [`RNG_ID`]). Positions are exact; see [`OverflowPolicy`].

mod export;
mod montecarlo;
mod simulate;
mod state;
mod step;

pub use export::{dyadic_decimal, write_trajectory_csv, Report, RunMetadata, TRAJECTORY_HEADER};
pub use montecarlo::{
    hits_target, monte_carlo_return, monte_carlo_return_table, run_trials, MonteCarloConfig,
    MonteCarloEstimate,
};
pub use simulate::{
    divisibility_at_blocks, kappa_total, simulate, simulate_table, visit_statistics,
    visit_statistics_table, BlockDivisibility, NoVisitor, TargetVisits, Trajectory,
    VisitStatistics, Visitor, WalkSummary,
};
pub use state::{OverflowPolicy, Position, StepTable, Target, WalkConfig, WalkState};
pub use step::{decompose_step, derive_seed, trial_rng, Direction, StepSampler, RNG_ID};

use crate::sequences::SequenceError;

#[derive(Debug, thiserror::Error)]
pub enum WalkError {
    #[error("position overflowed 64 bits at step {step}")]
    Overflow { step: u64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("inconsistent input: {0}")]
    Consistency(String),
    #[error(transparent)]
    Sequence(#[from] SequenceError),
}
