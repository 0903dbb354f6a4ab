//! Recurrent step sequences built from a set of positive integers in which
//! every element has coprime partners.
//!
//! Round `k` takes the first unused element `b′` and its first unused coprime
//! partner `b″`, finds positive `c′, c″` with `c′b′ − c″b″ = 1`, and emits
//! `N₀` periods of `c′` copies of `b′` followed by `c″` copies of `b″`. The
//! horizon `N₀` is certified by simulation: every target within the round's
//! radius must be hit with Wilson lower bound at least 1/2.

mod bezout;
mod n0;
mod plan;

pub use bezout::{
    check_good_set, first_primes, positive_bezout, BezoutPair, GoodSetPrefix, GoodSetReport,
    PartnerCount,
};
pub use n0::{
    estimate_n0, horizon_grid, sample_composite, HitRule, HorizonCheck, N0Config, N0Estimate, N0Status,
    TargetBound, TargetSet,
};
pub use plan::{
    build_recurrent_sequence, composite_unit_masses, segment_return_fractions, BuildConfig,
    ConstructionPlan, InconclusivePolicy, PlanRound, RadiusRule, SegmentReturn,
};

use crate::exact::ExactError;
use crate::sequences::SequenceError;
use crate::walk::WalkError;

#[derive(Debug, thiserror::Error)]
pub enum ConstructionError {
    #[error("{b_prime} and {b_second} are not coprime (gcd {gcd})")]
    NotCoprime { b_prime: u64, b_second: u64, gcd: u64 },
    #[error("{}", match element {
        Some(b) => format!("no unused element coprime to {b} in the prefix"),
        None => "every element of the prefix is used".to_string(),
    })]
    Exhausted { element: Option<u64> },
    #[error("round {round}: no horizon up to the cap certified (best worst-case lower bound {:.4})", estimate.worst_final_lower())]
    Inconclusive { round: usize, estimate: Box<N0Estimate> },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("inconsistent plan: {0}")]
    Consistency(String),
    #[error(transparent)]
    Sequence(#[from] SequenceError),
    #[error(transparent)]
    Walk(#[from] WalkError),
    #[error(transparent)]
    Exact(#[from] ExactError),
}
