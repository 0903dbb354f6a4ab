//! Exact distributions of signed step sums with rational masses.
//!
//! Every mass is a count of sign (or direction) patterns over a power-of-two
//! denominator, so normalization and symmetry hold as exact equalities. These
//! oracles are what the Monte Carlo estimators and bound checks are tested
//! against.

mod pmf;
mod queries;

pub use pmf::{pmf_1d, pmf_2d, ExactPmf1D, ExactPmf2D};
pub use queries::{
    hit_probability_2d, hit_probability_2d_from, hoeffding_tail, max_interval_probability,
    mod_probability, residue_counts, sup_mod_probability, sup_pmf, to_f64, HoeffdingComparison,
    IntervalMax, ModPath,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sequences::StepValue;

/// Default cap on the number of support points an oracle may allocate.
pub const DEFAULT_SUPPORT_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactConfig {
    pub support_budget: u64,
}

impl Default for ExactConfig {
    fn default() -> Self {
        ExactConfig {
            support_budget: DEFAULT_SUPPORT_BUDGET,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExactError {
    #[error("support of {needed} points exceeds the budget of {budget}")]
    Budget { needed: u128, budget: u64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("step {index} is not an integer")]
    NonInteger { index: usize },
}

/// Converts sequence values to integer steps, rejecting fractional ones.
pub fn integer_steps(values: &[StepValue]) -> Result<Vec<u64>, ExactError> {
    values
        .iter()
        .enumerate()
        .map(|(i, v)| v.as_integer().ok_or(ExactError::NonInteger { index: i + 1 }))
        .collect()
}
