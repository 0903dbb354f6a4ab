//! Deterministic step-size sequences and their finite-horizon diagnostics.

mod blocks;
mod doubling;
mod family;
mod io;
mod monotone;
mod runlength;

pub use blocks::{
    sub_block_length, BlockBoundary, MAX_MATERIALIZED_BITS, BlockScale, BlockSpec, Growth, Run, RunLength,
    SubBlockLength,
};
pub use doubling::{extract_doubling_subsequence, DoublingCertificate};
pub use family::{make_sequence, DEFAULT_PRECISION_BITS, PlanSegment, SequenceSpec, StepSequence, StepValue};
pub use io::{parse_value_list, read_value_list};
pub use monotone::{check_rs_monotone, MonotonicityReport, Violation};
pub use runlength::{run_length_decompose, run_length_decompose_values, RunLengthDecomposition};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SequenceError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("step index must be at least 1")]
    ZeroIndex,
    #[error("index {index} is past the end of a finite sequence of length {len}")]
    IndexOutOfRange { index: u64, len: u64 },
    #[error("{what} does not fit in 64 bits (length 2^{exponent})")]
    Overflow { what: String, exponent: String },
    #[error("a_{index} is not an integer")]
    NotIntegral { index: u64 },
    #[error("prefix is not non-decreasing at index {index}")]
    NotMonotone { index: u64 },
    #[error("a_{index} is below 1")]
    BelowOne { index: u64 },
    #[error("|a_{} - a_{index}| = {gap} exceeds the gap bound {bound}", index - 1)]
    GapExceeded {
        index: u64,
        gap: String,
        bound: String,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}
