//! Executable checks of the inequalities behind the recurrence and
//! transience arguments: the logarithmic supermartingale, the
//! Erdős–Littlewood–Offord interval bound, the mod-`m` anti-concentration
//! trend, Hoeffding tails, and hitting times of the simple walk.
//!
//! Every check returns a report with its parameters and a `pass` flag; a
//! failed inequality is a report, not an error.

mod bounds;
mod hitting;
mod supermartingale;

pub use bounds::{
    elo_bound, elo_exhaustive, mod_lemma_trend, sup_pmf_trend, trend_csv, verify_elo,
    verify_hoeffding, verify_mod_lemma, within_elo, BoundComparison, EloInstance, EloScan,
    ModLemmaTrend, SupPmfTrend, TrendRow, DEFAULT_C_CAP, DEFAULT_SLOPE_TOLERANCE,
};
pub use hitting::{
    annulus, hitting_time_experiment, HittingTimeResult, StartRule, DEFAULT_FLOOR,
    EXACT_RADIUS_LIMIT,
};
pub use supermartingale::{
    classify, relative_gap, supermartingale_delta, verify_supermartingale, DeltaReport,
    PointClass, SupermartingaleReport, DELTA_TOLERANCE, F_ORIGIN,
};

use num_rational::BigRational;

use crate::exact::ExactError;
use crate::walk::WalkError;

#[derive(Debug, thiserror::Error)]
pub enum VerifyError {
    #[error("outside the domain: {0}")]
    Domain(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("out of range: {0}")]
    Range(String),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Walk(#[from] WalkError),
}

pub(crate) fn ser_opt_rational<S: serde::Serializer>(
    value: &Option<BigRational>,
    s: S,
) -> Result<S::Ok, S::Error> {
    match value {
        Some(r) => s.serialize_some(&r.to_string()),
        None => s.serialize_none(),
    }
}
