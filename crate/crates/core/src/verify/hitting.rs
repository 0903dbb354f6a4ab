use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::VerifyError;
use crate::exact::{hit_probability_2d_from, ExactConfig};
use crate::stats::binomial_sigma;
use crate::walk::{
    hits_target, run_trials, MonteCarloConfig, MonteCarloEstimate, StepTable, Target,
};

/// Default floor for the Wilson lower bound of `P(τ₀ ≤ r³)`.
pub const DEFAULT_FLOOR: f64 = 0.15;

/// Radii up to this value also get the exact dynamic-programming answer.
pub const EXACT_RADIUS_LIMIT: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StartRule {
    /// `(⌈r⌉, 0)`.
    #[default]
    Axis,
    /// Uniform over lattice points with `r ≤ ‖z‖ < r + 1`, drawn per trial.
    Annulus,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HittingTimeResult {
    pub radius: f64,
    /// The walk moves on the lattice scaled by `step`; `r` is measured in
    /// units of `step`.
    pub step: u64,
    pub start: StartRule,
    /// `⌊r³⌋`.
    pub horizon: u64,
    pub estimate: MonteCarloEstimate,
    pub exact: Option<String>,
    pub exact_value: Option<f64>,
    /// `|estimate − exact|` in binomial standard deviations.
    pub sigmas: Option<f64>,
    pub floor: f64,
    /// Wilson lower bound above the floor.
    pub pass: bool,
}

/// Lattice points with `r ≤ ‖z‖ < r + 1`.
pub fn annulus(r: f64) -> Vec<(i64, i64)> {
    let outer = (r + 1.0).ceil() as i64;
    let mut out = Vec::new();
    for x in -outer..=outer {
        for y in -outer..=outer {
            let n = ((x * x + y * y) as f64).sqrt();
            if n >= r && n < r + 1.0 {
                out.push((x, y));
            }
        }
    }
    out
}

/// Estimates `P(τ₀ ≤ ⌊r³⌋)` for the walk with constant step `step`, where
/// `τ₀ = inf{n ≥ 0 : T_n = 0}`.
pub fn hitting_time_experiment(
    r: f64,
    step: u64,
    start: StartRule,
    floor: f64,
    config: &MonteCarloConfig,
) -> Result<HittingTimeResult, VerifyError> {
    if !(r >= 0.0 && r.is_finite()) {
        return Err(VerifyError::InvalidParameter(format!("radius {r} must be >= 0")));
    }
    if step == 0 {
        return Err(VerifyError::InvalidParameter("step must be >= 1".into()));
    }
    let horizon = (r * r * r).floor() as u64;
    let table = StepTable::from_values(&vec![step; horizon as usize])?;
    let scale = step as i64;
    let axis = (r.ceil() as i64, 0);
    let ring = annulus(r);
    let estimate = run_trials(config, |sampler| {
        let (x, y) = match start {
            StartRule::Axis => axis,
            StartRule::Annulus => ring[sampler.index_below(ring.len() as u64) as usize],
        };
        if (x, y) == (0, 0) {
            return Ok(true);
        }
        // T_n = start + S_n hits 0 iff S_n hits −start
        let target = Target::new((-x * scale, -y * scale), 0);
        hits_target(&table, horizon, &target, sampler, &config.walk)
    })?;
    let exact = if start == StartRule::Axis && r <= EXACT_RADIUS_LIMIT {
        Some(if axis == (0, 0) {
            num_rational::BigRational::from_integer(1.into())
        } else {
            let a = vec![step; horizon as usize];
            hit_probability_2d_from(
                &a,
                (axis.0 * scale, 0),
                (0, 0),
                horizon as usize,
                &ExactConfig::default(),
            )?
        })
    } else {
        None
    };
    let exact_value = exact.as_ref().and_then(|e| e.to_f64());
    let sigmas = exact_value.map(|p| {
        let s = binomial_sigma(p, estimate.trials);
        let gap = (estimate.estimate - p).abs();
        if s == 0.0 {
            if gap == 0.0 { 0.0 } else { f64::INFINITY }
        } else {
            gap / s
        }
    });
    Ok(HittingTimeResult {
        radius: r,
        step,
        start,
        horizon,
        pass: estimate.interval.lower > floor,
        estimate,
        exact: exact.map(|e| e.to_string()),
        exact_value,
        sigmas,
        floor,
    })
}
