use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use super::simulate::simulate_table;
use super::state::{OverflowPolicy, StepTable, Target, WalkConfig, WalkState};
use super::step::{Direction, StepSampler, RNG_ID};
use super::WalkError;
use crate::sequences::StepSequence;
use crate::stats::{wilson_interval, Interval};
use crate::Execution;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloConfig {
    pub trials: u64,
    pub master_seed: u64,
    /// Two-sided confidence level of the reported interval.
    #[serde(default = "default_level")]
    pub level: f64,
    #[serde(default)]
    pub execution: Execution,
    #[serde(default)]
    pub walk: WalkConfig,
}

fn default_level() -> f64 {
    0.95
}

impl MonteCarloConfig {
    pub fn new(trials: u64, master_seed: u64) -> Self {
        MonteCarloConfig {
            trials,
            master_seed,
            level: default_level(),
            execution: Execution::default(),
            walk: WalkConfig::default(),
        }
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub trials: u64,
    pub successes: u64,
    pub estimate: f64,
    pub interval: Interval,
    pub method: String,
    pub level: f64,
    pub master_seed: u64,
    /// How trial `i` derives its random stream from the master seed.
    pub seed_rule: String,
}

impl MonteCarloEstimate {
    pub fn from_counts(successes: u64, config: &MonteCarloConfig) -> Self {
        MonteCarloEstimate {
            trials: config.trials,
            successes,
            estimate: successes as f64 / config.trials as f64,
            interval: wilson_interval(successes, config.trials, config.level),
            method: "wilson".to_string(),
            level: config.level,
            master_seed: config.master_seed,
            seed_rule: RNG_ID.to_string(),
        }
    }
}

/// Runs `config.trials` independent Bernoulli trials; trial `i` receives its
/// own sampler on stream `i` of the master seed.
pub fn run_trials<F>(config: &MonteCarloConfig, trial: F) -> Result<MonteCarloEstimate, WalkError>
where
    F: Fn(&mut StepSampler) -> Result<bool, WalkError> + Sync + Send,
{
    if config.trials == 0 {
        return Err(WalkError::InvalidParameter("trials must be >= 1".into()));
    }
    if !(config.level > 0.0 && config.level < 1.0) {
        return Err(WalkError::InvalidParameter(format!(
            "confidence level {} must lie in (0, 1)",
            config.level
        )));
    }
    let master = config.master_seed;
    let successes = config.execution.try_sum_u64(config.trials, |i| {
        let mut sampler = StepSampler::for_trial(master, i);
        trial(&mut sampler).map(u64::from)
    })?;
    Ok(MonteCarloEstimate::from_counts(successes, config))
}

/// Whether one path started at the origin hits `target` at some
/// `1 <= m <= horizon`.
pub fn hits_target(
    table: &StepTable,
    horizon: u64,
    target: &Target,
    sampler: &mut StepSampler,
    walk: &WalkConfig,
) -> Result<bool, WalkError> {
    if let (Some(sizes), Some((tx, ty))) = (table.narrow(), target.narrow()) {
        if walk.overflow == OverflowPolicy::Error {
            let (mut x, mut y) = (0i64, 0i64);
            for (i, &a) in sizes[..horizon as usize].iter().enumerate() {
                let moved = match sampler.sample_step() {
                    Direction::PosX => x.checked_add(a).map(|v| x = v),
                    Direction::NegX => x.checked_sub(a).map(|v| x = v),
                    Direction::PosY => y.checked_add(a).map(|v| y = v),
                    Direction::NegY => y.checked_sub(a).map(|v| y = v),
                };
                if moved.is_none() {
                    return Err(WalkError::Overflow { step: i as u64 + 1 });
                }
                if x == tx && y == ty {
                    return Ok(true);
                }
            }
            return Ok(false);
        }
    }
    let mut hit = false;
    simulate_table(table, horizon, sampler, walk, &mut |s: &WalkState, _| {
        if s.position.is_at(target) {
            hit = true;
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    })?;
    Ok(hit)
}

/// Estimates `P(S_m = target for some 1 <= m <= horizon)`.
pub fn monte_carlo_return_table(
    table: &StepTable,
    horizon: u64,
    target: (i64, i64),
    config: &MonteCarloConfig,
) -> Result<MonteCarloEstimate, WalkError> {
    table.check_horizon(horizon)?;
    let target = Target::new(target, table.frac_bits());
    run_trials(config, |sampler| {
        hits_target(table, horizon, &target, sampler, &config.walk)
    })
}

pub fn monte_carlo_return(
    seq: &StepSequence,
    horizon: u64,
    target: (i64, i64),
    config: &MonteCarloConfig,
) -> Result<MonteCarloEstimate, WalkError> {
    let table = StepTable::from_sequence(seq, horizon)?;
    monte_carlo_return_table(&table, horizon, target, config)
}
