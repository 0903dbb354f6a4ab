use serde::{Deserialize, Serialize};

use super::bezout::{positive_bezout, GoodSetPrefix};
use super::n0::{estimate_n0, N0Config, N0Estimate, N0Status};
use super::ConstructionError;
use crate::exact::{pmf_2d, ExactConfig};
use crate::sequences::{make_sequence, PlanSegment, SequenceSpec, StepSequence};
use crate::stats::{wilson_interval, Interval};
use crate::walk::{derive_seed, trial_rng, StepSampler, StepTable, RNG_ID};

/// How the radius `C` of round `k` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RadiusRule {
    /// `α_k · n_k`, the deterministic bound on `‖S_{n_k}‖`.
    #[default]
    Coarse,
    /// The largest `‖S_{n_k}‖` seen over `trials` simulated prefixes.
    Realized,
}

/// What to do when a round's horizon search hits the cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InconclusivePolicy {
    #[default]
    Fail,
    /// Use the cap as `N₀` and mark the round uncertified.
    UseCap,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuildConfig {
    pub rounds: usize,
    pub n0: N0Config,
    #[serde(default)]
    pub radius: RadiusRule,
    #[serde(default)]
    pub on_inconclusive: InconclusivePolicy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanRound {
    pub round: usize,
    pub b_prime: u64,
    pub c_prime: u64,
    pub b_second: u64,
    pub c_second: u64,
    /// `α_k`, the largest step emitted before this round.
    pub alpha: u64,
    /// The radius `C` the horizon was certified for.
    pub radius: u64,
    pub n_start: u64,
    /// Horizon in composite steps.
    pub n0: u64,
    pub n_end: u64,
    pub certified: bool,
    /// Smallest Wilson lower bound over the targets at `n0`.
    pub worst_lower_bound: f64,
    pub targets: usize,
    pub exhaustive_targets: bool,
    pub seed: u64,
}

impl PlanRound {
    pub fn segment(&self) -> PlanSegment {
        PlanSegment {
            b_prime: self.b_prime,
            c_prime: self.c_prime,
            b_second: self.b_second,
            c_second: self.c_second,
            n0: self.n0,
        }
    }
}

/// A finished schedule. Serialized as JSON it regenerates the sequence
/// exactly through [`ConstructionPlan::to_sequence`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstructionPlan {
    pub good_set: Vec<u64>,
    pub rounds: Vec<PlanRound>,
    pub trials: u64,
    pub level: f64,
    pub master_seed: u64,
    pub horizon_cap: u64,
    pub radius_rule: RadiusRule,
    pub rng: String,
}

impl ConstructionPlan {
    /// `n_k` after the last round (0 for an empty plan).
    pub fn length(&self) -> u64 {
        self.rounds.last().map_or(0, |r| r.n_end)
    }

    pub fn to_sequence(&self) -> Result<StepSequence, ConstructionError> {
        Ok(make_sequence(SequenceSpec::FromPlan {
            segments: self.rounds.iter().map(PlanRound::segment).collect(),
        })?)
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    pub fn from_json(text: &str) -> Result<Self, ConstructionError> {
        serde_json::from_str(text).map_err(|e| ConstructionError::InvalidParameter(e.to_string()))
    }

    /// Replays pair selection, Bézout coefficients and boundaries from the
    /// good set and checks the stored rounds against them.
    pub fn check_well_formed(&self) -> Result<(), ConstructionError> {
        let mut set = GoodSetPrefix::new(self.good_set.clone())?;
        let mut n = 0u64;
        let mut alpha = 0u64;
        for (k, r) in self.rounds.iter().enumerate() {
            let mismatch = |what: &str| {
                Err(ConstructionError::Consistency(format!("round {}: {what}", k + 1)))
            };
            let (b1, b2) = set.pick_pair()?;
            let pair = positive_bezout(b1, b2)?;
            if r.round != k + 1 {
                return mismatch("round number");
            }
            if (r.b_prime, r.b_second, r.c_prime, r.c_second)
                != (pair.b_prime, pair.b_second, pair.c_prime, pair.c_second)
            {
                return mismatch("pair or coefficients");
            }
            if r.alpha != alpha || r.n_start != n {
                return mismatch("start boundary");
            }
            if self.radius_rule == RadiusRule::Coarse && r.radius != alpha * n {
                return mismatch("radius");
            }
            n += pair.period() * r.n0;
            if r.n_end != n {
                return mismatch("end boundary");
            }
            alpha = alpha.max(b1).max(b2);
        }
        Ok(())
    }
}

fn max_norm_after(
    values: &[u64],
    trials: u64,
    seed: u64,
    execution: crate::Execution,
) -> Result<u64, ConstructionError> {
    if values.is_empty() {
        return Ok(0);
    }
    let table = StepTable::from_values(values)?;
    let sizes = table.narrow().expect("plan steps fit in 64 bits");
    let norms = execution.map_collect(trials, |i| {
        let mut s = StepSampler::new(trial_rng(seed, i));
        let (mut x, mut y) = (0i128, 0i128);
        for &a in sizes {
            let (dx, dy) = s.sample_step().unit();
            x += (dx * a) as i128;
            y += (dy * a) as i128;
        }
        ((x * x + y * y) as f64).sqrt().ceil() as u64
    });
    Ok(norms.into_iter().max().unwrap_or(0))
}

/// Runs the round-by-round construction on the good set.
pub fn build_recurrent_sequence(
    good_set: &[u64],
    config: &BuildConfig,
) -> Result<(ConstructionPlan, StepSequence, Vec<N0Estimate>), ConstructionError> {
    let mut set = GoodSetPrefix::new(good_set.to_vec())?;
    let mut rounds = Vec::with_capacity(config.rounds);
    let mut estimates = Vec::with_capacity(config.rounds);
    let mut emitted: Vec<u64> = Vec::new();
    let mut n = 0u64;
    let mut alpha = 0u64;
    for k in 1..=config.rounds {
        let (b1, b2) = set.pick_pair()?;
        let pair = positive_bezout(b1, b2)?;
        let seed = derive_seed(config.n0.master_seed, k as u64);
        let radius = match config.radius {
            RadiusRule::Coarse => alpha.checked_mul(n).ok_or_else(|| {
                ConstructionError::InvalidParameter(format!("radius overflows in round {k}"))
            })?,
            RadiusRule::Realized => max_norm_after(
                &emitted,
                config.n0.trials,
                derive_seed(seed, 0),
                config.n0.execution,
            )?,
        };
        let mut n0_config = config.n0;
        n0_config.master_seed = seed;
        let estimate = estimate_n0(&pair, radius, &n0_config)?;
        let (n0, certified) = match (estimate.status, config.on_inconclusive) {
            (N0Status::Certified, _) => (estimate.n0.unwrap(), true),
            (N0Status::Inconclusive, InconclusivePolicy::UseCap) => (config.n0.horizon_cap, false),
            (N0Status::Inconclusive, InconclusivePolicy::Fail) => {
                return Err(ConstructionError::Inconclusive {
                    round: k,
                    estimate: Box::new(estimate),
                })
            }
        };
        let round = PlanRound {
            round: k,
            b_prime: pair.b_prime,
            c_prime: pair.c_prime,
            b_second: pair.b_second,
            c_second: pair.c_second,
            alpha,
            radius,
            n_start: n,
            n0,
            n_end: n + pair.period() * n0,
            certified,
            worst_lower_bound: estimate.worst_final_lower(),
            targets: estimate.target_count,
            exhaustive_targets: estimate.exhaustive_targets,
            seed,
        };
        let segment = round.segment();
        emitted.extend((0..segment.len()).map(|i| segment.value_at(i)));
        n = round.n_end;
        alpha = alpha.max(b1).max(b2);
        rounds.push(round);
        estimates.push(estimate);
    }
    let plan = ConstructionPlan {
        good_set: good_set.to_vec(),
        rounds,
        trials: config.n0.trials,
        level: config.n0.level,
        master_seed: config.n0.master_seed,
        horizon_cap: config.n0.horizon_cap,
        radius_rule: config.radius,
        rng: RNG_ID.to_string(),
    };
    let seq = plan.to_sequence()?;
    Ok((plan, seq, estimates))
}

/// Exact probability that one composite step lands on each of `+e₁, −e₁,
/// +e₂, −e₂`.
pub fn composite_unit_masses(
    b_prime: u64,
    b_second: u64,
    config: &ExactConfig,
) -> Result<[num_rational::BigRational; 4], ConstructionError> {
    let pair = positive_bezout(b_prime, b_second)?;
    let pmf = pmf_2d(&pair.composite_steps(), config)?;
    Ok([(1, 0), (-1, 0), (0, 1), (0, -1)].map(|p| pmf.mass(p)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentReturn {
    pub round: usize,
    pub trials: u64,
    pub successes: u64,
    pub fraction: f64,
    pub interval: Interval,
}

/// For each round, the fraction of fresh walks over the plan's sequence that
/// visit 0 at some step in `n_k + 1 ..= n_{k+1}`.
pub fn segment_return_fractions(
    plan: &ConstructionPlan,
    trials: u64,
    master_seed: u64,
    level: f64,
    execution: crate::Execution,
) -> Result<Vec<SegmentReturn>, ConstructionError> {
    if trials == 0 {
        return Err(ConstructionError::InvalidParameter("trials must be >= 1".into()));
    }
    if plan.rounds.len() > 64 {
        return Err(ConstructionError::InvalidParameter(
            "at most 64 rounds can be checked at once".into(),
        ));
    }
    let seq = plan.to_sequence()?;
    let values = seq.integer_prefix(plan.length())?;
    let table = StepTable::from_values(&values)?;
    let sizes = table.narrow().expect("plan steps fit in 64 bits");
    let ends: Vec<u64> = plan.rounds.iter().map(|r| r.n_end).collect();
    let masks = execution.map_collect(trials, |i| {
        let mut s = StepSampler::for_trial(master_seed, i);
        let (mut x, mut y) = (0i64, 0i64);
        let mut mask = 0u64;
        let mut round = 0usize;
        for (n, &a) in sizes.iter().enumerate() {
            while n as u64 >= ends[round] {
                round += 1;
            }
            let (dx, dy) = s.sample_step().unit();
            x += dx * a;
            y += dy * a;
            if x == 0 && y == 0 {
                mask |= 1 << round;
            }
        }
        mask
    });
    Ok(plan
        .rounds
        .iter()
        .enumerate()
        .map(|(k, r)| {
            let successes = masks.iter().filter(|&&m| m & (1 << k) != 0).count() as u64;
            SegmentReturn {
                round: r.round,
                trials,
                successes,
                fraction: successes as f64 / trials as f64,
                interval: wilson_interval(successes, trials, level),
            }
        })
        .collect())
}
