use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::bezout::BezoutPair;
use super::ConstructionError;
use crate::stats::wilson_interval;
use crate::walk::{StepSampler, RNG_ID};
use crate::Execution;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct N0Config {
    pub trials: u64,
    #[serde(default = "default_level")]
    pub level: f64,
    pub master_seed: u64,
    /// Largest composite-step horizon tried.
    #[serde(default = "default_cap")]
    pub horizon_cap: u64,
    /// Above this many octant points the target set is sampled.
    #[serde(default = "default_max_targets")]
    pub max_targets: usize,
    #[serde(default)]
    pub hit_rule: HitRule,
    #[serde(default)]
    pub execution: Execution,
}

/// Which positions of the composite-step path count as visits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HitRule {
    /// Only `T_1, T_2, …` at composite-step boundaries.
    #[default]
    Composite,
    /// Every single step inside a composite step as well, i.e. the positions
    /// the step sequence itself visits during a round.
    AnyStep,
}

fn default_level() -> f64 {
    0.95
}

fn default_cap() -> u64 {
    1 << 16
}

fn default_max_targets() -> usize {
    1024
}

impl N0Config {
    pub fn new(trials: u64, master_seed: u64) -> Self {
        N0Config {
            trials,
            level: default_level(),
            master_seed,
            horizon_cap: default_cap(),
            max_targets: default_max_targets(),
            hit_rule: HitRule::default(),
            execution: Execution::default(),
        }
    }
}

/// Lattice points `z` with `‖z‖ <= radius` to test, reduced to the octant
/// `0 <= y <= x` since the composite walk's law is invariant under the
/// symmetries of the square.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TargetSet {
    pub radius: u64,
    /// True when every octant point is present.
    pub exhaustive: bool,
    pub points: Vec<(i64, i64)>,
}

impl TargetSet {
    pub fn new(radius: u64, max_points: usize) -> Result<Self, ConstructionError> {
        if radius > i32::MAX as u64 {
            return Err(ConstructionError::InvalidParameter(format!(
                "radius {radius} is too large"
            )));
        }
        let r = radius as i64;
        let r2 = r * r;
        let count: u64 = (0..=r)
            .map(|x| {
                let ymax = isqrt((r2 - x * x) as u64) as i64;
                ymax.min(x) as u64 + 1
            })
            .sum();
        if count as usize <= max_points.max(1) {
            let mut points = Vec::with_capacity(count as usize);
            for x in 0..=r {
                let ymax = (isqrt((r2 - x * x) as u64) as i64).min(x);
                points.extend((0..=ymax).map(|y| (x, y)));
            }
            return Ok(TargetSet {
                radius,
                exhaustive: true,
                points,
            });
        }
        // Origin plus a polar grid: 8 radii out to the boundary, evenly spaced
        // angles in [0, π/4], each point rounded inward onto the lattice.
        let radii = 8usize;
        let angles = ((max_points.saturating_sub(1)) / radii).max(2);
        let mut points = vec![(0, 0)];
        for i in 1..=radii {
            let rho = radius as f64 * i as f64 / radii as f64;
            for j in 0..angles {
                let theta = std::f64::consts::FRAC_PI_4 * j as f64 / (angles - 1) as f64;
                let x = (rho * theta.cos()).floor() as i64;
                let y = ((rho * theta.sin()).floor() as i64).min(x);
                if x * x + y * y <= r2 {
                    points.push((x, y));
                }
            }
        }
        points.sort_unstable();
        points.dedup();
        Ok(TargetSet {
            radius,
            exhaustive: false,
            points,
        })
    }
}

fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum N0Status {
    Certified,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HorizonCheck {
    pub horizon: u64,
    /// Smallest Wilson lower bound over the target set.
    pub worst_lower: f64,
    pub worst_target: (i64, i64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TargetBound {
    pub target: (i64, i64),
    pub hits: u64,
    pub lower: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct N0Estimate {
    pub status: N0Status,
    /// Certified horizon in composite steps.
    pub n0: Option<u64>,
    pub pair: BezoutPair,
    pub radius: u64,
    pub target_count: usize,
    pub exhaustive_targets: bool,
    pub grid: Vec<HorizonCheck>,
    /// Per-target bounds at the last horizon tested.
    pub final_bounds: Vec<TargetBound>,
    pub hit_rule: HitRule,
    pub trials: u64,
    pub level: f64,
    pub master_seed: u64,
    pub rng: String,
}

impl N0Estimate {
    pub fn worst_final_lower(&self) -> f64 {
        self.grid.last().map_or(0.0, |h| h.worst_lower)
    }
}

/// `1, 2, 4, …` up to and including `cap`.
pub fn horizon_grid(cap: u64) -> Vec<u64> {
    let mut grid = Vec::new();
    let mut h = 1u64;
    while h < cap {
        grid.push(h);
        h *= 2;
    }
    grid.push(cap);
    grid
}

/// One composite step `b′(ξ′_1 + … + ξ′_{c′}) + b″(ξ″_1 + … + ξ″_{c″})`.
#[inline]
pub fn sample_composite(pair: &BezoutPair, sampler: &mut StepSampler) -> (i64, i64) {
    let (mut x, mut y) = (0i64, 0i64);
    for (b, c) in [(pair.b_prime, pair.c_prime), (pair.b_second, pair.c_second)] {
        let (mut ux, mut uy) = (0i64, 0i64);
        for _ in 0..c {
            let (dx, dy) = sampler.sample_step().unit();
            ux += dx;
            uy += dy;
        }
        x += ux * b as i64;
        y += uy * b as i64;
    }
    (x, y)
}

const NOT_HIT: u8 = u8::MAX;

struct Visits<'a> {
    index: &'a HashMap<(i64, i64), usize>,
    radius_sq: i64,
    buckets: Vec<u8>,
    remaining: usize,
}

impl Visits<'_> {
    /// Records a visit; true once every target has been seen.
    #[inline]
    fn see(&mut self, x: i64, y: i64, bucket: usize) -> bool {
        // targets all lie in the octant 0 <= y <= x
        if y < 0 || y > x || x * x + y * y > self.radius_sq {
            return false;
        }
        if let Some(&t) = self.index.get(&(x, y)) {
            if self.buckets[t] == NOT_HIT {
                self.buckets[t] = bucket as u8;
                self.remaining -= 1;
            }
        }
        self.remaining == 0
    }
}

/// First-hit grid buckets for every target along one composite-step path.
fn trial_buckets(
    pair: &BezoutPair,
    targets: usize,
    index: &HashMap<(i64, i64), usize>,
    radius_sq: i64,
    grid: &[u64],
    rule: HitRule,
    sampler: &mut StepSampler,
) -> Vec<u8> {
    let mut visits = Visits {
        index,
        radius_sq,
        buckets: vec![NOT_HIT; targets],
        remaining: targets,
    };
    let sizes = pair.composite_steps();
    let (mut x, mut y) = (0i64, 0i64);
    let mut g = 0usize;
    let cap = *grid.last().unwrap();
    for m in 1..=cap {
        while grid[g] < m {
            g += 1;
        }
        match rule {
            HitRule::Composite => {
                let (dx, dy) = sample_composite(pair, sampler);
                x += dx;
                y += dy;
                if visits.see(x, y, g) {
                    break;
                }
            }
            HitRule::AnyStep => {
                let mut done = false;
                for &b in &sizes {
                    let (dx, dy) = sampler.sample_step().unit();
                    x += dx * b as i64;
                    y += dy * b as i64;
                    done = visits.see(x, y, g);
                    if done {
                        break;
                    }
                }
                if done {
                    break;
                }
            }
        }
    }
    visits.buckets
}

/// Searches the doubling grid for the first horizon at which every target's
/// hit-by-horizon probability has Wilson lower bound at least 1/2.
///
/// All horizons share the same trials: each trial records the first grid
/// horizon at which it hit each target, so the estimates are monotone in the
/// horizon.
pub fn estimate_n0(
    pair: &BezoutPair,
    radius: u64,
    config: &N0Config,
) -> Result<N0Estimate, ConstructionError> {
    if config.trials == 0 {
        return Err(ConstructionError::InvalidParameter("trials must be >= 1".into()));
    }
    if config.horizon_cap == 0 {
        return Err(ConstructionError::InvalidParameter("horizon cap must be >= 1".into()));
    }
    if !(config.level > 0.0 && config.level < 1.0) {
        return Err(ConstructionError::InvalidParameter(format!(
            "confidence level {} must lie in (0, 1)",
            config.level
        )));
    }
    let reach = pair.c_prime as u128 * pair.b_prime as u128
        + pair.c_second as u128 * pair.b_second as u128;
    if reach * config.horizon_cap as u128 > (1u128 << 31) {
        return Err(ConstructionError::InvalidParameter(
            "composite walk could leave the 32-bit coordinate range; lower the horizon cap".into(),
        ));
    }
    let targets = TargetSet::new(radius, config.max_targets)?;
    let index: HashMap<(i64, i64), usize> =
        targets.points.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let grid = horizon_grid(config.horizon_cap);
    let r2 = (radius as i64) * (radius as i64);
    let master = config.master_seed;
    let per_trial = config.execution.map_collect(config.trials, |i| {
        let mut sampler = StepSampler::for_trial(master, i);
        trial_buckets(
            pair,
            targets.points.len(),
            &index,
            r2,
            &grid,
            config.hit_rule,
            &mut sampler,
        )
    });
    // hist[t][g]: trials whose first hit of t falls in bucket g
    let mut hist = vec![vec![0u64; grid.len()]; targets.points.len()];
    for buckets in &per_trial {
        for (t, &b) in buckets.iter().enumerate() {
            if b != NOT_HIT {
                hist[t][b as usize] += 1;
            }
        }
    }
    let mut cumulative = vec![0u64; targets.points.len()];
    let mut checks = Vec::with_capacity(grid.len());
    let mut n0 = None;
    for (g, &horizon) in grid.iter().enumerate() {
        let mut worst = (f64::INFINITY, (0, 0));
        for (t, &p) in targets.points.iter().enumerate() {
            cumulative[t] += hist[t][g];
            let lower = wilson_interval(cumulative[t], config.trials, config.level).lower;
            if lower < worst.0 {
                worst = (lower, p);
            }
        }
        checks.push(HorizonCheck {
            horizon,
            worst_lower: worst.0,
            worst_target: worst.1,
        });
        if worst.0 >= 0.5 {
            n0 = Some(horizon);
            break;
        }
    }
    let final_bounds = targets
        .points
        .iter()
        .zip(&cumulative)
        .map(|(&target, &hits)| TargetBound {
            target,
            hits,
            lower: wilson_interval(hits, config.trials, config.level).lower,
        })
        .collect();
    Ok(N0Estimate {
        status: if n0.is_some() {
            N0Status::Certified
        } else {
            N0Status::Inconclusive
        },
        n0,
        pair: *pair,
        radius,
        target_count: targets.points.len(),
        exhaustive_targets: targets.exhaustive,
        grid: checks,
        final_bounds,
        hit_rule: config.hit_rule,
        trials: config.trials,
        level: config.level,
        master_seed: config.master_seed,
        rng: RNG_ID.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::positive_bezout;

    #[test]
    fn grid_doubles_up_to_cap() {
        assert_eq!(horizon_grid(1), vec![1]);
        assert_eq!(horizon_grid(8), vec![1, 2, 4, 8]);
        assert_eq!(horizon_grid(10), vec![1, 2, 4, 8, 10]);
    }

    #[test]
    fn small_radius_targets_are_exhaustive() {
        let t = TargetSet::new(0, 10).unwrap();
        assert_eq!(t.points, vec![(0, 0)]);
        let t = TargetSet::new(2, 100).unwrap();
        assert!(t.exhaustive);
        assert_eq!(t.points, vec![(0, 0), (1, 0), (1, 1), (2, 0)]);
    }

    #[test]
    fn large_radius_targets_are_sampled_within_the_disc() {
        let t = TargetSet::new(1_000_000, 200).unwrap();
        assert!(!t.exhaustive);
        assert!(t.points.len() <= 200 && t.points.len() > 100);
        assert!(t.points.contains(&(0, 0)));
        assert!(t.points.contains(&(1_000_000, 0)));
        for &(x, y) in &t.points {
            assert!(0 <= y && y <= x);
            assert!(x * x + y * y <= 1_000_000i64 * 1_000_000);
        }
    }

    #[test]
    fn composite_step_parity() {
        // (2,3) with c' = 2, c'' = 1: x + y changes by an odd amount.
        let pair = positive_bezout(2, 3).unwrap();
        let mut s = StepSampler::for_trial(1, 0);
        for _ in 0..1000 {
            let (x, y) = sample_composite(&pair, &mut s);
            assert_eq!((x + y).rem_euclid(2), 1);
            assert!(x.abs() + y.abs() <= 7);
        }
    }

    #[test]
    fn origin_certification_and_zero_trials() {
        let pair = positive_bezout(2, 3).unwrap();
        let mut cfg = N0Config::new(400, 8);
        cfg.horizon_cap = 1 << 12;
        let est = estimate_n0(&pair, 0, &cfg).unwrap();
        // Certification at a horizon this short is not expected; the bounds
        // must still be monotone along the grid.
        for w in est.grid.windows(2) {
            assert!(w[0].worst_lower <= w[1].worst_lower);
        }
        assert_eq!(est.target_count, 1);
        cfg.trials = 0;
        assert!(estimate_n0(&pair, 0, &cfg).is_err());
    }

    #[test]
    fn any_step_visits_dominate_composite_visits() {
        let pair = positive_bezout(2, 3).unwrap();
        let mut cfg = N0Config::new(500, 21);
        cfg.horizon_cap = 1 << 10;
        let composite = estimate_n0(&pair, 0, &cfg).unwrap();
        cfg.hit_rule = HitRule::AnyStep;
        let any = estimate_n0(&pair, 0, &cfg).unwrap();
        // same random stream, and every composite-boundary visit is also a
        // single-step visit
        assert!(any.final_bounds[0].hits >= composite.final_bounds[0].hits);
        assert!(any.final_bounds[0].hits > composite.final_bounds[0].hits);
    }

    #[test]
    fn easy_pair_certifies() {
        // b' = 1, b'' = 1: c' = 2, c'' = 1, a lazy-free three-step composite.
        let pair = positive_bezout(1, 1).unwrap();
        let mut cfg = N0Config::new(300, 4);
        cfg.horizon_cap = 1 << 14;
        let est = estimate_n0(&pair, 1, &cfg).unwrap();
        assert_eq!(est.status, N0Status::Certified);
        let n0 = est.n0.unwrap();
        assert!(est.grid.last().unwrap().horizon == n0);
        assert!(est.worst_final_lower() >= 0.5);
    }
}
