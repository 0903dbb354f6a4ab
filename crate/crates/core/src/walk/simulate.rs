use std::ops::ControlFlow;

use num_traits::Zero;
use serde::Serialize;

use super::state::{Position, StepTable, Target, WalkConfig, WalkState};
use super::step::{trial_rng, Direction, StepSampler, RNG_ID};
use super::WalkError;
use crate::sequences::{RunLengthDecomposition, StepSequence};

/// Receives every state `S_1, …, S_n` together with the step that led to it.
pub trait Visitor {
    fn visit(&mut self, state: &WalkState, step: Direction) -> ControlFlow<()>;
}

impl<F: FnMut(&WalkState, Direction) -> ControlFlow<()>> Visitor for F {
    fn visit(&mut self, state: &WalkState, step: Direction) -> ControlFlow<()> {
        self(state, step)
    }
}

/// A visitor that looks at nothing.
pub struct NoVisitor;

impl Visitor for NoVisitor {
    fn visit(&mut self, _: &WalkState, _: Direction) -> ControlFlow<()> {
        ControlFlow::Continue(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WalkSummary {
    pub horizon: u64,
    /// Steps actually taken; smaller than `horizon` when the visitor stopped.
    pub steps: u64,
    pub final_state: WalkState,
    pub horizontal_steps: u64,
    pub vertical_steps: u64,
    /// Position units are `2^-frac_bits`.
    pub frac_bits: u32,
    pub seed: u64,
    pub rng: &'static str,
}

/// Runs `horizon` steps of the table with the given sampler.
pub fn simulate_table<V: Visitor>(
    table: &StepTable,
    horizon: u64,
    sampler: &mut StepSampler,
    config: &WalkConfig,
    visitor: &mut V,
) -> Result<WalkSummary, WalkError> {
    table.check_horizon(horizon)?;
    let mut state = WalkState::default();
    let mut horizontal = 0;
    for i in 0..horizon as usize {
        let direction = sampler.sample_step();
        state.position.advance(direction, table.size_ref(i), config.overflow, i as u64 + 1)?;
        state.n += 1;
        horizontal += direction.is_horizontal() as u64;
        if visitor.visit(&state, direction).is_break() {
            break;
        }
    }
    Ok(WalkSummary {
        horizon,
        steps: state.n,
        vertical_steps: state.n - horizontal,
        horizontal_steps: horizontal,
        final_state: state,
        frac_bits: table.frac_bits(),
        seed: 0,
        rng: RNG_ID,
    })
}

/// Simulates `S_1, …, S_horizon` for `seq`, drawing directions from stream 0
/// of `seed`.
pub fn simulate<V: Visitor>(
    seq: &StepSequence,
    horizon: u64,
    seed: u64,
    config: &WalkConfig,
    visitor: &mut V,
) -> Result<WalkSummary, WalkError> {
    let table = StepTable::from_sequence(seq, horizon)?;
    let mut sampler = StepSampler::new(trial_rng(seed, 0));
    let mut summary = simulate_table(&table, horizon, &mut sampler, config, visitor)?;
    summary.seed = seed;
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TargetVisits {
    pub target: (i64, i64),
    /// Visits at times `1..=horizon`; the start is never counted.
    pub count: u64,
    pub first_hit: Option<u64>,
    pub last_hit: Option<u64>,
    /// `min_{1<=m<=n} ‖S_m - z‖` in lattice units.
    pub min_distance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VisitStatistics {
    pub horizon: u64,
    pub seed: u64,
    pub rng: &'static str,
    pub targets: Vec<TargetVisits>,
}

struct VisitCounter {
    targets: Vec<Target>,
    visits: Vec<TargetVisits>,
}

impl Visitor for VisitCounter {
    fn visit(&mut self, state: &WalkState, _: Direction) -> ControlFlow<()> {
        for (t, v) in self.targets.iter().zip(&mut self.visits) {
            if state.position.is_at(t) {
                v.count += 1;
                v.first_hit.get_or_insert(state.n);
                v.last_hit = Some(state.n);
                v.min_distance = Some(0.0);
            } else {
                let d = state.position.distance_sq(t);
                if v.min_distance.is_none_or(|m| d < m) {
                    v.min_distance = Some(d);
                }
            }
        }
        ControlFlow::Continue(())
    }
}

/// Visit counts for each target along one simulated path.
pub fn visit_statistics_table(
    table: &StepTable,
    horizon: u64,
    sampler: &mut StepSampler,
    targets: &[(i64, i64)],
    config: &WalkConfig,
) -> Result<VisitStatistics, WalkError> {
    let bits = table.frac_bits();
    let mut counter = VisitCounter {
        targets: targets.iter().map(|&p| Target::new(p, bits)).collect(),
        visits: targets
            .iter()
            .map(|&target| TargetVisits {
                target,
                count: 0,
                first_hit: None,
                last_hit: None,
                min_distance: None,
            })
            .collect(),
    };
    simulate_table(table, horizon, sampler, config, &mut counter)?;
    let unit = 2f64.powi(bits as i32);
    for v in &mut counter.visits {
        v.min_distance = v.min_distance.map(|d| d.sqrt() / unit);
    }
    Ok(VisitStatistics {
        horizon,
        seed: 0,
        rng: RNG_ID,
        targets: counter.visits,
    })
}

pub fn visit_statistics(
    seq: &StepSequence,
    horizon: u64,
    seed: u64,
    targets: &[(i64, i64)],
    config: &WalkConfig,
) -> Result<VisitStatistics, WalkError> {
    let table = StepTable::from_sequence(seq, horizon)?;
    let mut sampler = StepSampler::new(trial_rng(seed, 0));
    let mut stats = visit_statistics_table(&table, horizon, &mut sampler, targets, config)?;
    stats.seed = seed;
    Ok(stats)
}

/// A recorded path: the steps taken and every position `S_0, …, S_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    table: StepTable,
    directions: Vec<Direction>,
    positions: Vec<Position>,
}

impl Trajectory {
    /// Replays an explicit list of directions.
    pub fn from_directions(
        table: &StepTable,
        directions: &[Direction],
        config: &WalkConfig,
    ) -> Result<Self, WalkError> {
        table.check_horizon(directions.len() as u64)?;
        let mut positions = Vec::with_capacity(directions.len() + 1);
        let mut p = Position::default();
        positions.push(p.clone());
        for (i, &d) in directions.iter().enumerate() {
            p.advance(d, table.size_ref(i), config.overflow, i as u64 + 1)?;
            positions.push(p.clone());
        }
        Ok(Trajectory {
            table: table.truncated(directions.len()),
            directions: directions.to_vec(),
            positions,
        })
    }

    pub fn record(
        table: &StepTable,
        horizon: u64,
        sampler: &mut StepSampler,
        config: &WalkConfig,
    ) -> Result<Self, WalkError> {
        let mut directions = Vec::with_capacity(horizon as usize);
        let mut positions = Vec::with_capacity(horizon as usize + 1);
        positions.push(Position::default());
        simulate_table(table, horizon, sampler, config, &mut |s: &WalkState, d| {
            directions.push(d);
            positions.push(s.position.clone());
            ControlFlow::Continue(())
        })?;
        Ok(Trajectory {
            table: table.truncated(horizon as usize),
            directions,
            positions,
        })
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn table(&self) -> &StepTable {
        &self.table
    }

    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }

    /// `S_n` for `0 <= n <= len`.
    pub fn position(&self, n: usize) -> &Position {
        &self.positions[n]
    }

    /// Recomputes every position from the recorded steps and compares.
    pub fn is_consistent(&self) -> bool {
        let Ok(replayed) = Trajectory::from_directions(
            &self.table,
            &self.directions,
            &WalkConfig::promoting(),
        ) else {
            return false;
        };
        replayed
            .positions
            .iter()
            .zip(&self.positions)
            .all(|(a, b)| a.x() == b.x() && a.y() == b.y())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockDivisibility {
    /// Block number `j`, from 1.
    pub block: usize,
    /// The common value `b_j`.
    pub value: u64,
    /// The inspected time `k_j - 1`.
    pub time: u64,
    pub x_divisible: bool,
    pub y_divisible: bool,
}

/// For each block `j`, whether `b_j` divides each coordinate of `S_{k_j - 1}`.
pub fn divisibility_at_blocks(
    trajectory: &Trajectory,
    decomposition: &RunLengthDecomposition,
) -> Result<Vec<BlockDivisibility>, WalkError> {
    let table = trajectory.table();
    if table.frac_bits() != 0 {
        return Err(WalkError::Consistency(
            "divisibility needs an integer step sequence".into(),
        ));
    }
    let expanded = decomposition.expand();
    for (i, &v) in expanded.iter().enumerate().take(trajectory.len()) {
        if table.size(i as u64 + 1) != v.into() {
            return Err(WalkError::Consistency(format!(
                "step a_{} is {} on the path but {v} in the decomposition",
                i + 1,
                table.size(i as u64 + 1)
            )));
        }
    }
    let mut out = Vec::with_capacity(decomposition.values.len());
    for (j, (&b, &k)) in decomposition
        .values
        .iter()
        .zip(&decomposition.starts)
        .enumerate()
    {
        let time = k - 1;
        if time > trajectory.len() as u64 {
            return Err(WalkError::Consistency(format!(
                "block {} starts at step {k} but the path has only {} steps",
                j + 1,
                trajectory.len()
            )));
        }
        let p = trajectory.position(time as usize);
        let divides = |c: num_bigint::BigInt| (c % b).is_zero();
        out.push(BlockDivisibility {
            block: j + 1,
            value: b,
            time,
            x_divisible: divides(p.x()),
            y_divisible: divides(p.y()),
        });
    }
    Ok(out)
}

/// `(κ, ε)` totals, for the conservation check.
pub fn kappa_total(directions: &[Direction]) -> u64 {
    directions.iter().map(|d| d.decompose().0 as u64).sum()
}
