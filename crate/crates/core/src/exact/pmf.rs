use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::AddAssign;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::{ExactConfig, ExactError};

/// `count / 2^log2_denom` as a reduced rational.
pub(crate) fn dyadic(count: &BigUint, log2_denom: u64) -> BigRational {
    BigRational::new(
        BigInt::from(count.clone()),
        BigInt::from(BigUint::one() << log2_denom),
    )
}

pub(crate) fn check_steps(d: &[u64]) -> Result<u64, ExactError> {
    if let Some(pos) = d.iter().position(|&v| v == 0) {
        return Err(ExactError::InvalidParameter(format!(
            "step {} must be > 0",
            pos + 1
        )));
    }
    d.iter()
        .try_fold(0u64, |acc, &v| acc.checked_add(v))
        .ok_or_else(|| ExactError::InvalidParameter("step sum overflows 64 bits".into()))
}

/// Counts of sign patterns of `Σ d_i ε_i`, densely indexed by `z + Σd`.
pub(crate) fn signed_sum_counts<C>(d: &[u64]) -> Vec<C>
where
    C: Clone + Zero + for<'a> AddAssign<&'a C>,
    C: From<u8>,
{
    let total: u64 = d.iter().sum();
    let width = 2 * total as usize + 1;
    let mut counts = vec![C::zero(); width];
    counts[total as usize] = C::from(1u8);
    // Track the occupied window [centre - reach, centre + reach].
    let mut reach = 0usize;
    let centre = total as usize;
    let mut next = vec![C::zero(); width];
    for &step in d {
        let s = step as usize;
        let new_reach = reach + s;
        for slot in &mut next[centre - new_reach..=centre + new_reach] {
            *slot = C::zero();
        }
        for z in centre - reach..=centre + reach {
            if counts[z].is_zero() {
                continue;
            }
            let c = counts[z].clone();
            next[z + s] += &c;
            next[z - s] += &c;
        }
        std::mem::swap(&mut counts, &mut next);
        reach = new_reach;
    }
    counts
}

/// Exact law of `T = d_1 ε_1 + … + d_k ε_k` with i.i.d. fair signs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactPmf1D {
    steps: Vec<u64>,
    support: Vec<i64>,
    counts: Vec<BigUint>,
}

impl ExactPmf1D {
    pub fn steps(&self) -> &[u64] {
        &self.steps
    }

    /// Sorted support points (all with positive mass).
    pub fn support(&self) -> &[i64] {
        &self.support
    }

    /// Number of sign patterns landing on each support point.
    pub fn counts(&self) -> &[BigUint] {
        &self.counts
    }

    /// Masses are `count / 2^log2_denominator`.
    pub fn log2_denominator(&self) -> u64 {
        self.steps.len() as u64
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn count_at(&self, z: i64) -> BigUint {
        match self.support.binary_search(&z) {
            Ok(i) => self.counts[i].clone(),
            Err(_) => BigUint::zero(),
        }
    }

    pub fn mass(&self, z: i64) -> BigRational {
        dyadic(&self.count_at(z), self.log2_denominator())
    }

    pub fn masses(&self) -> impl Iterator<Item = (i64, BigRational)> + '_ {
        let k = self.log2_denominator();
        self.support
            .iter()
            .zip(&self.counts)
            .map(move |(&z, c)| (z, dyadic(c, k)))
    }

    pub fn total_mass(&self) -> BigRational {
        let sum: BigUint = self.counts.iter().sum();
        dyadic(&sum, self.log2_denominator())
    }

    /// Two columns: `value<TAB>numerator/denominator`.
    pub fn to_text(&self) -> String {
        let mut out = String::from("# value\tmass\n");
        for (z, m) in self.masses() {
            let _ = writeln!(out, "{z}\t{}/{}", m.numer(), m.denom());
        }
        out
    }
}

/// Exact law of `S_n = a_1 ξ_1 + … + a_n ξ_n` on `Z²`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactPmf2D {
    steps: Vec<u64>,
    points: Vec<((i64, i64), BigUint)>,
}

impl ExactPmf2D {
    pub fn steps(&self) -> &[u64] {
        &self.steps
    }

    /// Masses are `count / 4^n = count / 2^(2n)`.
    pub fn log2_denominator(&self) -> u64 {
        2 * self.steps.len() as u64
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn support(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        self.points.iter().map(|(p, _)| *p)
    }

    pub fn mass(&self, point: (i64, i64)) -> BigRational {
        match self.points.binary_search_by(|(p, _)| p.cmp(&point)) {
            Ok(i) => dyadic(&self.points[i].1, self.log2_denominator()),
            Err(_) => BigRational::zero(),
        }
    }

    pub fn masses(&self) -> impl Iterator<Item = ((i64, i64), BigRational)> + '_ {
        let k = self.log2_denominator();
        self.points.iter().map(move |(p, c)| (*p, dyadic(c, k)))
    }

    pub fn total_mass(&self) -> BigRational {
        let sum: BigUint = self.points.iter().map(|(_, c)| c).sum();
        dyadic(&sum, self.log2_denominator())
    }

    /// Three columns: `x<TAB>y<TAB>numerator/denominator`.
    pub fn to_text(&self) -> String {
        let mut out = String::from("# x\ty\tmass\n");
        for ((x, y), m) in self.masses() {
            let _ = writeln!(out, "{x}\t{y}\t{}/{}", m.numer(), m.denom());
        }
        out
    }
}

/// Exact law of `Σ d_i ε_i` by iterated convolution.
pub fn pmf_1d(d: &[u64], config: &ExactConfig) -> Result<ExactPmf1D, ExactError> {
    let total = check_steps(d)?;
    let width = 2 * total as u128 + 1;
    if width > config.support_budget as u128 {
        return Err(ExactError::Budget {
            needed: width,
            budget: config.support_budget,
        });
    }
    let dense: Vec<BigUint> = signed_sum_counts(d);
    let mut support = Vec::new();
    let mut counts = Vec::new();
    for (i, c) in dense.into_iter().enumerate() {
        if !c.is_zero() {
            support.push(i as i64 - total as i64);
            counts.push(c);
        }
    }
    Ok(ExactPmf1D {
        steps: d.to_vec(),
        support,
        counts,
    })
}

/// Lattice points reachable within `|x| + |y| <= total`.
pub(crate) fn diamond_size(total: u64) -> u128 {
    let t = total as u128;
    2 * t * t + 2 * t + 1
}

pub(crate) fn step_2d(
    dist: &BTreeMap<(i64, i64), BigUint>,
    a: u64,
) -> BTreeMap<(i64, i64), BigUint> {
    let a = a as i64;
    let mut next: BTreeMap<(i64, i64), BigUint> = BTreeMap::new();
    for (&(x, y), c) in dist {
        for p in [(x + a, y), (x - a, y), (x, y + a), (x, y - a)] {
            *next.entry(p).or_default() += c;
        }
    }
    next
}

/// Exact law of the two-dimensional walk after `a.len()` steps.
pub fn pmf_2d(a: &[u64], config: &ExactConfig) -> Result<ExactPmf2D, ExactError> {
    let total = check_steps(a)?;
    let needed = diamond_size(total);
    if needed > config.support_budget as u128 {
        return Err(ExactError::Budget {
            needed,
            budget: config.support_budget,
        });
    }
    let mut dist = BTreeMap::new();
    dist.insert((0i64, 0i64), BigUint::one());
    for &step in a {
        dist = step_2d(&dist, step);
    }
    Ok(ExactPmf2D {
        steps: a.to_vec(),
        points: dist.into_iter().collect(),
    })
}
