use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::pmf::{check_steps, diamond_size, dyadic, pmf_1d, step_2d};
use super::{ExactConfig, ExactError};
use crate::Rational;

/// How `mod_probability` computes its answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModPath {
    /// Fold the full-support law (memory grows with `Σd`).
    Full,
    /// Convolve directly in `Z/mZ` (memory grows with `m`).
    #[default]
    Residue,
}

/// Law of `T mod m` as sign-pattern counts per residue.
pub fn residue_counts(
    d: &[u64],
    m: u64,
    path: ModPath,
    config: &ExactConfig,
) -> Result<Vec<BigUint>, ExactError> {
    if m == 0 {
        return Err(ExactError::InvalidParameter("modulus must be >= 1".into()));
    }
    check_steps(d)?;
    match path {
        ModPath::Full => {
            let pmf = pmf_1d(d, config)?;
            let mut out = vec![BigUint::zero(); m as usize];
            for (&z, c) in pmf.support().iter().zip(pmf.counts()) {
                out[z.rem_euclid(m as i64) as usize] += c;
            }
            Ok(out)
        }
        ModPath::Residue => {
            if m > config.support_budget {
                return Err(ExactError::Budget {
                    needed: m as u128,
                    budget: config.support_budget,
                });
            }
            let m_us = m as usize;
            let mut counts = vec![BigUint::zero(); m_us];
            counts[0] = BigUint::one();
            for &step in d {
                let s = (step % m) as usize;
                let mut next = vec![BigUint::zero(); m_us];
                for (r, c) in counts.iter().enumerate() {
                    if c.is_zero() {
                        continue;
                    }
                    next[(r + s) % m_us] += c;
                    next[(r + m_us - s) % m_us] += c;
                }
                counts = next;
            }
            Ok(counts)
        }
    }
}

/// `P(T ≡ residue mod m)` for `T = Σ d_i ε_i`.
pub fn mod_probability(
    d: &[u64],
    m: u64,
    residue: u64,
    path: ModPath,
    config: &ExactConfig,
) -> Result<BigRational, ExactError> {
    if residue >= m {
        return Err(ExactError::InvalidParameter(format!(
            "residue {residue} must lie in 0..{m}"
        )));
    }
    let counts = residue_counts(d, m, path, config)?;
    Ok(dyadic(&counts[residue as usize], d.len() as u64))
}

/// The largest mass over all residues, with the first residue attaining it.
pub fn sup_mod_probability(
    d: &[u64],
    m: u64,
    path: ModPath,
    config: &ExactConfig,
) -> Result<(BigRational, u64), ExactError> {
    let counts = residue_counts(d, m, path, config)?;
    let (best, count) = counts
        .iter()
        .enumerate()
        .fold((0usize, &counts[0]), |acc, (r, c)| if c > acc.1 { (r, c) } else { acc });
    Ok((dyadic(count, d.len() as u64), best as u64))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalMax {
    /// `sup_x P(T ∈ (x - D, x + D])`.
    pub sup: BigRational,
    /// A centre `x` attaining it.
    pub argmax: BigRational,
}

/// Exact `sup_x P(T ∈ (x - D, x + D])`; requires every `d_i >= D`.
pub fn max_interval_probability(
    d: &[u64],
    half_width: Rational,
    config: &ExactConfig,
) -> Result<IntervalMax, ExactError> {
    if half_width.is_zero() {
        return Err(ExactError::InvalidParameter("half-width D must be > 0".into()));
    }
    check_min_step(d, half_width)?;
    let pmf = pmf_1d(d, config)?;
    let (count, right) = best_window(pmf.support(), pmf.counts(), half_width);
    let sup = dyadic(&count, pmf.log2_denominator());
    let argmax = BigRational::from_integer(BigInt::from(right)) - half_width.to_big();
    Ok(IntervalMax { sup, argmax })
}

pub(crate) fn check_min_step(d: &[u64], half_width: Rational) -> Result<(), ExactError> {
    // d_i >= p/q  <=>  d_i * q >= p
    if let Some(pos) = d
        .iter()
        .position(|&v| (v as u128) * (half_width.denom() as u128) < half_width.numer() as u128)
    {
        return Err(ExactError::Precondition(format!(
            "step d_{} = {} is smaller than the half-width D = {half_width}",
            pos + 1,
            d[pos]
        )));
    }
    Ok(())
}

/// Best window `(s - 2D, s]` over a sorted support; returns (count, s).
/// Any half-open window of length `2D` can be slid right until its closed end
/// hits a support point without losing mass, so only these need checking.
pub(crate) fn best_window<C>(support: &[i64], counts: &[C], half_width: Rational) -> (C, i64)
where
    C: Clone + Zero + PartialOrd + for<'a> std::ops::AddAssign<&'a C> + for<'a> std::ops::SubAssign<&'a C>,
{
    // t is inside (s - 2D, s]  <=>  (s - t) * q < 2p
    let two_p = 2 * half_width.numer() as i128;
    let q = half_width.denom() as i128;
    let mut best = C::zero();
    let mut best_at = support.first().copied().unwrap_or(0);
    let mut window = C::zero();
    let mut lo = 0usize;
    for (hi, &s) in support.iter().enumerate() {
        window += &counts[hi];
        while (s as i128 - support[lo] as i128) * q >= two_p {
            window -= &counts[lo];
            lo += 1;
        }
        if window > best {
            best = window.clone();
            best_at = s;
        }
    }
    (best, best_at)
}

/// Largest point mass `sup_z P(T = z)`.
pub fn sup_pmf(d: &[u64], config: &ExactConfig) -> Result<BigRational, ExactError> {
    let pmf = pmf_1d(d, config)?;
    let best = pmf.counts().iter().max().cloned().unwrap_or_default();
    Ok(dyadic(&best, pmf.log2_denominator()))
}

/// `P(S_m = target for some 1 <= m <= horizon)` for the walk started at
/// `start`, by dynamic programming with an absorbing target.
pub fn hit_probability_2d_from(
    a: &[u64],
    start: (i64, i64),
    target: (i64, i64),
    horizon: usize,
    config: &ExactConfig,
) -> Result<BigRational, ExactError> {
    if horizon > a.len() {
        return Err(ExactError::InvalidParameter(format!(
            "horizon {horizon} exceeds the {} available steps",
            a.len()
        )));
    }
    let steps = &a[..horizon];
    let total = check_steps(steps)?;
    let needed = diamond_size(total);
    if needed > config.support_budget as u128 {
        return Err(ExactError::Budget {
            needed,
            budget: config.support_budget,
        });
    }
    let mut dist = BTreeMap::new();
    dist.insert(start, BigUint::one());
    // Absorbed counts, each measured against 4^t; rescaled at the end.
    let mut hits = BigUint::zero();
    for (t, &step) in steps.iter().enumerate() {
        dist = step_2d(&dist, step);
        if let Some(c) = dist.remove(&target) {
            hits += c << (2 * (horizon - t - 1));
        }
    }
    Ok(dyadic(&hits, 2 * horizon as u64))
}

/// `P(S_m = target for some 1 <= m <= horizon)` from the origin.
pub fn hit_probability_2d(
    a: &[u64],
    target: (i64, i64),
    horizon: usize,
    config: &ExactConfig,
) -> Result<BigRational, ExactError> {
    hit_probability_2d_from(a, (0, 0), target, horizon, config)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoeffdingComparison {
    pub threshold: f64,
    /// `2 exp(-t² / (2 Σ d_i²))`.
    pub bound: f64,
    /// The bound clamped to 1.
    pub reported_bound: f64,
    /// Exact `P(|T| >= t)` when the support budget allows it.
    pub exact: Option<BigRational>,
}

/// Two-sided Hoeffding tail bound for `T = Σ d_i ε_i`.
pub fn hoeffding_tail(
    d: &[u64],
    threshold: f64,
    config: &ExactConfig,
) -> Result<HoeffdingComparison, ExactError> {
    if threshold.is_nan() || threshold <= 0.0 {
        return Err(ExactError::InvalidParameter("threshold t must be > 0".into()));
    }
    check_steps(d)?;
    let sum_sq: f64 = d.iter().map(|&v| (v as f64) * (v as f64)).sum();
    let bound = if sum_sq == 0.0 {
        0.0
    } else {
        2.0 * (-threshold * threshold / (2.0 * sum_sq)).exp()
    };
    let exact = match pmf_1d(d, config) {
        Ok(pmf) => {
            let tail: BigUint = pmf
                .support()
                .iter()
                .zip(pmf.counts())
                .filter(|(z, _)| z.unsigned_abs() as f64 >= threshold)
                .map(|(_, c)| c)
                .sum();
            Some(dyadic(&tail, pmf.log2_denominator()))
        }
        Err(ExactError::Budget { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(HoeffdingComparison {
        threshold,
        bound,
        reported_bound: bound.min(1.0),
        exact,
    })
}

/// `P(|T| >= t)` as an `f64`, for reporting.
pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn cfg() -> ExactConfig {
        ExactConfig::default()
    }

    #[test]
    fn mod_examples_both_paths() {
        for path in [ModPath::Full, ModPath::Residue] {
            assert_eq!(mod_probability(&[1], 2, 0, path, &cfg()).unwrap(), q(0, 1));
            assert_eq!(mod_probability(&[1, 2], 3, 0, path, &cfg()).unwrap(), q(1, 2));
            assert_eq!(mod_probability(&[1, 2, 3], 3, 0, path, &cfg()).unwrap(), q(1, 2));
            assert_eq!(mod_probability(&[1, 2, 3], 3, 1, path, &cfg()).unwrap(), q(1, 4));
            assert_eq!(mod_probability(&[1, 2, 3], 1, 0, path, &cfg()).unwrap(), q(1, 1));
        }
        assert!(mod_probability(&[1], 3, 3, ModPath::Residue, &cfg()).is_err());
        assert!(mod_probability(&[1], 0, 0, ModPath::Residue, &cfg()).is_err());
    }

    #[test]
    fn interval_examples() {
        let r = max_interval_probability(&[1], Rational::integer(1), &cfg()).unwrap();
        assert_eq!(r.sup, q(1, 2));
        let r = max_interval_probability(&[1, 1, 1, 1], Rational::integer(1), &cfg()).unwrap();
        assert_eq!(r.sup, q(3, 8));
        assert_eq!(r.argmax, q(-1, 1)); // window (-2, 0] holds only 0
        let r = max_interval_probability(&[2, 2], Rational::integer(2), &cfg()).unwrap();
        assert_eq!(r.sup, q(1, 2));
        match max_interval_probability(&[1, 3], Rational::integer(2), &cfg()) {
            Err(ExactError::Precondition(msg)) => assert!(msg.contains("d_1")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn interval_orientation_matters() {
        // T uniform on {-1, 1}: (x-1, x+1] with x = 0 holds only +1, but a
        // closed window of the same length would hold both.
        let r = max_interval_probability(&[1], Rational::integer(1), &cfg()).unwrap();
        assert_eq!(r.sup, q(1, 2));
        // D = 3/2 lets a window of length 3 cover both points.
        let r = max_interval_probability(&[2], Rational::new(3, 2), &cfg()).unwrap();
        assert_eq!(r.sup, q(1, 2));
        let r = max_interval_probability(&[2, 2], Rational::new(2, 1), &cfg()).unwrap();
        assert_eq!(r.sup, q(1, 2));
    }

    #[test]
    fn sup_pmf_examples() {
        assert_eq!(sup_pmf(&[1], &cfg()).unwrap(), q(1, 2));
        assert_eq!(sup_pmf(&[1, 1, 1], &cfg()).unwrap(), q(3, 8));
        assert_eq!(sup_pmf(&[1, 2, 3], &cfg()).unwrap(), q(1, 4));
    }

    #[test]
    fn hit_examples() {
        assert_eq!(hit_probability_2d(&[1, 1], (0, 0), 2, &cfg()).unwrap(), q(1, 4));
        assert_eq!(hit_probability_2d(&[1, 2], (0, 0), 2, &cfg()).unwrap(), q(0, 1));
        assert_eq!(hit_probability_2d(&[1, 2], (0, 0), 0, &cfg()).unwrap(), q(0, 1));
        // frozen from an independent dictionary-based DP
        assert_eq!(
            hit_probability_2d(&[1, 1, 1, 1], (0, 0), 4, &cfg()).unwrap(),
            q(21, 64)
        );
        assert_eq!(
            hit_probability_2d_from(&[1; 8], (2, 0), (0, 0), 8, &cfg()).unwrap(),
            q(2791, 16384)
        );
        assert_eq!(
            hit_probability_2d_from(&[1], (1, 0), (0, 0), 1, &cfg()).unwrap(),
            q(1, 4)
        );
        assert!(hit_probability_2d(&[1], (0, 0), 2, &cfg()).is_err());
    }

    #[test]
    fn hoeffding_examples() {
        let h = hoeffding_tail(&[1, 1], 2.0, &cfg()).unwrap();
        assert!((h.bound - 2.0 * (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(h.exact, Some(q(1, 2)));
        let h = hoeffding_tail(&[1], 2.0, &cfg()).unwrap();
        assert_eq!(h.exact, Some(q(0, 1)));
        let h = hoeffding_tail(&[1, 2, 3], 1e-9, &cfg()).unwrap();
        assert!(h.bound > 1.999_999 && h.reported_bound == 1.0);
        assert!(hoeffding_tail(&[1], 0.0, &cfg()).is_err());
        let tiny = ExactConfig { support_budget: 4 };
        assert_eq!(hoeffding_tail(&[5, 5], 3.0, &tiny).unwrap().exact, None);
    }

    proptest! {
        #[test]
        fn residue_path_matches_full(d in prop::collection::vec(1u64..20, 0..14), m in 1u64..25) {
            let a = residue_counts(&d, m, ModPath::Full, &cfg()).unwrap();
            let b = residue_counts(&d, m, ModPath::Residue, &cfg()).unwrap();
            prop_assert_eq!(&a, &b);
            let total: BigUint = a.iter().sum();
            prop_assert_eq!(total, BigUint::one() << d.len());
        }

        #[test]
        fn modulus_one_is_certain(d in prop::collection::vec(1u64..50, 0..30)) {
            prop_assert_eq!(mod_probability(&d, 1, 0, ModPath::Residue, &cfg()).unwrap(), q(1, 1));
        }

        #[test]
        fn hoeffding_bounds_exact_tail(d in prop::collection::vec(1u64..6, 1..12), t in 0.5f64..30.0) {
            let h = hoeffding_tail(&d, t, &cfg()).unwrap();
            prop_assert!(to_f64(&h.exact.unwrap()) <= h.bound + 1e-12);
        }

        #[test]
        fn window_matches_brute_force(d in prop::collection::vec(1u64..6, 1..9), num in 1u64..6, den in 1u64..3) {
            let half = Rational::new(num, den);
            prop_assume!(d.iter().all(|&v| v * half.denom() >= half.numer()));
            let pmf = pmf_1d(&d, &cfg()).unwrap();
            let got = max_interval_probability(&d, half, &cfg()).unwrap();
            // brute force over centres on a fine grid including all breakpoints
            let h = half.to_big();
            let mut best = BigRational::zero();
            let lo = pmf.support()[0] - 10;
            let hi = *pmf.support().last().unwrap() + 10;
            for x2 in (2 * lo * den as i64)..=(2 * hi * den as i64) {
                let x = BigRational::new(x2.into(), (2 * den as i64).into());
                let left = &x - &h;
                let right = &x + &h;
                let mass: BigRational = pmf
                    .masses()
                    .filter(|(z, _)| {
                        let z = BigRational::from_integer((*z).into());
                        z > left && z <= right
                    })
                    .map(|(_, m)| m)
                    .sum();
                if mass > best {
                    best = mass;
                }
            }
            prop_assert_eq!(got.sup.clone(), best);
            let left = &got.argmax - &h;
            let right = &got.argmax + &h;
            let at: BigRational = pmf
                .masses()
                .filter(|(z, _)| {
                    let z = BigRational::from_integer((*z).into());
                    z > left && z <= right
                })
                .map(|(_, m)| m)
                .sum();
            prop_assert_eq!(at, got.sup);
        }
    }
}
