use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use super::{SequenceError, StepSequence};
use crate::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub n: u64,
    pub m: u64,
}

/// Finite-horizon report on `a_n <= s a_m` whenever `m >= r n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub r: Rational,
    pub s: Rational,
    pub horizon: u64,
    pub violations: Vec<Violation>,
    /// Smallest `n_0` such that no violation has `n >= n_0`.
    pub clean_from: u64,
}

impl MonotonicityReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every pair `1 <= n <= n_max`, `r n <= m <= n_max`.
pub fn check_rs_monotone(
    seq: &StepSequence,
    r: Rational,
    s: Rational,
    n_max: u64,
) -> Result<MonotonicityReport, SequenceError> {
    if n_max < 2 {
        return Err(SequenceError::InvalidParameter(
            "monotonicity horizon n_max must be >= 2".to_string(),
        ));
    }
    if r.numer() < r.denom() || s.numer() < s.denom() {
        return Err(SequenceError::InvalidParameter(
            "r and s must both be >= 1".to_string(),
        ));
    }
    // Compare in integer units: a_n > s a_m  <=>  den(s) a_n > num(s) a_m.
    let values = seq.scaled_prefix(n_max)?;
    let lhs: Vec<BigUint> = values.iter().map(|v| v * s.denom()).collect();
    let rhs: Vec<BigUint> = values.iter().map(|v| v * s.numer()).collect();
    let mut violations = Vec::new();
    for n in 1..=n_max {
        // smallest m with m >= r n, i.e. m * den(r) >= n * num(r)
        let need = n as u128 * r.numer() as u128;
        let m_min = need.div_ceil(r.denom() as u128);
        if m_min > n_max as u128 {
            continue;
        }
        for m in m_min as u64..=n_max {
            if lhs[n as usize - 1] > rhs[m as usize - 1] {
                violations.push(Violation { n, m });
            }
        }
    }
    let clean_from = violations.iter().map(|v| v.n + 1).max().unwrap_or(1);
    Ok(MonotonicityReport {
        r,
        s,
        horizon: n_max,
        violations,
        clean_from,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn monotone_identity() {
        let s = StepSequence::floor_power(Rational::integer(1)).unwrap();
        let rep = check_rs_monotone(&s, Rational::integer(1), Rational::integer(1), 100).unwrap();
        assert!(rep.holds());
        assert_eq!(rep.clean_from, 1);
    }

    #[test]
    fn alternating_is_1_2_monotone() {
        let v: Vec<u64> = (0..50).map(|i| 1 + (i % 2)).collect();
        let s = StepSequence::explicit(v).unwrap();
        let rep = check_rs_monotone(&s, Rational::integer(1), Rational::integer(2), 50).unwrap();
        assert!(rep.holds());
        let rep = check_rs_monotone(&s, Rational::integer(1), Rational::integer(1), 50).unwrap();
        assert!(!rep.holds());
    }

    #[test]
    fn spike_is_reported() {
        let s = StepSequence::explicit(vec![1, 1, 100, 1, 1]).unwrap();
        let rep = check_rs_monotone(&s, Rational::integer(1), Rational::integer(1), 5).unwrap();
        assert!(rep.violations.contains(&Violation { n: 3, m: 4 }));
        assert_eq!(rep.clean_from, 4);
        for v in &rep.violations {
            assert!(v.m >= v.n);
            assert!(s.value(v.n).unwrap().as_integer() > s.value(v.m).unwrap().as_integer());
        }
    }

    #[test]
    fn parameter_validation() {
        let s = StepSequence::constant(1).unwrap();
        assert!(check_rs_monotone(&s, Rational::integer(1), Rational::integer(1), 1).is_err());
        assert!(check_rs_monotone(&s, Rational::new(1, 2), Rational::integer(1), 5).is_err());
    }

    proptest! {
        #[test]
        fn r1_s1_matches_direct_scan(v in prop::collection::vec(1u64..6, 2..40)) {
            let n = v.len() as u64;
            let s = StepSequence::explicit(v.clone()).unwrap();
            let rep = check_rs_monotone(&s, Rational::integer(1), Rational::integer(1), n).unwrap();
            let direct_monotone = v.windows(2).all(|w| w[0] <= w[1]);
            prop_assert_eq!(rep.holds(), direct_monotone);
            let brute: Vec<Violation> = (1..=n)
                .flat_map(|i| (i..=n).map(move |j| Violation { n: i, m: j }))
                .filter(|p| v[p.n as usize - 1] > v[p.m as usize - 1])
                .collect();
            prop_assert_eq!(rep.violations, brute);
        }
    }
}
