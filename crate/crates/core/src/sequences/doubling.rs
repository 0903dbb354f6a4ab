use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::{SequenceError, StepSequence};
use crate::Rational;

/// Indices `i_1 < … < i_K = n` with `a_{i_{k+1}} >= 2 a_{i_k}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoublingCertificate {
    pub n: u64,
    pub indices: Vec<u64>,
    /// The gap bound `C` the search used.
    pub gap_bound: BigRational,
    /// `log2 a_n`.
    pub log2_value: f64,
    /// `K / log2 a_n`, undefined when `a_n = 1`.
    pub ratio: Option<f64>,
    /// `K / log2 a_n` as an exact fraction when `a_n` is a power of two.
    pub exact_ratio: Option<Rational>,
}

impl DoublingCertificate {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Re-checks the doubling property and `i_K = n` against `seq`.
    pub fn verify(&self, seq: &StepSequence) -> Result<bool, SequenceError> {
        if self.indices.last() != Some(&self.n) {
            return Ok(false);
        }
        for w in self.indices.windows(2) {
            if w[0] >= w[1] {
                return Ok(false);
            }
            let lo = seq.value(w[0])?.to_rational();
            let hi = seq.value(w[1])?.to_rational();
            if hi < lo * BigInt::from(2) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Backward halving search: start at `j_1 = n`, then repeatedly pick the
/// largest `j < j_prev` with `a_{j_prev}/2 - C < a_j <= a_{j_prev}/2`, stopping
/// when no such `j` exists.
///
/// When `gap_bound` is `None`, `C` is the largest `|a_{m+1} - a_m|` on the
/// prefix; a supplied `C` must bound every consecutive gap.
pub fn extract_doubling_subsequence(
    seq: &StepSequence,
    n: u64,
    gap_bound: Option<Rational>,
) -> Result<DoublingCertificate, SequenceError> {
    if n == 0 {
        return Err(SequenceError::ZeroIndex);
    }
    let values: Vec<BigRational> = seq.prefix(n)?.iter().map(|v| v.to_rational()).collect();
    let one = BigRational::one();
    if let Some(pos) = values.iter().position(|v| *v < one) {
        return Err(SequenceError::BelowOne {
            index: pos as u64 + 1,
        });
    }

    let mut measured = BigRational::zero();
    for (m, w) in values.windows(2).enumerate() {
        let gap = (&w[1] - &w[0]).abs();
        if let Some(c) = gap_bound {
            if gap > c.to_big() {
                return Err(SequenceError::GapExceeded {
                    index: m as u64 + 2,
                    gap: gap.to_string(),
                    bound: c.to_string(),
                });
            }
        }
        if gap > measured {
            measured = gap;
        }
    }
    let c = gap_bound.map(|c| c.to_big()).unwrap_or(measured);

    let two = BigRational::from_integer(BigInt::from(2));
    let mut indices = vec![n];
    let mut current = n as usize;
    loop {
        let half = &values[current - 1] / &two;
        let floor = &half - &c;
        let found = (1..current)
            .rev()
            .find(|&j| values[j - 1] > floor && values[j - 1] <= half);
        match found {
            Some(j) => {
                indices.push(j as u64);
                current = j;
            }
            None => break,
        }
    }
    indices.reverse();

    let last = &values[n as usize - 1];
    let log2_value = last.to_f64().unwrap_or(f64::NAN).log2();
    let k = indices.len() as u64;
    let exact_ratio = exact_log2(last)
        .filter(|&p| p > 0)
        .map(|p| Rational::new(k, p));
    let ratio = (log2_value > 0.0).then(|| k as f64 / log2_value);
    Ok(DoublingCertificate {
        n,
        indices,
        gap_bound: c,
        log2_value,
        ratio,
        exact_ratio,
    })
}

/// `p` with `v = 2^p`, if `v` is a power of two integer.
fn exact_log2(v: &BigRational) -> Option<u64> {
    if !v.denom().is_one() {
        return None;
    }
    let n = v.numer().to_biguint()?;
    let bits = n.bits();
    (bits > 0 && n == num_bigint::BigUint::one() << (bits - 1)).then_some(bits - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::{make_sequence, SequenceSpec};

    fn identity() -> StepSequence {
        StepSequence::floor_power(Rational::integer(1)).unwrap()
    }

    #[test]
    fn identity_powers_of_two() {
        let cert = extract_doubling_subsequence(&identity(), 16, Some(Rational::integer(1))).unwrap();
        assert_eq!(cert.indices, vec![1, 2, 4, 8, 16]);
        assert_eq!(cert.exact_ratio, Some(Rational::new(5, 4)));
        let cert = extract_doubling_subsequence(&identity(), 4, Some(Rational::integer(1))).unwrap();
        assert_eq!(cert.indices, vec![1, 2, 4]);
        for p in 1..=12u64 {
            let cert = extract_doubling_subsequence(&identity(), 1 << p, None).unwrap();
            assert_eq!(cert.len() as u64, p + 1);
            assert_eq!(cert.exact_ratio, Some(Rational::new(p + 1, p)));
            assert!(cert.verify(&identity()).unwrap());
        }
    }

    #[test]
    fn constant_gives_trivial_certificate() {
        let s = StepSequence::constant(5).unwrap();
        let cert = extract_doubling_subsequence(&s, 30, None).unwrap();
        assert_eq!(cert.indices, vec![30]);
        let cert = extract_doubling_subsequence(&s, 30, Some(Rational::integer(1))).unwrap();
        assert_eq!(cert.indices, vec![30]);
    }

    #[test]
    fn tie_break_takes_latest_index() {
        // a = 1,2,2,2,4: the halving target 2 occurs at 2,3,4; pick 4.
        let s = StepSequence::explicit(vec![1, 2, 2, 2, 4]).unwrap();
        let cert = extract_doubling_subsequence(&s, 5, None).unwrap();
        assert_eq!(cert.indices, vec![1, 4, 5]);
    }

    #[test]
    fn gap_precondition() {
        let s = StepSequence::explicit(vec![1, 2, 5]).unwrap();
        match extract_doubling_subsequence(&s, 3, Some(Rational::integer(1))) {
            Err(SequenceError::GapExceeded { index, .. }) => assert_eq!(index, 3),
            other => panic!("{other:?}"),
        }
        let cert = extract_doubling_subsequence(&s, 3, None).unwrap();
        assert_eq!(cert.gap_bound, BigRational::from_integer(3.into()));
    }

    #[test]
    fn real_power_certificates_verify() {
        let s = make_sequence(SequenceSpec::RealPower {
            alpha: Rational::new(1, 2),
            precision_bits: 32,
        })
        .unwrap();
        for n in [10u64, 100, 1000] {
            let cert = extract_doubling_subsequence(&s, n, None).unwrap();
            assert!(cert.verify(&s).unwrap());
            assert_eq!(*cert.indices.last().unwrap(), n);
        }
    }
}
