use serde::{Deserialize, Serialize};

use super::{SequenceError, StepSequence, StepValue};

/// A non-decreasing integer prefix written as runs: `m_j` copies of `b_j`,
/// with `b_1 < b_2 < …` and run `j` starting at index `k_j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunLengthDecomposition {
    pub values: Vec<u64>,
    pub multiplicities: Vec<u64>,
    /// `k_j = m_1 + … + m_{j-1} + 1`.
    pub starts: Vec<u64>,
}

impl RunLengthDecomposition {
    pub fn blocks(&self) -> usize {
        self.values.len()
    }

    pub fn total_len(&self) -> u64 {
        self.multiplicities.iter().sum()
    }

    /// Expands back to the original prefix.
    pub fn expand(&self) -> Vec<u64> {
        self.values
            .iter()
            .zip(&self.multiplicities)
            .flat_map(|(&b, &m)| std::iter::repeat_n(b, m as usize))
            .collect()
    }
}

/// Decomposes `a_1..a_n` of `seq`.
pub fn run_length_decompose(
    seq: &StepSequence,
    n: u64,
) -> Result<RunLengthDecomposition, SequenceError> {
    let prefix = seq.prefix(n)?;
    let ints = prefix
        .iter()
        .enumerate()
        .map(|(i, v)| {
            v.as_integer()
                .ok_or(SequenceError::NotIntegral { index: i as u64 + 1 })
        })
        .collect::<Result<Vec<_>, _>>()?;
    run_length_decompose_values(&ints)
}

/// Decomposes an explicit non-decreasing integer prefix.
pub fn run_length_decompose_values(
    prefix: &[u64],
) -> Result<RunLengthDecomposition, SequenceError> {
    let mut out = RunLengthDecomposition {
        values: Vec::new(),
        multiplicities: Vec::new(),
        starts: Vec::new(),
    };
    for (idx, &v) in prefix.iter().enumerate() {
        match out.values.last() {
            Some(&last) if v == last => *out.multiplicities.last_mut().unwrap() += 1,
            Some(&last) if v < last => {
                return Err(SequenceError::NotMonotone {
                    index: idx as u64 + 1,
                })
            }
            _ => {
                out.values.push(v);
                out.multiplicities.push(1);
                out.starts.push(idx as u64 + 1);
            }
        }
    }
    Ok(out)
}

impl From<&RunLengthDecomposition> for Vec<StepValue> {
    fn from(d: &RunLengthDecomposition) -> Self {
        d.expand().into_iter().map(StepValue::Integer).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;
    use proptest::prelude::*;

    #[test]
    fn worked_examples() {
        let d = run_length_decompose_values(&[2, 2, 3, 3, 3, 5]).unwrap();
        assert_eq!(d.values, vec![2, 3, 5]);
        assert_eq!(d.multiplicities, vec![2, 3, 1]);
        assert_eq!(d.starts, vec![1, 3, 6]);
        let d = run_length_decompose_values(&[1, 1, 1, 1]).unwrap();
        assert_eq!(d.values, vec![1]);
        assert_eq!(d.multiplicities, vec![4]);
        assert_eq!(
            run_length_decompose_values(&[1, 2, 1]),
            Err(SequenceError::NotMonotone { index: 3 })
        );
    }

    #[test]
    fn from_sequence() {
        let s = StepSequence::floor_power(Rational::new(1, 2)).unwrap();
        let d = run_length_decompose(&s, 10).unwrap();
        assert_eq!(d.values, vec![1, 2, 3]);
        assert_eq!(d.multiplicities, vec![3, 5, 2]);
        let real = crate::sequences::make_sequence(crate::sequences::SequenceSpec::RealPower {
            alpha: Rational::new(1, 2),
            precision_bits: 16,
        })
        .unwrap();
        assert_eq!(
            run_length_decompose(&real, 3),
            Err(SequenceError::NotIntegral { index: 2 })
        );
    }

    proptest! {
        #[test]
        fn reconstruction_round_trip(mut v in prop::collection::vec(1u64..50, 0..200)) {
            v.sort_unstable();
            let d = run_length_decompose_values(&v).unwrap();
            prop_assert_eq!(d.expand(), v);
            prop_assert!(d.values.windows(2).all(|w| w[0] < w[1]));
            for j in 1..d.starts.len() {
                prop_assert_eq!(d.starts[j] - d.starts[j - 1], d.multiplicities[j - 1]);
            }
        }
    }
}
