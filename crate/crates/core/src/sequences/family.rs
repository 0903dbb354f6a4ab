use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::blocks::{BlockScale, Run, RunLength, RunIter};
use super::SequenceError;
use crate::Rational;

/// Default number of fractional bits for real-valued families.
pub const DEFAULT_PRECISION_BITS: u32 = 64;
const MAX_PRECISION_BITS: u32 = 1024;

fn default_precision() -> u32 {
    DEFAULT_PRECISION_BITS
}

/// One round of a coprime-pair schedule: `c_prime` copies of `b_prime`
/// followed by `c_second` copies of `b_second`, repeated `n0` times.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanSegment {
    pub b_prime: u64,
    pub c_prime: u64,
    pub b_second: u64,
    pub c_second: u64,
    pub n0: u64,
}

impl PlanSegment {
    pub fn period(&self) -> u64 {
        self.c_prime + self.c_second
    }

    pub fn len(&self) -> u64 {
        self.period() * self.n0
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Value at 0-based `offset` inside the segment.
    pub fn value_at(&self, offset: u64) -> u64 {
        if offset % self.period() < self.c_prime {
            self.b_prime
        } else {
            self.b_second
        }
    }
}

/// Serializable description of a step-size sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SequenceSpec {
    /// `a_n = value`.
    Constant { value: u64 },
    /// `a_n = floor(n^gamma)`.
    FloorPower { gamma: Rational },
    /// `a_n = n^alpha` rounded down to a multiple of `2^-precision_bits`.
    RealPower {
        alpha: Rational,
        #[serde(default = "default_precision")]
        precision_bits: u32,
    },
    /// The double-exponential block sequence.
    ExplicitBlock {
        #[serde(default)]
        scale: BlockScale,
    },
    /// The concatenated segments of a construction plan.
    FromPlan { segments: Vec<PlanSegment> },
    /// A finite list of values.
    ExplicitList { values: Vec<u64> },
}

/// A single sequence value: an integer, or a dyadic rational
/// `mantissa / 2^frac_bits`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum StepValue {
    Integer(u64),
    Dyadic { mantissa: BigUint, frac_bits: u32 },
}

impl StepValue {
    pub fn as_integer(&self) -> Option<u64> {
        match self {
            StepValue::Integer(v) => Some(*v),
            StepValue::Dyadic {
                mantissa,
                frac_bits,
            } => {
                let one = BigUint::one() << *frac_bits;
                if (mantissa % &one).is_zero() {
                    (mantissa >> *frac_bits).to_u64()
                } else {
                    None
                }
            }
        }
    }

    pub fn to_rational(&self) -> BigRational {
        match self {
            StepValue::Integer(v) => BigRational::from_integer(BigInt::from(*v)),
            StepValue::Dyadic {
                mantissa,
                frac_bits,
            } => BigRational::new(
                BigInt::from(mantissa.clone()),
                BigInt::from(BigUint::one() << *frac_bits),
            ),
        }
    }

    /// The value in units of `2^-frac_bits`.
    pub fn scaled(&self, frac_bits: u32) -> BigUint {
        match self {
            StepValue::Integer(v) => BigUint::from(*v) << frac_bits,
            StepValue::Dyadic {
                mantissa,
                frac_bits: own,
            } => {
                if *own <= frac_bits {
                    mantissa << (frac_bits - own)
                } else {
                    mantissa >> (own - frac_bits)
                }
            }
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            StepValue::Integer(v) => *v as f64,
            StepValue::Dyadic { .. } => self.to_rational().to_f64().unwrap_or(f64::NAN),
        }
    }
}

impl fmt::Display for StepValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepValue::Integer(v) => write!(f, "{v}"),
            StepValue::Dyadic { .. } => {
                let r = self.to_rational();
                if r.denom().is_one() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
        }
    }
}

/// A validated, pure evaluator `n -> a_n` for `n >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepSequence {
    spec: SequenceSpec,
    // Cumulative end positions of plan segments.
    plan_ends: Vec<u64>,
}

/// Validates `spec` and returns its evaluator.
pub fn make_sequence(spec: SequenceSpec) -> Result<StepSequence, SequenceError> {
    let invalid = |msg: &str| Err(SequenceError::InvalidParameter(msg.to_string()));
    let mut plan_ends = Vec::new();
    match &spec {
        SequenceSpec::Constant { value } => {
            if *value == 0 {
                return invalid("constant value must be > 0");
            }
        }
        SequenceSpec::FloorPower { gamma } => {
            if gamma.is_zero() {
                return invalid("floor-power exponent gamma must be > 0");
            }
        }
        SequenceSpec::RealPower {
            alpha,
            precision_bits,
        } => {
            if alpha.is_zero() || alpha.numer() > alpha.denom() {
                return invalid("real-power exponent alpha must lie in (0, 1]");
            }
            if *precision_bits > MAX_PRECISION_BITS {
                return invalid("real-power precision_bits must be at most 1024");
            }
        }
        SequenceSpec::ExplicitBlock { scale } => scale.validate()?,
        SequenceSpec::FromPlan { segments } => {
            let mut end = 0u64;
            for (k, seg) in segments.iter().enumerate() {
                if seg.b_prime == 0 || seg.b_second == 0 {
                    return invalid(&format!("plan segment {k}: step sizes must be > 0"));
                }
                if seg.c_prime == 0 || seg.c_second == 0 {
                    return invalid(&format!("plan segment {k}: multiplicities must be > 0"));
                }
                end = seg
                    .period()
                    .checked_mul(seg.n0)
                    .and_then(|l| end.checked_add(l))
                    .ok_or_else(|| {
                        SequenceError::InvalidParameter(format!(
                            "plan segment {k}: total length exceeds 64 bits"
                        ))
                    })?;
                plan_ends.push(end);
            }
        }
        SequenceSpec::ExplicitList { values } => {
            if values.is_empty() {
                return invalid("explicit list must be nonempty");
            }
            if let Some(pos) = values.iter().position(|&v| v == 0) {
                return invalid(&format!("explicit list entry {} must be > 0", pos + 1));
            }
        }
    }
    Ok(StepSequence { spec, plan_ends })
}

impl StepSequence {
    pub fn constant(value: u64) -> Result<Self, SequenceError> {
        make_sequence(SequenceSpec::Constant { value })
    }

    pub fn floor_power(gamma: Rational) -> Result<Self, SequenceError> {
        make_sequence(SequenceSpec::FloorPower { gamma })
    }

    pub fn explicit(values: Vec<u64>) -> Result<Self, SequenceError> {
        make_sequence(SequenceSpec::ExplicitList { values })
    }

    pub fn spec(&self) -> &SequenceSpec {
        &self.spec
    }

    /// Number of defined terms, or `None` for infinite families.
    pub fn len(&self) -> Option<u64> {
        match &self.spec {
            SequenceSpec::ExplicitList { values } => Some(values.len() as u64),
            SequenceSpec::FromPlan { .. } => Some(self.plan_ends.last().copied().unwrap_or(0)),
            _ => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    /// True when every term is an integer.
    pub fn is_integral(&self) -> bool {
        !matches!(self.spec, SequenceSpec::RealPower { .. })
    }

    /// Fractional bits of the values (0 for integer families).
    pub fn frac_bits(&self) -> u32 {
        match self.spec {
            SequenceSpec::RealPower { precision_bits, .. } => precision_bits,
            _ => 0,
        }
    }

    fn check_index(&self, n: u64) -> Result<(), SequenceError> {
        if n == 0 {
            return Err(SequenceError::ZeroIndex);
        }
        if let Some(len) = self.len() {
            if n > len {
                return Err(SequenceError::IndexOutOfRange { index: n, len });
            }
        }
        Ok(())
    }

    /// `a_n` for `n >= 1`.
    pub fn value(&self, n: u64) -> Result<StepValue, SequenceError> {
        self.check_index(n)?;
        match &self.spec {
            SequenceSpec::Constant { value } => Ok(StepValue::Integer(*value)),
            SequenceSpec::FloorPower { gamma } => {
                let root = rational_power_floor(n, *gamma, 0);
                root.to_u64().map(StepValue::Integer).ok_or_else(|| {
                    SequenceError::Overflow {
                        what: format!("a_{n}"),
                        exponent: root.bits().to_string(),
                    }
                })
            }
            SequenceSpec::RealPower {
                alpha,
                precision_bits,
            } => Ok(StepValue::Dyadic {
                mantissa: rational_power_floor(n, *alpha, *precision_bits),
                frac_bits: *precision_bits,
            }),
            SequenceSpec::ExplicitBlock { scale } => {
                scale.value_at(&BigUint::from(n)).map(StepValue::Integer)
            }
            SequenceSpec::FromPlan { segments } => {
                let seg = self.plan_ends.partition_point(|&end| end < n);
                let start = if seg == 0 { 0 } else { self.plan_ends[seg - 1] };
                Ok(StepValue::Integer(segments[seg].value_at(n - 1 - start)))
            }
            SequenceSpec::ExplicitList { values } => Ok(StepValue::Integer(values[n as usize - 1])),
        }
    }

    /// `a_n` for arbitrarily large `n`. Only the block sequence and the
    /// constant family are defined past `u64::MAX`.
    pub fn value_big(&self, n: &BigUint) -> Result<StepValue, SequenceError> {
        if let Some(small) = n.to_u64() {
            return self.value(small);
        }
        match &self.spec {
            SequenceSpec::Constant { value } => Ok(StepValue::Integer(*value)),
            SequenceSpec::ExplicitBlock { scale } => scale.value_at(n).map(StepValue::Integer),
            _ => Err(SequenceError::Overflow {
                what: "step index".to_string(),
                exponent: n.bits().to_string(),
            }),
        }
    }

    /// Iterates `(value, run length)` pairs from `n = 1` for the families that
    /// are naturally run-structured.
    fn runs(&self) -> Option<Box<dyn Iterator<Item = Result<Run, SequenceError>> + '_>> {
        match &self.spec {
            SequenceSpec::ExplicitBlock { scale } => Some(Box::new(RunIter::new(scale))),
            SequenceSpec::FromPlan { segments } => Some(Box::new(
                segments
                    .iter()
                    .flat_map(|seg| {
                        (0..seg.n0).flat_map(move |_| {
                            [
                                Run {
                                    value: seg.b_prime,
                                    length: RunLength::Finite(seg.c_prime),
                                },
                                Run {
                                    value: seg.b_second,
                                    length: RunLength::Finite(seg.c_second),
                                },
                            ]
                        })
                    })
                    .map(Ok),
            )),
            _ => None,
        }
    }

    /// `a_1, …, a_n`.
    pub fn prefix(&self, n: u64) -> Result<Vec<StepValue>, SequenceError> {
        if self.is_integral() {
            Ok(self
                .integer_prefix(n)?
                .into_iter()
                .map(StepValue::Integer)
                .collect())
        } else {
            (1..=n).map(|i| self.value(i)).collect()
        }
    }

    /// `a_1, …, a_n` for integer families.
    pub fn integer_prefix(&self, n: u64) -> Result<Vec<u64>, SequenceError> {
        if let Some(len) = self.len() {
            if n > len {
                return Err(SequenceError::IndexOutOfRange { index: n, len });
            }
        }
        if !self.is_integral() {
            return Err(SequenceError::NotIntegral { index: 1 });
        }
        let cap = usize::try_from(n).map_err(|_| SequenceError::Overflow {
            what: "prefix length".to_string(),
            exponent: "64".to_string(),
        })?;
        let mut out = Vec::with_capacity(cap);
        if let Some(runs) = self.runs() {
            for run in runs {
                let run = run?;
                let remaining = n - out.len() as u64;
                if remaining == 0 {
                    break;
                }
                let take = match run.length {
                    RunLength::Finite(l) => l.min(remaining),
                    RunLength::Huge { .. } => remaining,
                };
                out.extend(std::iter::repeat_n(run.value, take as usize));
            }
            return Ok(out);
        }
        for i in 1..=n {
            out.push(self.value(i)?.as_integer().ok_or(SequenceError::NotIntegral { index: i })?);
        }
        Ok(out)
    }

    /// `a_1, …, a_n` in integer units of `2^-frac_bits()`.
    pub fn scaled_prefix(&self, n: u64) -> Result<Vec<BigUint>, SequenceError> {
        let bits = self.frac_bits();
        Ok(self.prefix(n)?.iter().map(|v| v.scaled(bits)).collect())
    }
}

/// `floor(n^(p/q) * 2^frac_bits)` computed exactly as an integer `q`-th root.
fn rational_power_floor(n: u64, exponent: Rational, frac_bits: u32) -> BigUint {
    let p = u32::try_from(exponent.numer()).expect("exponent numerator fits u32");
    let q = u32::try_from(exponent.denom()).expect("exponent denominator fits u32");
    let radicand = num_traits::pow(BigUint::from(n), p as usize) << (frac_bits as u64 * q as u64);
    radicand.nth_root(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int(seq: &StepSequence, n: u64) -> u64 {
        seq.value(n).unwrap().as_integer().unwrap()
    }

    #[test]
    fn constant_one() {
        let s = StepSequence::constant(1).unwrap();
        assert!((1..100).all(|n| int(&s, n) == 1));
    }

    #[test]
    fn floor_power_examples() {
        let s = StepSequence::floor_power(Rational::integer(1)).unwrap();
        assert_eq!(int(&s, 5), 5);
        let s = StepSequence::floor_power(Rational::new(1, 2)).unwrap();
        assert_eq!(int(&s, 10), 3);
        assert_eq!(int(&s, 16), 4);
        assert_eq!(int(&s, 15), 3);
        let s = StepSequence::floor_power(Rational::new(3, 2)).unwrap();
        assert_eq!(int(&s, 4), 8);
        assert_eq!(int(&s, 5), 11); // 5^1.5 = 11.18
    }

    #[test]
    fn real_power_is_dyadic_floor() {
        let s = make_sequence(SequenceSpec::RealPower {
            alpha: Rational::new(1, 2),
            precision_bits: 8,
        })
        .unwrap();
        // sqrt(2) * 256 = 362.03…
        assert_eq!(
            s.value(2).unwrap(),
            StepValue::Dyadic {
                mantissa: BigUint::from(362u32),
                frac_bits: 8
            }
        );
        assert_eq!(s.value(4).unwrap().as_integer(), Some(2));
        assert_eq!(s.value(2).unwrap().as_integer(), None);
        let d = s.value(2).unwrap().to_f64();
        assert!((d - 362.0 / 256.0).abs() < 1e-15);
    }

    #[test]
    fn parameter_errors_name_constraint() {
        let e = StepSequence::constant(0).unwrap_err();
        assert!(e.to_string().contains("> 0"));
        let e = StepSequence::floor_power(Rational::integer(0)).unwrap_err();
        assert!(e.to_string().contains("gamma"));
        let e = make_sequence(SequenceSpec::RealPower {
            alpha: Rational::new(3, 2),
            precision_bits: 64,
        })
        .unwrap_err();
        assert!(e.to_string().contains("(0, 1]"));
        assert!(StepSequence::explicit(vec![]).is_err());
        assert!(StepSequence::explicit(vec![1, 0]).is_err());
    }

    #[test]
    fn explicit_list_bounds() {
        let s = StepSequence::explicit(vec![3, 1, 4]).unwrap();
        assert_eq!(int(&s, 3), 4);
        assert_eq!(
            s.value(4),
            Err(SequenceError::IndexOutOfRange { index: 4, len: 3 })
        );
        assert_eq!(s.value(0), Err(SequenceError::ZeroIndex));
    }

    #[test]
    fn plan_sequence_positions() {
        let s = make_sequence(SequenceSpec::FromPlan {
            segments: vec![
                PlanSegment {
                    b_prime: 2,
                    c_prime: 2,
                    b_second: 3,
                    c_second: 1,
                    n0: 2,
                },
                PlanSegment {
                    b_prime: 5,
                    c_prime: 3,
                    b_second: 7,
                    c_second: 2,
                    n0: 1,
                },
            ],
        })
        .unwrap();
        assert_eq!(s.len(), Some(11));
        let by_value: Vec<u64> = (1..=11).map(|n| int(&s, n)).collect();
        assert_eq!(by_value, vec![2, 2, 3, 2, 2, 3, 5, 5, 5, 7, 7]);
        assert_eq!(s.integer_prefix(11).unwrap(), by_value);
    }

    #[test]
    fn spec_round_trips_through_json() {
        let spec = SequenceSpec::RealPower {
            alpha: Rational::new(1, 3),
            precision_bits: 32,
        };
        let text = serde_json::to_string(&spec).unwrap();
        assert!(text.contains("\"family\":\"real-power\""));
        let back: SequenceSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);
        let unknown = r#"{"family":"constant","value":1,"extra":2}"#;
        assert!(serde_json::from_str::<SequenceSpec>(unknown).is_err());
    }
}
