//! The block sequence `B_1 B_2 …` where block `k` is made of sub-blocks
//! `B_{k,1} … B_{k,k}`. Sub-block `(k, i)` is `L_{k,i}` copies of `k`, followed
//! (for `i < k`) by `3k²` copies of `k - 1`. In exact mode
//! `L_{k,i} = 2^(2^(k² + i - 1))`, carried symbolically.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use super::SequenceError;
use crate::Rational;

/// Largest `2^e` (in bits) that symbolic boundary arithmetic will materialize.
pub const MAX_MATERIALIZED_BITS: u64 = 1 << 20;

/// `L_{k,i} = 2^(2^e)` with `e = k² + i - 1`, never materialized unless asked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubBlockLength {
    pub k: u64,
    pub i: u64,
    /// `e = k² + i - 1`; the length is `2^(2^e)`.
    pub log_log_length: u64,
}

impl SubBlockLength {
    /// The binary exponent `2^e` of the length.
    pub fn exponent(&self) -> BigUint {
        BigUint::one() << self.log_log_length
    }

    /// The exponent `2^e` when it fits in a `u64`.
    pub fn exponent_u64(&self) -> Option<u64> {
        (self.log_log_length < 64).then(|| 1u64 << self.log_log_length)
    }

    /// The length as a machine integer, when `2^(2^e) < 2^64`.
    pub fn materialize(&self) -> Result<u64, SequenceError> {
        match self.exponent_u64() {
            Some(x) if x < 64 => Ok(1u64 << x),
            _ => Err(self.overflow()),
        }
    }

    /// The length as a big integer, refused above `max_bits` bits.
    pub fn materialize_big(&self, max_bits: u64) -> Result<BigUint, SequenceError> {
        match self.exponent_u64() {
            Some(x) if x <= max_bits => Ok(BigUint::one() << x),
            _ => Err(self.overflow()),
        }
    }

    fn overflow(&self) -> SequenceError {
        SequenceError::Overflow {
            what: format!("L_{{{},{}}}", self.k, self.i),
            exponent: self.exponent().to_string(),
        }
    }
}

/// The exact sub-block length for block `k`, sub-block `i` (`1 <= i <= k`).
pub fn sub_block_length(k: u64, i: u64) -> Result<SubBlockLength, SequenceError> {
    if i == 0 || i > k {
        return Err(SequenceError::InvalidParameter(format!(
            "sub-block index must satisfy 1 <= i <= k (got k={k}, i={i})"
        )));
    }
    let e = k
        .checked_mul(k)
        .and_then(|kk| kk.checked_add(i - 1))
        .ok_or_else(|| SequenceError::InvalidParameter(format!("block number {k} too large")))?;
    Ok(SubBlockLength {
        k,
        i,
        log_log_length: e,
    })
}

/// Sub-block lengths used by the scaled (simulable) mode.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Growth {
    /// `L'_{k,i} = 2^(floor(k^k_exponent) + i - 1)`; `k_exponent = 2` is the
    /// default, larger exponents give faster-growing variants.
    Power { k_exponent: Rational },
    /// Explicit lengths: `lengths[k-1][i-1]`, row `k` having `k` entries.
    Table { lengths: Vec<Vec<u64>> },
}

impl Default for Growth {
    fn default() -> Self {
        Growth::Power {
            k_exponent: Rational::integer(2),
        }
    }
}

impl Growth {
    pub fn length(&self, k: u64, i: u64) -> Result<u64, SequenceError> {
        match self {
            Growth::Power { k_exponent } => {
                let p = k_exponent.numer() as usize;
                let q = k_exponent.denom() as u32;
                let kp = num_traits::pow(BigUint::from(k), p).nth_root(q);
                let e = kp + BigUint::from(i - 1);
                match e.to_u64() {
                    Some(e) if e < 64 => Ok(1u64 << e),
                    _ => Err(SequenceError::Overflow {
                        what: format!("scaled L'_{{{k},{i}}}"),
                        exponent: e.to_string(),
                    }),
                }
            }
            Growth::Table { lengths } => lengths
                .get(k as usize - 1)
                .and_then(|row| row.get(i as usize - 1))
                .copied()
                .ok_or_else(|| {
                    SequenceError::InvalidParameter(format!(
                        "growth table has no entry for (k={k}, i={i})"
                    ))
                }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BlockScale {
    #[default]
    Exact,
    Scaled {
        #[serde(default)]
        growth: Growth,
        /// Also require `L'_{k,i+1} >= (L'_{k,i})²` inside each block.
        #[serde(default)]
        require_squaring: bool,
    },
}

/// Length of a run of equal values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunLength {
    Finite(u64),
    /// Longer than any `u64` position; `exponent` is `log2` of the length.
    Huge { exponent: BigUint },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Run {
    pub value: u64,
    pub length: RunLength,
}

/// Layout of one sub-block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockSpec {
    pub k: u64,
    pub i: u64,
    pub length: RunLength,
    /// `3k²` for `i < k`, else 0.
    pub tail: u64,
}

/// Last index `n_{k,j}` of sub-block `j` of block `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockBoundary {
    pub k: u64,
    pub j: u64,
    pub end: BigUint,
}

fn tail_len(k: u64, i: u64) -> u64 {
    if i < k {
        3 * k * k
    } else {
        0
    }
}

impl BlockScale {
    pub(crate) fn validate(&self) -> Result<(), SequenceError> {
        let BlockScale::Scaled {
            growth,
            require_squaring,
        } = self
        else {
            return Ok(());
        };
        let rows = match growth {
            Growth::Power { k_exponent } => {
                if k_exponent.is_zero() {
                    return Err(SequenceError::InvalidParameter(
                        "growth k_exponent must be > 0".to_string(),
                    ));
                }
                u64::MAX
            }
            Growth::Table { lengths } => {
                if lengths.is_empty() {
                    return Err(SequenceError::InvalidParameter(
                        "growth table must be nonempty".to_string(),
                    ));
                }
                for (k, row) in lengths.iter().enumerate() {
                    if row.len() != k + 1 {
                        return Err(SequenceError::InvalidParameter(format!(
                            "growth table row {} must have {} entries",
                            k + 1,
                            k + 1
                        )));
                    }
                }
                lengths.len() as u64
            }
        };
        // Check the whole range whose lengths fit in 64 bits.
        let mut prev: Option<u64> = None;
        'blocks: for k in 1..=rows {
            for i in 1..=k {
                let len = match growth.length(k, i) {
                    Ok(l) => l,
                    Err(SequenceError::Overflow { .. }) => break 'blocks,
                    Err(e) => return Err(e),
                };
                if len == 0 {
                    return Err(SequenceError::InvalidParameter(format!(
                        "scaled length L'_{{{k},{i}}} must be > 0"
                    )));
                }
                if let Some(p) = prev {
                    if len <= p {
                        return Err(SequenceError::InvalidParameter(format!(
                            "scaled lengths must be strictly increasing: L'_{{{k},{i}}} = {len} <= {p}"
                        )));
                    }
                    if *require_squaring && i > 1 && (len as u128) < (p as u128) * (p as u128) {
                        return Err(SequenceError::InvalidParameter(format!(
                            "scaled lengths must satisfy L'_{{{k},{i}}} >= L'_{{{k},{}}}^2",
                            i - 1
                        )));
                    }
                }
                prev = Some(len);
            }
        }
        Ok(())
    }

    /// Layout of sub-block `(k, i)`.
    pub fn block(&self, k: u64, i: u64) -> Result<BlockSpec, SequenceError> {
        let length = match self {
            BlockScale::Exact => {
                let sym = sub_block_length(k, i)?;
                match sym.materialize() {
                    Ok(l) => RunLength::Finite(l),
                    Err(_) => RunLength::Huge {
                        exponent: sym.exponent(),
                    },
                }
            }
            BlockScale::Scaled { growth, .. } => {
                if i == 0 || i > k {
                    return Err(SequenceError::InvalidParameter(format!(
                        "sub-block index must satisfy 1 <= i <= k (got k={k}, i={i})"
                    )));
                }
                RunLength::Finite(growth.length(k, i)?)
            }
        };
        Ok(BlockSpec {
            k,
            i,
            length,
            tail: tail_len(k, i),
        })
    }

    fn length_big(&self, k: u64, i: u64, max_bits: u64) -> Result<BigUint, SequenceError> {
        match self {
            BlockScale::Exact => sub_block_length(k, i)?.materialize_big(max_bits),
            BlockScale::Scaled { growth, .. } => Ok(BigUint::from(growth.length(k, i)?)),
        }
    }

    /// `a_n` by symbolic position arithmetic (1-based `n`).
    pub fn value_at(&self, n: &BigUint) -> Result<u64, SequenceError> {
        if n.bits() == 0 {
            return Err(SequenceError::ZeroIndex);
        }
        let mut rest = n.clone();
        for k in 1u64.. {
            for i in 1..=k {
                match self {
                    BlockScale::Exact => {
                        let sym = sub_block_length(k, i)?;
                        match sym.exponent_u64() {
                            // rest <= 2^x ?
                            Some(x) if rest.bits() <= x + 1 => {
                                let len = BigUint::one() << x;
                                if rest <= len {
                                    return Ok(k);
                                }
                                rest -= len;
                            }
                            Some(x) => rest -= BigUint::one() << x,
                            None => return Ok(k),
                        }
                    }
                    BlockScale::Scaled { growth, .. } => {
                        let len = BigUint::from(growth.length(k, i)?);
                        if rest <= len {
                            return Ok(k);
                        }
                        rest -= len;
                    }
                }
                let tail = BigUint::from(tail_len(k, i));
                if rest <= tail {
                    return Ok(k - 1);
                }
                rest -= tail;
            }
        }
        unreachable!("block lengths grow without bound")
    }

    /// Sub-block end positions `n_{k,j}` for all blocks up to `k_max`,
    /// computed without enumerating the sequence. Refuses lengths wider than
    /// `max_bits` bits.
    pub fn boundaries(&self, k_max: u64, max_bits: u64) -> Result<Vec<BlockBoundary>, SequenceError> {
        let mut end = BigUint::default();
        let mut out = Vec::new();
        for k in 1..=k_max {
            for j in 1..=k {
                end += self.length_big(k, j, max_bits)?;
                end += tail_len(k, j);
                out.push(BlockBoundary {
                    k,
                    j,
                    end: end.clone(),
                });
            }
        }
        Ok(out)
    }
}

/// Streams the block sequence as runs of equal values.
pub(crate) struct RunIter<'a> {
    scale: &'a BlockScale,
    k: u64,
    i: u64,
    in_tail: bool,
}

impl<'a> RunIter<'a> {
    pub(crate) fn new(scale: &'a BlockScale) -> Self {
        RunIter {
            scale,
            k: 1,
            i: 1,
            in_tail: false,
        }
    }
}

impl Iterator for RunIter<'_> {
    type Item = Result<Run, SequenceError>;

    fn next(&mut self) -> Option<Self::Item> {
        let (k, i) = (self.k, self.i);
        if !self.in_tail {
            let spec = match self.scale.block(k, i) {
                Ok(s) => s,
                Err(e) => return Some(Err(e)),
            };
            if spec.tail > 0 {
                self.in_tail = true;
            } else {
                self.advance();
            }
            return Some(Ok(Run {
                value: k,
                length: spec.length,
            }));
        }
        self.in_tail = false;
        self.advance();
        Some(Ok(Run {
            value: k - 1,
            length: RunLength::Finite(tail_len(k, i)),
        }))
    }
}

impl RunIter<'_> {
    fn advance(&mut self) {
        if self.i == self.k {
            self.k += 1;
            self.i = 1;
        } else {
            self.i += 1;
        }
    }
}
