use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::step::Direction;
use super::WalkError;
use crate::sequences::StepSequence;

/// What happens when a coordinate leaves the 64-bit range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OverflowPolicy {
    /// Stop with [`WalkError::Overflow`].
    #[default]
    Error,
    /// Switch to arbitrary-precision coordinates and carry on.
    Promote,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalkConfig {
    #[serde(default)]
    pub overflow: OverflowPolicy,
}

impl WalkConfig {
    pub fn promoting() -> Self {
        WalkConfig {
            overflow: OverflowPolicy::Promote,
        }
    }
}

/// Exact lattice coordinates `(S^X, S^Y)`, in units of `2^-frac_bits` of the
/// step table that produced them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Position {
    Narrow(i64, i64),
    Wide(BigInt, BigInt),
}

impl Default for Position {
    fn default() -> Self {
        Position::Narrow(0, 0)
    }
}

impl Position {
    pub fn x(&self) -> BigInt {
        match self {
            Position::Narrow(x, _) => BigInt::from(*x),
            Position::Wide(x, _) => x.clone(),
        }
    }

    pub fn y(&self) -> BigInt {
        match self {
            Position::Narrow(_, y) => BigInt::from(*y),
            Position::Wide(_, y) => y.clone(),
        }
    }

    pub fn is_origin(&self) -> bool {
        match self {
            Position::Narrow(x, y) => *x == 0 && *y == 0,
            Position::Wide(x, y) => x.is_zero() && y.is_zero(),
        }
    }

    /// `|x| + |y|`.
    pub fn norm1(&self) -> BigUint {
        match self {
            Position::Narrow(x, y) => {
                BigUint::from(x.unsigned_abs()) + BigUint::from(y.unsigned_abs())
            }
            Position::Wide(x, y) => x.magnitude() + y.magnitude(),
        }
    }

    /// True when both coordinates are multiples of `b`.
    pub fn divisible_by(&self, b: u64) -> bool {
        match self {
            Position::Narrow(x, y) => {
                x.unsigned_abs() % b == 0 && y.unsigned_abs() % b == 0
            }
            Position::Wide(x, y) => {
                let b = BigUint::from(b);
                (x.magnitude() % &b).is_zero() && (y.magnitude() % &b).is_zero()
            }
        }
    }

    /// Squared Euclidean distance to `target`, as a float.
    pub fn distance_sq(&self, target: &Target) -> f64 {
        match (self, target.narrow) {
            (Position::Narrow(x, y), Some((tx, ty))) => {
                let dx = (*x as i128 - tx as i128) as f64;
                let dy = (*y as i128 - ty as i128) as f64;
                dx * dx + dy * dy
            }
            _ => {
                let dx = (self.x() - &target.wide.0).to_f64().unwrap_or(f64::INFINITY);
                let dy = (self.y() - &target.wide.1).to_f64().unwrap_or(f64::INFINITY);
                dx * dx + dy * dy
            }
        }
    }

    #[inline]
    pub fn is_at(&self, target: &Target) -> bool {
        match self {
            Position::Narrow(x, y) => target.narrow == Some((*x, *y)),
            Position::Wide(x, y) => target.wide.0 == *x && target.wide.1 == *y,
        }
    }

    pub(crate) fn advance(
        &mut self,
        direction: Direction,
        size: StepRef<'_>,
        policy: OverflowPolicy,
        step: u64,
    ) -> Result<(), WalkError> {
        let (ux, uy) = direction.unit();
        if let (Position::Narrow(x, y), StepRef::Narrow(a)) = (&mut *self, size) {
            let moved = if ux != 0 {
                x.checked_add(ux * a).map(|v| *x = v)
            } else {
                y.checked_add(uy * a).map(|v| *y = v)
            };
            if moved.is_some() {
                return Ok(());
            }
        }
        if let Position::Narrow(x, y) = *self {
            if policy == OverflowPolicy::Error {
                return Err(WalkError::Overflow { step });
            }
            *self = Position::Wide(BigInt::from(x), BigInt::from(y));
        }
        let Position::Wide(x, y) = self else {
            unreachable!()
        };
        let a = size.to_big();
        match (ux, uy) {
            (1, _) => *x += a,
            (-1, _) => *x -= a,
            (_, 1) => *y += a,
            _ => *y -= a,
        }
        Ok(())
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Position::Narrow(x, y) => write!(f, "({x}, {y})"),
            Position::Wide(x, y) => write!(f, "({x}, {y})"),
        }
    }
}

impl Serialize for Position {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Position", 2)?;
        st.serialize_field("x", &self.x().to_string())?;
        st.serialize_field("y", &self.y().to_string())?;
        st.end()
    }
}

/// A lattice point converted into table units.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Target {
    pub point: (i64, i64),
    narrow: Option<(i64, i64)>,
    wide: (BigInt, BigInt),
}

impl Target {
    pub fn new(point: (i64, i64), frac_bits: u32) -> Self {
        let wide = (
            BigInt::from(point.0) << frac_bits,
            BigInt::from(point.1) << frac_bits,
        );
        let narrow = wide.0.to_i64().zip(wide.1.to_i64());
        Target { point, narrow, wide }
    }

    /// The target in table units when it fits in 64 bits.
    pub fn narrow(&self) -> Option<(i64, i64)> {
        self.narrow
    }
}

/// `S_n` together with its step index.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct WalkState {
    pub n: u64,
    pub position: Position,
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum StepRef<'a> {
    Narrow(i64),
    Wide(&'a BigInt),
}

impl StepRef<'_> {
    fn to_big(self) -> BigInt {
        match self {
            StepRef::Narrow(a) => BigInt::from(a),
            StepRef::Wide(a) => a.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Sizes {
    Narrow(Vec<i64>),
    Wide(Vec<BigInt>),
}

/// Materialized step sizes `a_1, …, a_n` in integer units of `2^-frac_bits`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepTable {
    sizes: Sizes,
    frac_bits: u32,
}

impl StepTable {
    pub fn from_values(values: &[u64]) -> Result<Self, WalkError> {
        Self::from_big(values.iter().map(|&v| BigUint::from(v)).collect(), 0)
    }

    pub fn from_sequence(seq: &StepSequence, n: u64) -> Result<Self, WalkError> {
        if seq.is_integral() {
            let values = seq.integer_prefix(n)?;
            if values.iter().all(|&v| v <= i64::MAX as u64) {
                return Self::from_narrow(values.into_iter().map(|v| v as i64).collect(), 0);
            }
            return Self::from_big(values.into_iter().map(BigUint::from).collect(), 0);
        }
        Self::from_big(seq.scaled_prefix(n)?, seq.frac_bits())
    }

    /// Scaled sizes: entry `i` is `a_{i+1} * 2^frac_bits`.
    pub fn from_big(values: Vec<BigUint>, frac_bits: u32) -> Result<Self, WalkError> {
        if let Some(i) = values.iter().position(|v| v.is_zero()) {
            return Err(WalkError::InvalidParameter(format!(
                "step size a_{} must be positive",
                i + 1
            )));
        }
        if let Some(narrow) = values.iter().map(|v| v.to_i64()).collect::<Option<Vec<_>>>() {
            return Ok(StepTable {
                sizes: Sizes::Narrow(narrow),
                frac_bits,
            });
        }
        Ok(StepTable {
            sizes: Sizes::Wide(values.into_iter().map(BigInt::from).collect()),
            frac_bits,
        })
    }

    fn from_narrow(values: Vec<i64>, frac_bits: u32) -> Result<Self, WalkError> {
        if let Some(i) = values.iter().position(|&v| v <= 0) {
            return Err(WalkError::InvalidParameter(format!(
                "step size a_{} must be positive",
                i + 1
            )));
        }
        Ok(StepTable {
            sizes: Sizes::Narrow(values),
            frac_bits,
        })
    }

    pub fn len(&self) -> usize {
        match &self.sizes {
            Sizes::Narrow(v) => v.len(),
            Sizes::Wide(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn frac_bits(&self) -> u32 {
        self.frac_bits
    }

    /// Sizes as `i64` when every entry fits.
    pub fn narrow(&self) -> Option<&[i64]> {
        match &self.sizes {
            Sizes::Narrow(v) => Some(v),
            Sizes::Wide(_) => None,
        }
    }

    /// `a_n * 2^frac_bits` for `1 <= n <= len`.
    pub fn size(&self, n: u64) -> BigInt {
        self.size_ref(n as usize - 1).to_big()
    }

    /// `a_n` as a float in lattice units.
    pub fn size_f64(&self, n: u64) -> f64 {
        self.size(n).to_f64().unwrap_or(f64::INFINITY) / 2f64.powi(self.frac_bits as i32)
    }

    #[inline]
    pub(crate) fn size_ref(&self, index: usize) -> StepRef<'_> {
        match &self.sizes {
            Sizes::Narrow(v) => StepRef::Narrow(v[index]),
            Sizes::Wide(v) => match v[index].to_i64() {
                Some(a) => StepRef::Narrow(a),
                None => StepRef::Wide(&v[index]),
            },
        }
    }

    /// The first `n` entries.
    pub fn truncated(&self, n: usize) -> StepTable {
        let sizes = match &self.sizes {
            Sizes::Narrow(v) => Sizes::Narrow(v[..n.min(v.len())].to_vec()),
            Sizes::Wide(v) => Sizes::Wide(v[..n.min(v.len())].to_vec()),
        };
        StepTable {
            sizes,
            frac_bits: self.frac_bits,
        }
    }

    /// `Σ_{i<=n} a_i` in table units.
    pub fn partial_sum(&self, n: usize) -> BigInt {
        (0..n).map(|i| self.size_ref(i).to_big()).sum()
    }

    pub(crate) fn check_horizon(&self, horizon: u64) -> Result<(), WalkError> {
        if horizon > self.len() as u64 {
            return Err(WalkError::InvalidParameter(format!(
                "horizon {horizon} exceeds the {} materialized steps",
                self.len()
            )));
        }
        Ok(())
    }

    #[cfg(test)]
    pub(crate) fn within_reach(&self, n: usize, position: &Position) -> bool {
        BigInt::from(position.norm1()) <= self.partial_sum(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overflow_errors_or_promotes() {
        let big = i64::MAX as u64;
        let table = StepTable::from_values(&[big, big]).unwrap();
        let mut p = Position::default();
        p.advance(Direction::PosX, table.size_ref(0), OverflowPolicy::Error, 1)
            .unwrap();
        let err = p
            .clone()
            .advance(Direction::PosX, table.size_ref(1), OverflowPolicy::Error, 2)
            .unwrap_err();
        assert!(matches!(err, WalkError::Overflow { step: 2 }));
        p.advance(Direction::PosX, table.size_ref(1), OverflowPolicy::Promote, 2)
            .unwrap();
        assert_eq!(p.x(), BigInt::from(big) * 2);
        assert!(matches!(p, Position::Wide(..)));
    }

    #[test]
    fn huge_entries_make_a_wide_table() {
        let seq = StepSequence::explicit(vec![1, u64::MAX]).unwrap();
        let table = StepTable::from_sequence(&seq, 2).unwrap();
        assert!(table.narrow().is_none());
        assert_eq!(table.size(2), BigInt::from(u64::MAX));
        let mut p = Position::default();
        p.advance(Direction::NegY, table.size_ref(1), OverflowPolicy::Promote, 2)
            .unwrap();
        assert_eq!(p.y(), -BigInt::from(u64::MAX));
    }

    #[test]
    fn targets_scale_with_table_units() {
        let t = Target::new((3, -1), 2);
        assert!(Position::Narrow(12, -4).is_at(&t));
        assert!(Position::Wide(BigInt::from(12), BigInt::from(-4)).is_at(&t));
        assert!(!Position::Narrow(3, -1).is_at(&t));
        let far = Target::new((1, 0), 64);
        assert!(!Position::Narrow(i64::MAX, 0).is_at(&far));
    }

    #[test]
    fn divisibility() {
        assert!(Position::Narrow(0, 0).divisible_by(2));
        assert!(!Position::Narrow(1, 1).divisible_by(2));
        assert!(Position::Narrow(-6, 9).divisible_by(3));
        assert!(Position::Narrow(5, 7).divisible_by(1));
    }
}
