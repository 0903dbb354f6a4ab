use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use super::VerifyError;
use crate::Execution;

/// Value of `f` at the origin.
pub const F_ORIGIN: f64 = -5.0;

/// Relative tolerance between the two ways of computing `Δ`.
pub const DELTA_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointClass {
    Origin,
    OriginNeighbor,
    Generic,
}

pub fn classify(x: i64, y: i64) -> PointClass {
    match x.unsigned_abs() + y.unsigned_abs() {
        0 => PointClass::Origin,
        1 => PointClass::OriginNeighbor,
        _ => PointClass::Generic,
    }
}

/// `Δ_{x,y}`: mean of `f = log(x² + y² − 1/2)` over the four neighbours
/// minus its value at `(x, y)`, with `f(0) = −5`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaReport {
    pub point: (i64, i64),
    pub class: PointClass,
    /// From the product of the neighbour arguments.
    pub delta_direct: f64,
    /// From `1 − 64(x² − y²)² / (2x² + 2y² − 1)⁴`, or `126 e⁻⁵` next to
    /// the origin.
    pub delta_closed: f64,
    pub exp_4delta: f64,
    /// `exp(4Δ)` as a fraction when it is rational (away from the origin).
    #[serde(serialize_with = "crate::verify::ser_opt_rational")]
    pub exp_4delta_exact: Option<BigRational>,
    /// The neighbour product and the closed form agree as integers.
    pub identity_exact: bool,
}

impl DeltaReport {
    pub fn relative_gap(&self) -> f64 {
        relative_gap(self.delta_direct, self.delta_closed)
    }
}

pub fn relative_gap(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// `2x² + 2y² − 1`, twice the argument of the logarithm.
fn twice_arg(x: i64, y: i64) -> Result<i128, VerifyError> {
    let (x, y) = (x as i128, y as i128);
    x.checked_mul(x)
        .and_then(|a| y.checked_mul(y).and_then(|b| a.checked_add(b)))
        .and_then(|s| s.checked_mul(2))
        .map(|s| s - 1)
        .ok_or(VerifyError::Range(format!("({x}, {y}) is too far out")))
}

fn product(values: &[i128]) -> Result<i128, VerifyError> {
    values
        .iter()
        .try_fold(1i128, |acc, &v| acc.checked_mul(v))
        .ok_or_else(|| VerifyError::Range("neighbour product exceeds 128 bits".into()))
}

pub fn supermartingale_delta(x: i64, y: i64) -> Result<DeltaReport, VerifyError> {
    let class = classify(x, y);
    if class == PointClass::Origin {
        return Err(VerifyError::Domain(
            "the drift is only defined away from the origin".into(),
        ));
    }
    let neighbours = [(x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)];
    let q0 = twice_arg(x, y)?;
    let p0 = product(&[q0; 4])?;
    let others = neighbours
        .iter()
        .filter(|&&(a, b)| (a, b) != (0, 0))
        .map(|&(a, b)| twice_arg(a, b))
        .collect::<Result<Vec<_>, _>>()?;
    let p = product(&others)?;
    match class {
        PointClass::Generic => {
            // exp(4Δ) = Π q_i / q_0⁴ = p / p0 exactly; compare p − p0 against
            // the closed-form numerator.
            let diff = p - p0;
            let d2 = (x as i128) * (x as i128) - (y as i128) * (y as i128);
            let numerator = 64 * d2 * d2;
            let delta_direct = (diff as f64 / p0 as f64).ln_1p() / 4.0;
            let delta_closed = (-(numerator as f64) / p0 as f64).ln_1p() / 4.0;
            Ok(DeltaReport {
                point: (x, y),
                class,
                delta_direct,
                delta_closed,
                exp_4delta: 1.0 - numerator as f64 / p0 as f64,
                exp_4delta_exact: Some(BigRational::new(BigInt::from(p), BigInt::from(p0))),
                identity_exact: diff == -numerator,
            })
        }
        _ => {
            // Three neighbours off the origin: exp(4Δ) = 2·p / (2q_0)⁴ · e^{-5}.
            let delta_direct = ((2 * p) as f64 / p0 as f64).ln() / 4.0 + F_ORIGIN / 4.0;
            let delta_closed = (126f64.ln() + F_ORIGIN) / 4.0;
            Ok(DeltaReport {
                point: (x, y),
                class,
                delta_direct,
                delta_closed,
                exp_4delta: 126.0 * F_ORIGIN.exp(),
                exp_4delta_exact: None,
                identity_exact: 2 * p == 126 * p0,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupermartingaleReport {
    pub radius: u64,
    pub points: u64,
    /// Points with `Δ > 0`.
    pub violations: Vec<(i64, i64)>,
    pub max_delta: f64,
    pub argmax: (i64, i64),
    pub max_relative_gap: f64,
    /// Points where the exact integer identity failed.
    pub identity_failures: Vec<(i64, i64)>,
    /// Points where `Δ = 0` does not coincide with `|x| = |y|`.
    pub equality_mismatches: Vec<(i64, i64)>,
    /// `exp(4Δ)` next to the origin, and its distance to `126 e⁻⁵`.
    pub neighbor_exp_4delta: f64,
    pub neighbor_relative_gap: f64,
    pub pass: bool,
}

/// Checks `Δ ≤ 0` and both computations of `Δ` at every lattice point with
/// `1 ≤ |x| + |y| ≤ radius`.
pub fn verify_supermartingale(
    radius: u64,
    execution: Execution,
) -> Result<SupermartingaleReport, VerifyError> {
    if radius == 0 {
        return Err(VerifyError::InvalidParameter("radius must be >= 1".into()));
    }
    let r = i64::try_from(radius).map_err(|_| VerifyError::Range("radius too large".into()))?;
    let rows: Vec<i64> = (-r..=r).collect();
    let per_row = execution.map_slice(&rows, |&x| {
        let span = r - x.abs();
        (-span..=span)
            .filter(|&y| (x, y) != (0, 0))
            .map(|y| supermartingale_delta(x, y))
            .collect::<Result<Vec<_>, _>>()
    });
    let expected = 126.0 * F_ORIGIN.exp();
    let mut report = SupermartingaleReport {
        radius,
        points: 0,
        violations: Vec::new(),
        max_delta: f64::NEG_INFINITY,
        argmax: (0, 0),
        max_relative_gap: 0.0,
        identity_failures: Vec::new(),
        equality_mismatches: Vec::new(),
        neighbor_exp_4delta: 0.0,
        neighbor_relative_gap: 0.0,
        pass: false,
    };
    for row in per_row {
        for d in row? {
            report.points += 1;
            if d.delta_direct > 0.0 || d.delta_closed > 0.0 {
                report.violations.push(d.point);
            }
            if d.delta_direct > report.max_delta {
                report.max_delta = d.delta_direct;
                report.argmax = d.point;
            }
            report.max_relative_gap = report.max_relative_gap.max(d.relative_gap());
            if !d.identity_exact {
                report.identity_failures.push(d.point);
            }
            let (x, y) = d.point;
            if d.class == PointClass::Generic && (d.delta_direct == 0.0) != (x.abs() == y.abs()) {
                report.equality_mismatches.push(d.point);
            }
            if d.class == PointClass::OriginNeighbor {
                let e = (4.0 * d.delta_direct).exp();
                let gap = relative_gap(e, expected);
                if gap >= report.neighbor_relative_gap {
                    report.neighbor_relative_gap = gap;
                    report.neighbor_exp_4delta = e;
                }
            }
        }
    }
    report.pass = report.violations.is_empty()
        && report.identity_failures.is_empty()
        && report.equality_mismatches.is_empty()
        && report.max_relative_gap <= DELTA_TOLERANCE
        && report.neighbor_relative_gap <= DELTA_TOLERANCE;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    #[test]
    fn origin_neighbour() {
        for (x, y) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
            let d = supermartingale_delta(x, y).unwrap();
            assert_eq!(d.class, PointClass::OriginNeighbor);
            let e = (4.0 * d.delta_direct).exp();
            assert!(relative_gap(e, 126.0 * (-5f64).exp()) < 1e-14);
            assert!(e < 0.85 && e > 0.847);
            assert!(d.identity_exact);
        }
    }

    #[test]
    fn diagonal_is_flat() {
        let d = supermartingale_delta(1, 1).unwrap();
        assert_eq!(d.delta_direct, 0.0);
        assert_eq!(d.delta_closed, 0.0);
        assert_eq!(d.exp_4delta_exact.unwrap(), BigRational::from_integer(1.into()));
        // the neighbour arguments are 4.5, 0.5, 4.5, 0.5 against 1.5
        let naive = ((4.5f64).ln() * 2.0 + (0.5f64).ln() * 2.0) / 4.0 - 1.5f64.ln();
        assert!(naive.abs() < 1e-15);
    }

    #[test]
    fn axis_point_two() {
        let d = supermartingale_delta(2, 0).unwrap();
        let exact = d.exp_4delta_exact.clone().unwrap();
        assert_eq!(exact, BigRational::new(1377.into(), 2401.into()));
        assert!((d.exp_4delta - 1377.0 / 2401.0).abs() < 1e-15);
        assert!(relative_gap(d.delta_direct, (1377f64 / 2401.0).ln() / 4.0) < 1e-15);
        assert!((exact.to_f64().unwrap() - 0.5735).abs() < 1e-4);
    }

    #[test]
    fn origin_is_rejected() {
        assert!(matches!(supermartingale_delta(0, 0), Err(VerifyError::Domain(_))));
    }

    #[test]
    fn radius_one_grid() {
        let r = verify_supermartingale(1, Execution::Sequential).unwrap();
        assert_eq!(r.points, 4);
        assert!((r.max_delta - (126f64.ln() - 5.0) / 4.0).abs() < 1e-15);
        assert!(r.pass);
    }

    #[test]
    fn radius_thirty_grid() {
        let r = verify_supermartingale(30, Execution::Parallel).unwrap();
        assert_eq!(r.points, 2 * 30 * 31);
        assert_eq!(r.max_delta, 0.0);
        assert!(r.pass, "{r:?}");
    }
}
