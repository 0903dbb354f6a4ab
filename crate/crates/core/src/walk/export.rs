use std::io::{self, Write};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::Serialize;

use super::simulate::Trajectory;
use super::step::RNG_ID;

pub const TRAJECTORY_HEADER: &str = "n,x,y,a_n,kappa,eps";

/// Provenance stamped on every exported record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunMetadata {
    pub tool: String,
    pub version: String,
    pub rng: String,
    pub master_seed: Option<u64>,
}

impl RunMetadata {
    pub fn new(master_seed: Option<u64>) -> Self {
        RunMetadata {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            rng: RNG_ID.to_string(),
            master_seed,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report<T> {
    pub metadata: RunMetadata,
    pub result: T,
}

impl<T: Serialize> Report<T> {
    pub fn new(master_seed: Option<u64>, result: T) -> Self {
        Report {
            metadata: RunMetadata::new(master_seed),
            result,
        }
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }
}

/// Exact decimal form of `value / 2^frac_bits`.
pub fn dyadic_decimal(value: &BigInt, frac_bits: u32) -> String {
    if frac_bits == 0 {
        return value.to_string();
    }
    let scaled = value.abs() * num_traits::pow(BigInt::from(5), frac_bits as usize);
    let digits = format!("{:0>width$}", scaled.to_string(), width = frac_bits as usize + 1);
    let (int, frac) = digits.split_at(digits.len() - frac_bits as usize);
    let frac = frac.trim_end_matches('0');
    let sign = if value.is_negative() { "-" } else { "" };
    if frac.is_empty() || value.is_zero() {
        format!("{sign}{int}")
    } else {
        format!("{sign}{int}.{frac}")
    }
}

/// Writes one row per step `n = 1..=len` with lattice-unit coordinates.
pub fn write_trajectory_csv<W: Write>(trajectory: &Trajectory, mut out: W) -> io::Result<()> {
    let bits = trajectory.table().frac_bits();
    writeln!(out, "{TRAJECTORY_HEADER}")?;
    for (i, d) in trajectory.directions().iter().enumerate() {
        let n = i + 1;
        let p = trajectory.position(n);
        let (kappa, eps) = d.decompose();
        writeln!(
            out,
            "{n},{},{},{},{kappa},{eps}",
            dyadic_decimal(&p.x(), bits),
            dyadic_decimal(&p.y(), bits),
            dyadic_decimal(&trajectory.table().size(n as u64), bits),
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walk::{Direction, StepTable, WalkConfig};

    #[test]
    fn dyadic_decimals() {
        assert_eq!(dyadic_decimal(&BigInt::from(5), 0), "5");
        assert_eq!(dyadic_decimal(&BigInt::from(3), 2), "0.75");
        assert_eq!(dyadic_decimal(&BigInt::from(-10), 2), "-2.5");
        assert_eq!(dyadic_decimal(&BigInt::from(8), 2), "2");
        assert_eq!(dyadic_decimal(&BigInt::from(0), 3), "0");
        assert_eq!(dyadic_decimal(&BigInt::from(1), 4), "0.0625");
    }

    #[test]
    fn csv_rows() {
        let table = StepTable::from_values(&[1, 2, 3]).unwrap();
        let path = [Direction::PosX, Direction::NegY, Direction::NegX];
        let t = crate::walk::Trajectory::from_directions(&table, &path, &WalkConfig::default())
            .unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&t, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "n,x,y,a_n,kappa,eps\n1,1,0,1,1,1\n2,1,-2,2,0,-1\n3,-2,-2,3,1,-1\n"
        );
    }

    #[test]
    fn report_carries_metadata() {
        let json = Report::new(Some(42), 7u32).to_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["metadata"]["master_seed"], 42);
        assert_eq!(v["metadata"]["rng"], RNG_ID);
        assert_eq!(v["result"], 7);
    }
}
