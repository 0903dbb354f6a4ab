use std::fmt;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use rademacher_walk::construction::{first_primes, ConstructionPlan};
use rademacher_walk::sequences::{
    make_sequence, parse_value_list, BlockScale, DEFAULT_PRECISION_BITS, SequenceSpec, StepSequence,
};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A lattice point written `x,y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Point(pub i64, pub i64);

impl FromStr for Point {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().trim_start_matches('(').trim_end_matches(')');
        let (x, y) = t
            .split_once(',')
            .ok_or_else(|| format!("expected a point `x,y`, got `{s}`"))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<i64>()
                .map_err(|_| format!("bad coordinate `{v}` in `{s}`"))
        };
        Ok(Point(parse(x)?, parse(y)?))
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.0, self.1)
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn list(text: &str) -> Result<Vec<u64>> {
    text.split(',')
        .map(|v| {
            v.trim()
                .parse::<u64>()
                .with_context(|| format!("bad list entry `{v}`"))
        })
        .collect()
}

/// Sequence description:
/// `constant:V`, `floor-power:G`, `real-power:A[:BITS]`, `list:1,2,3`,
/// `file:PATH`, `plan:PATH`, `blocks`, `blocks-scaled`.
pub fn sequence_spec(text: &str) -> Result<SequenceSpec> {
    let (kind, arg) = text.split_once(':').unwrap_or((text, ""));
    let spec = match kind {
        "constant" => SequenceSpec::Constant {
            value: arg.parse().with_context(|| format!("bad constant `{arg}`"))?,
        },
        "floor-power" => SequenceSpec::FloorPower {
            gamma: arg.parse().with_context(|| format!("bad exponent `{arg}`"))?,
        },
        "real-power" => {
            let (alpha, bits) = match arg.split_once(':') {
                Some((a, b)) => (a, Some(b)),
                None => (arg, None),
            };
            SequenceSpec::RealPower {
                alpha: alpha.parse().with_context(|| format!("bad exponent `{alpha}`"))?,
                precision_bits: match bits {
                    Some(b) => b.parse().with_context(|| format!("bad precision `{b}`"))?,
                    None => DEFAULT_PRECISION_BITS,
                },
            }
        }
        "list" => SequenceSpec::ExplicitList { values: list(arg)? },
        "file" => SequenceSpec::ExplicitList {
            values: parse_value_list(&read(Path::new(arg))?)?,
        },
        "plan" => {
            let plan = load_plan(Path::new(arg))?;
            SequenceSpec::FromPlan {
                segments: plan.rounds.iter().map(|r| r.segment()).collect(),
            }
        }
        "blocks" => SequenceSpec::ExplicitBlock {
            scale: BlockScale::Exact,
        },
        "blocks-scaled" => SequenceSpec::ExplicitBlock {
            scale: BlockScale::Scaled {
                growth: Default::default(),
                require_squaring: false,
            },
        },
        _ => bail!(
            "unknown sequence `{text}` (expected constant:V, floor-power:G, real-power:A[:BITS], \
             list:..., file:PATH, plan:PATH, blocks or blocks-scaled)"
        ),
    };
    Ok(spec)
}

/// Reads a plan, either bare or inside a `construct build` report.
pub fn load_plan(path: &Path) -> Result<ConstructionPlan> {
    let text = read(path)?;
    let value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("{} is not JSON", path.display()))?;
    let inner = value.pointer("/result/plan").cloned().unwrap_or(value);
    ConstructionPlan::from_json(&inner.to_string())
        .with_context(|| format!("{} does not hold a construction plan", path.display()))
}

pub fn sequence(text: &str) -> Result<StepSequence> {
    Ok(make_sequence(sequence_spec(text)?)?)
}

/// Good-set description: `primes:N`, `file:PATH` or `2,3,5,...`.
pub fn good_set(text: &str) -> Result<Vec<u64>> {
    if let Some(n) = text.strip_prefix("primes:") {
        let n: usize = n.parse().with_context(|| format!("bad count `{n}`"))?;
        return Ok(first_primes(n));
    }
    if let Some(path) = text.strip_prefix("file:") {
        return Ok(parse_value_list(&read(Path::new(path))?)?);
    }
    list(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points() {
        assert_eq!("3,-4".parse::<Point>().unwrap(), Point(3, -4));
        assert_eq!("(0, 0)".parse::<Point>().unwrap(), Point(0, 0));
        assert!("3".parse::<Point>().is_err());
        assert!("a,b".parse::<Point>().is_err());
    }

    #[test]
    fn sequences() {
        assert_eq!(
            sequence_spec("constant:2").unwrap(),
            SequenceSpec::Constant { value: 2 }
        );
        let s = sequence("floor-power:1/2").unwrap();
        assert_eq!(s.integer_prefix(4).unwrap(), vec![1, 1, 1, 2]);
        let s = sequence("list:1,2,3").unwrap();
        assert_eq!(s.len(), Some(3));
        assert!(matches!(
            sequence_spec("real-power:1/2:16").unwrap(),
            SequenceSpec::RealPower { precision_bits: 16, .. }
        ));
        assert!(sequence("wobble:1").is_err());
        assert!(sequence("constant:x").is_err());
    }

    #[test]
    fn sets() {
        assert_eq!(good_set("primes:4").unwrap(), vec![2, 3, 5, 7]);
        assert_eq!(good_set("4, 9").unwrap(), vec![4, 9]);
    }
}
