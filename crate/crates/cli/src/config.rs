use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::args::*;

/// Everything a run needs, after merging the config file with flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub sequential: bool,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
    pub command: Command,
}

impl RunConfig {
    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    #[cfg(test)]
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }
}

/// Layout of a `--config` file: global keys plus one section per command.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub sequential: Option<bool>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub simulate: Option<SimulateArgs>,
    pub mc_return: Option<McReturnArgs>,
    #[serde(default)]
    pub exact: ExactSections,
    #[serde(default)]
    pub sequence: SequenceSections,
    #[serde(default)]
    pub construct: ConstructSections,
    #[serde(default)]
    pub verify: VerifySections,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExactSections {
    pub pmf1d: Option<StepsArgs>,
    pub pmf2d: Option<StepsArgs>,
    #[serde(rename = "mod")]
    pub modulo: Option<ModArgs>,
    pub interval: Option<IntervalArgs>,
    pub hit: Option<HitArgs>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceSections {
    pub make: Option<PrefixArgs>,
    pub decompose: Option<PrefixArgs>,
    pub doubling: Option<DoublingArgs>,
    pub monotone: Option<MonotoneArgs>,
    pub blocks: Option<BlocksArgs>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ConstructSections {
    pub bezout: Option<BezoutArgs>,
    pub n0: Option<N0Args>,
    pub build: Option<BuildArgs>,
    pub check_good: Option<CheckGoodArgs>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySections {
    pub supermartingale: Option<SupermartingaleArgs>,
    pub elo: Option<EloArgs>,
    pub modlemma: Option<ModLemmaArgs>,
    pub hitting: Option<HittingArgs>,
    pub suppmf: Option<SupPmfArgs>,
}

pub fn read_file_config(path: &Path) -> Result<FileConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config file {}", path.display()))?;
    parse_file_config(&text).with_context(|| format!("in config file {}", path.display()))
}

pub fn parse_file_config(text: &str) -> Result<FileConfig> {
    Ok(toml::from_str(text)?)
}

/// Fields set in `flags` win over those in `file`.
fn overlay<T: Serialize + DeserializeOwned>(file: Option<T>, flags: T) -> Result<T> {
    let Some(file) = file else { return Ok(flags) };
    let mut base = serde_json::to_value(file)?;
    if let (Value::Object(base), Value::Object(over)) = (&mut base, serde_json::to_value(flags)?) {
        for (k, v) in over {
            if !v.is_null() {
                base.insert(k, v);
            }
        }
    }
    Ok(serde_json::from_value(base)?)
}

fn merge_command(file: FileConfig, command: Command) -> Result<Command> {
    use Command as C;
    Ok(match command {
        C::Simulate(a) => C::Simulate(overlay(file.simulate, a)?),
        C::McReturn(a) => C::McReturn(overlay(file.mc_return, a)?),
        C::Exact(e) => {
            let s = file.exact;
            C::Exact(match e {
                ExactCommand::Pmf1d(a) => ExactCommand::Pmf1d(overlay(s.pmf1d, a)?),
                ExactCommand::Pmf2d(a) => ExactCommand::Pmf2d(overlay(s.pmf2d, a)?),
                ExactCommand::Mod(a) => ExactCommand::Mod(overlay(s.modulo, a)?),
                ExactCommand::Interval(a) => ExactCommand::Interval(overlay(s.interval, a)?),
                ExactCommand::Hit(a) => ExactCommand::Hit(overlay(s.hit, a)?),
            })
        }
        C::Sequence(q) => {
            let s = file.sequence;
            C::Sequence(match q {
                SequenceCommand::Make(a) => SequenceCommand::Make(overlay(s.make, a)?),
                SequenceCommand::Decompose(a) => {
                    SequenceCommand::Decompose(overlay(s.decompose, a)?)
                }
                SequenceCommand::Doubling(a) => SequenceCommand::Doubling(overlay(s.doubling, a)?),
                SequenceCommand::Monotone(a) => SequenceCommand::Monotone(overlay(s.monotone, a)?),
                SequenceCommand::Blocks(a) => SequenceCommand::Blocks(overlay(s.blocks, a)?),
            })
        }
        C::Construct(c) => {
            let s = file.construct;
            C::Construct(match c {
                ConstructCommand::Bezout(a) => ConstructCommand::Bezout(overlay(s.bezout, a)?),
                ConstructCommand::N0(a) => ConstructCommand::N0(overlay(s.n0, a)?),
                ConstructCommand::Build(a) => ConstructCommand::Build(overlay(s.build, a)?),
                ConstructCommand::CheckGood(a) => {
                    ConstructCommand::CheckGood(overlay(s.check_good, a)?)
                }
            })
        }
        C::Verify(v) => {
            let s = file.verify;
            C::Verify(match v {
                VerifyCommand::Supermartingale(a) => {
                    VerifyCommand::Supermartingale(overlay(s.supermartingale, a)?)
                }
                VerifyCommand::Elo(a) => VerifyCommand::Elo(overlay(s.elo, a)?),
                VerifyCommand::Modlemma(a) => VerifyCommand::Modlemma(overlay(s.modlemma, a)?),
                VerifyCommand::Hitting(a) => VerifyCommand::Hitting(overlay(s.hitting, a)?),
                VerifyCommand::Suppmf(a) => VerifyCommand::Suppmf(overlay(s.suppmf, a)?),
            })
        }
    })
}

/// Merges an optional config file under the parsed flags and validates the
/// result.
pub fn parse_config(cli: Cli) -> Result<RunConfig> {
    let file = match &cli.global.config {
        Some(path) => read_file_config(path)?,
        None => FileConfig::default(),
    };
    let g = cli.global;
    let config = RunConfig {
        seed: g.seed.or(file.seed),
        threads: g.threads.or(file.threads),
        sequential: g.sequential || file.sequential.unwrap_or(false),
        out: g.out.or_else(|| file.out.clone()),
        format: g.format.or(file.format).unwrap_or_default(),
        command: merge_command(file, cli.command)?,
    };
    validate(&config)?;
    Ok(config)
}

pub fn validate(config: &RunConfig) -> Result<()> {
    if config.threads == Some(0) {
        anyhow::bail!("--threads must be >= 1");
    }
    crate::run::prepare(config).map(|_| ())
}
