use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rademacher_walk::construction::{HitRule, InconclusivePolicy, RadiusRule};
use rademacher_walk::exact::ModPath;
use rademacher_walk::verify::StartRule;
use rademacher_walk::Rational;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::parse::Point;

/// Parses a library enum from its kebab-case serialized name.
fn named<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|e| e.to_string())
}

fn is_false(b: &bool) -> bool {
    !b
}

#[derive(Parser, Debug)]
#[command(name = "rwalk", version, about = "Simulate, compute and verify two-dimensional Rademacher walks")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct GlobalArgs {
    /// TOML file with default settings; command-line flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Master seed for every random stream.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for parallel loops.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Run every loop on the calling thread.
    #[arg(long, global = true)]
    pub sequential: bool,
    /// Write the report here instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Print the merged configuration as TOML and exit without running.
    #[arg(long, global = true)]
    pub print_config: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Subcommand, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Simulate one path and report its end state and target visits.
    Simulate(SimulateArgs),
    /// Monte Carlo estimate of P(S_m = target for some 1 <= m <= horizon).
    McReturn(McReturnArgs),
    /// Exact distributions of signed step sums.
    #[command(subcommand)]
    Exact(ExactCommand),
    /// Step-size sequences and their diagnostics.
    #[command(subcommand)]
    Sequence(SequenceCommand),
    /// Round-by-round construction of a recurrent sequence.
    #[command(subcommand)]
    Construct(ConstructCommand),
    /// Numerical checks of the walk's bounds and drift.
    #[command(subcommand)]
    Verify(VerifyCommand),
}

#[derive(Args, Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct SimulateArgs {
    /// Step sequence, e.g. constant:1, floor-power:1/2, list:1,2,3.
    #[arg(long)]
    pub seq: Option<String>,
    #[arg(long)]
    pub horizon: Option<u64>,
    /// Lattice point `x,y` whose visits are counted; repeatable.
    #[arg(long = "target", value_name = "X,Y")]
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub targets: Vec<Point>,
    /// Also write the path as CSV.
    #[arg(long, value_name = "FILE")]
    pub trajectory: Option<PathBuf>,
    /// Switch to arbitrary-precision positions instead of failing on overflow.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "is_false")]
    pub promote: bool,
}

#[derive(Args, Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct McReturnArgs {
    #[arg(long)]
    pub seq: Option<String>,
    #[arg(long)]
    pub horizon: Option<u64>,
    #[arg(long)]
    pub trials: Option<u64>,
    /// Defaults to the origin.
    #[arg(long, value_name = "X,Y")]
    pub target: Option<Point>,
    /// Confidence level of the Wilson interval.
    #[arg(long)]
    pub level: Option<f64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "is_false")]
    pub promote: bool,
}

#[derive(Subcommand, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExactCommand {
    /// Law of T = sum d_i eps_i.
    Pmf1d(StepsArgs),
    /// Law of S_m for the walk with steps a.
    Pmf2d(StepsArgs),
    /// Law of T mod m, or a single residue.
    Mod(ModArgs),
    /// sup_x P(T in (x - D, x + D]).
    Interval(IntervalArgs),
    /// P(walk hits the target within the horizon).
    Hit(HitArgs),
}

#[derive(Args, Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct StepsArgs {
    /// Comma-separated integer steps.
    #[arg(long, value_delimiter = ',')]
    pub d: Option<Vec<u64>>,
}

#[derive(Args, Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ModArgs {
    #[arg(long, value_delimiter = ',')]
    pub d: Option<Vec<u64>>,
    #[arg(long)]
    pub m: Option<u64>,
    /// Report only this residue.
    #[arg(long)]
    pub residue: Option<u64>,
    /// `residue` (default) or `full`.
    #[arg(long, value_parser = named::<ModPath>)]
    pub path: Option<ModPath>,
}

#[derive(Args, Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct IntervalArgs {
    #[arg(long, value_delimiter = ',')]
    pub d: Option<Vec<u64>>,
    /// Half-width D, an integer or fraction p/q.
    #[arg(long)]
    pub half_width: Option<Rational>,
}

#[derive(Args, Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct HitArgs {
    #[arg(long, value_delimiter = ',')]
    pub a: Option<Vec<u64>>,
    #[arg(long, value_name = "X,Y")]
    pub target: Option<Point>,
    /// Defaults to the origin.
    #[arg(long, value_name = "X,Y")]
    pub start: Option<Point>,
    /// Defaults to the number of steps.
    #[arg(long)]
    pub horizon: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SequenceCommand {
    /// Materialize a_1..a_n.
    Make(PrefixArgs),
    /// Run-length decomposition of an integer prefix.
    Decompose(PrefixArgs),
    /// Greedy doubling subsequence ending at n.
    Doubling(DoublingArgs),
    /// Check a_n <= s a_m whenever m >= r n.
    Monotone(MonotoneArgs),
    /// Sub-block boundaries of the explicit block sequence.
    Blocks(BlocksArgs),
}

#[derive(Args, Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct PrefixArgs {
    #[arg(long)]
    pub seq: Option<String>,
    #[arg(long)]
    pub n: Option<u64>,
}

#[derive(Args, Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct DoublingArgs {
    #[arg(long)]
    pub seq: Option<String>,
    #[arg(long)]
    pub n: Option<u64>,
    /// Bound on consecutive gaps; measured from the prefix when omitted.
    #[arg(long)]
    pub gap: Option<Rational>,
}

#[derive(Args, Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct MonotoneArgs {
    #[arg(long)]
    pub seq: Option<String>,
    #[arg(long)]
    pub r: Option<Rational>,
    #[arg(long)]
    pub s: Option<Rational>,
    #[arg(long)]
    pub n_max: Option<u64>,
}

#[derive(Args, Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct BlocksArgs {
    #[arg(long)]
    pub k_max: Option<u64>,
    /// Refuse lengths wider than this many bits.
    #[arg(long)]
    pub max_bits: Option<u64>,
    /// Use the simulable scaled lengths.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "is_false")]
    pub scaled: bool,
    /// Exponent of k in the scaled lengths.
    #[arg(long)]
    pub k_exponent: Option<Rational>,
}

#[derive(Subcommand, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstructCommand {
    /// Positive coefficients with c' b' - c'' b'' = 1.
    Bezout(BezoutArgs),
    /// Smallest certified horizon for one pair and radius.
    N0(N0Args),
    /// Build the full round schedule.
    Build(BuildArgs),
    /// Count coprime partners inside a good-set prefix.
    CheckGood(CheckGoodArgs),
}

#[derive(Args, Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct BezoutArgs {
    #[arg(long)]
    pub b_prime: Option<u64>,
    #[arg(long)]
    pub b_second: Option<u64>,
}

#[derive(Args, Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct N0Args {
    #[arg(long)]
    pub b_prime: Option<u64>,
    #[arg(long)]
    pub b_second: Option<u64>,
    #[arg(long)]
    pub radius: Option<u64>,
    #[arg(long)]
    pub trials: Option<u64>,
    /// Largest horizon tried, in composite steps.
    #[arg(long)]
    pub cap: Option<u64>,
    #[arg(long)]
    pub level: Option<f64>,
    #[arg(long)]
    pub max_targets: Option<usize>,
    /// `composite` (default) or `any-step`.
    #[arg(long, value_parser = named::<HitRule>)]
    pub hit_rule: Option<HitRule>,
}

#[derive(Args, Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct BuildArgs {
    /// Good set: primes:N, file:PATH or a comma-separated list.
    #[arg(long)]
    pub set: Option<String>,
    #[arg(long)]
    pub rounds: Option<usize>,
    /// `coarse` (default) or `realized`.
    #[arg(long, value_parser = named::<RadiusRule>)]
    pub radius_rule: Option<RadiusRule>,
    /// `fail` (default) or `use-cap`.
    #[arg(long, value_parser = named::<InconclusivePolicy>)]
    pub on_inconclusive: Option<InconclusivePolicy>,
    /// Also measure return fractions per round over this many fresh walks.
    #[arg(long)]
    pub check_trials: Option<u64>,
    #[arg(long)]
    pub trials: Option<u64>,
    /// Largest horizon tried, in composite steps.
    #[arg(long)]
    pub cap: Option<u64>,
    #[arg(long)]
    pub level: Option<f64>,
    #[arg(long)]
    pub max_targets: Option<usize>,
    /// `composite` (default) or `any-step`.
    #[arg(long, value_parser = named::<HitRule>)]
    pub hit_rule: Option<HitRule>,
}

#[derive(Args, Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct CheckGoodArgs {
    #[arg(long)]
    pub set: Option<String>,
    #[arg(long)]
    pub horizon: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerifyCommand {
    /// Drift of log(x^2 + y^2 - 1/2) on a lattice diamond.
    Supermartingale(SupermartingaleArgs),
    /// Interval bound 0.8/sqrt(m), for one vector or exhaustively.
    Elo(EloArgs),
    /// Residue bound C log k / k, for one vector or as a trend.
    Modlemma(ModLemmaArgs),
    /// P(return to the origin within r^3 steps) from radius r.
    Hitting(HittingArgs),
    /// Growth of sup_z P(T_k = z) k^(3/2) for d = (1..k).
    Suppmf(SupPmfArgs),
}

#[derive(Args, Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct SupermartingaleArgs {
    #[arg(long)]
    pub radius: Option<u64>,
}

#[derive(Args, Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct EloArgs {
    #[arg(long, value_delimiter = ',')]
    pub d: Option<Vec<u64>>,
    #[arg(long)]
    pub half_width: Option<Rational>,
    /// Scan every non-decreasing vector instead of checking one.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "is_false")]
    pub exhaustive: bool,
    #[arg(long)]
    pub max_len: Option<usize>,
    /// Entries range over D..=max_factor*D.
    #[arg(long)]
    pub max_factor: Option<u64>,
}

#[derive(Args, Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ModLemmaArgs {
    #[arg(long, value_delimiter = ',')]
    pub d: Option<Vec<u64>>,
    #[arg(long)]
    pub m: Option<u64>,
    #[arg(long, value_parser = named::<ModPath>)]
    pub path: Option<ModPath>,
    #[arg(long)]
    pub c_cap: Option<f64>,
    /// Run the d = (1..k), m = k trend over these k instead.
    #[arg(long, value_delimiter = ',')]
    pub trend: Option<Vec<u64>>,
    #[arg(long)]
    pub monotone_from: Option<u64>,
    #[arg(long)]
    pub slack: Option<f64>,
}

#[derive(Args, Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct HittingArgs {
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub step: Option<u64>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub floor: Option<f64>,
    /// `axis` (default) or `annulus`.
    #[arg(long, value_parser = named::<StartRule>)]
    pub start: Option<StartRule>,
    #[arg(long)]
    pub level: Option<f64>,
}

#[derive(Args, Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct SupPmfArgs {
    #[arg(long)]
    pub k_max: Option<u64>,
    #[arg(long)]
    pub slope_tolerance: Option<f64>,
}
