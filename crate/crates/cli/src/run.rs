use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rademacher_walk::construction::{
    build_recurrent_sequence, check_good_set, estimate_n0, positive_bezout,
    segment_return_fractions, BuildConfig, ConstructionError, N0Config, N0Status,
};
use rademacher_walk::exact::{
    hit_probability_2d_from, max_interval_probability, mod_probability, pmf_1d, pmf_2d,
    residue_counts, ExactConfig,
};
use rademacher_walk::sequences::{
    check_rs_monotone, extract_doubling_subsequence, run_length_decompose, BlockScale, Growth,
    MAX_MATERIALIZED_BITS,
};
use rademacher_walk::verify::{
    elo_exhaustive, hitting_time_experiment, mod_lemma_trend, sup_pmf_trend, trend_csv,
    verify_elo, verify_mod_lemma, verify_supermartingale, DEFAULT_C_CAP, DEFAULT_FLOOR,
    DEFAULT_SLOPE_TOLERANCE,
};
use rademacher_walk::walk::{
    monte_carlo_return, simulate, visit_statistics, write_trajectory_csv, MonteCarloConfig,
    NoVisitor, Report, RunMetadata, StepSampler, StepTable, Trajectory, WalkConfig,
};
use rademacher_walk::Execution;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::*;
use crate::config::RunConfig;
use crate::parse;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    Failed,
    Inconclusive,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Success => 0,
            Status::Failed => 2,
            Status::Inconclusive => 3,
        }
    }

    fn check(pass: bool) -> Self {
        if pass {
            Status::Success
        } else {
            Status::Failed
        }
    }
}

/// What a command produced.
pub struct Artifact {
    pub result: Value,
    /// Tabular form, for commands that have one.
    pub csv: Option<String>,
    pub status: Status,
    /// Seed stamped into the metadata; `None` for deterministic commands.
    pub seed: Option<u64>,
}

impl Artifact {
    fn new<T: Serialize>(result: &T, status: Status) -> Result<Self> {
        Ok(Artifact {
            result: serde_json::to_value(result)?,
            csv: None,
            status,
            seed: None,
        })
    }

    fn seeded(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    fn with_csv(mut self, csv: String) -> Self {
        self.csv = Some(csv);
        self
    }
}

pub struct Ctx {
    pub execution: Execution,
    pub seed: u64,
}

pub type Job = Box<dyn FnOnce(&Ctx) -> Result<Artifact>>;

fn need<T: Clone>(v: &Option<T>, flag: &str) -> Result<T> {
    v.clone().ok_or_else(|| anyhow!("missing --{flag}"))
}

fn positive(v: u64, flag: &str) -> Result<u64> {
    if v == 0 {
        bail!("--{flag} must be >= 1");
    }
    Ok(v)
}

fn level(v: Option<f64>) -> Result<f64> {
    let l = v.unwrap_or(0.95);
    if !(l > 0.0 && l < 1.0) {
        bail!("--level must lie strictly between 0 and 1");
    }
    Ok(l)
}

fn frac(r: &BigRational) -> Value {
    json!({ "fraction": r.to_string(), "value": r.to_f64().unwrap_or(f64::NAN) })
}

fn walk_config(promote: bool) -> WalkConfig {
    if promote {
        WalkConfig::promoting()
    } else {
        WalkConfig::default()
    }
}

/// Checks the command's parameters and returns the work to run.
pub fn prepare(config: &RunConfig) -> Result<Job> {
    match &config.command {
        Command::Simulate(a) => simulate_job(a),
        Command::McReturn(a) => mc_return_job(a),
        Command::Exact(e) => exact_job(e),
        Command::Sequence(s) => sequence_job(s),
        Command::Construct(c) => construct_job(c),
        Command::Verify(v) => verify_job(v),
    }
}

fn simulate_job(a: &SimulateArgs) -> Result<Job> {
    let seq = parse::sequence(&need(&a.seq, "seq")?)?;
    let horizon = need(&a.horizon, "horizon")?;
    if let Some(len) = seq.len() {
        if horizon > len {
            bail!("--horizon {horizon} exceeds the sequence length {len}");
        }
    }
    let targets: Vec<(i64, i64)> = a.targets.iter().map(|p| (p.0, p.1)).collect();
    let walk = walk_config(a.promote);
    let trajectory = a.trajectory.clone();
    Ok(Box::new(move |ctx| {
        let summary = simulate(&seq, horizon, ctx.seed, &walk, &mut NoVisitor)?;
        let visits = visit_statistics(&seq, horizon, ctx.seed, &targets, &walk)?;
        let table = StepTable::from_sequence(&seq, horizon)?;
        let path = Trajectory::record(&table, horizon, &mut StepSampler::for_trial(ctx.seed, 0), &walk)?;
        let mut csv = Vec::new();
        write_trajectory_csv(&path, &mut csv)?;
        if let Some(p) = trajectory {
            std::fs::write(&p, &csv).with_context(|| format!("cannot write {}", p.display()))?;
        }
        Ok(Artifact::new(&json!({ "summary": summary, "visits": visits.targets }), Status::Success)?
            .seeded(ctx.seed)
            .with_csv(String::from_utf8(csv)?))
    }))
}

fn mc_return_job(a: &McReturnArgs) -> Result<Job> {
    let seq = parse::sequence(&need(&a.seq, "seq")?)?;
    let horizon = need(&a.horizon, "horizon")?;
    let trials = positive(need(&a.trials, "trials")?, "trials")?;
    let level = level(a.level)?;
    let target = a.target.map_or((0, 0), |p| (p.0, p.1));
    let walk = walk_config(a.promote);
    if let Some(len) = seq.len() {
        if horizon > len {
            bail!("--horizon {horizon} exceeds the sequence length {len}");
        }
    }
    Ok(Box::new(move |ctx| {
        let mut cfg = MonteCarloConfig::new(trials, ctx.seed).with_execution(ctx.execution);
        cfg.level = level;
        cfg.walk = walk;
        let est = monte_carlo_return(&seq, horizon, target, &cfg)?;
        let csv = format!(
            "horizon,target_x,target_y,trials,successes,estimate,lower,upper\n{horizon},{},{},{},{},{},{},{}\n",
            target.0, target.1, est.trials, est.successes, est.estimate, est.interval.lower,
            est.interval.upper
        );
        let result = json!({ "horizon": horizon, "target": target, "estimate": est });
        Ok(Artifact::new(&result, Status::Success)?.seeded(ctx.seed).with_csv(csv))
    }))
}

fn exact_job(e: &ExactCommand) -> Result<Job> {
    let cfg = ExactConfig::default();
    Ok(match e {
        ExactCommand::Pmf1d(a) => {
            let d = need(&a.d, "d")?;
            Box::new(move |_| {
                let pmf = pmf_1d(&d, &cfg)?;
                let mut csv = String::from("z,count,mass\n");
                let mut law = Vec::new();
                for (&z, c) in pmf.support().iter().zip(pmf.counts()) {
                    let mass = pmf.mass(z);
                    writeln!(csv, "{z},{c},{mass}")?;
                    law.push(json!({ "z": z, "count": c.to_string(), "mass": mass.to_string() }));
                }
                let result = json!({ "d": d, "patterns": format!("2^{}", pmf.log2_denominator()),
                                     "law": law });
                Ok(Artifact::new(&result, Status::Success)?.with_csv(csv))
            })
        }
        ExactCommand::Pmf2d(a) => {
            let steps = need(&a.d, "d")?;
            Box::new(move |_| {
                let pmf = pmf_2d(&steps, &cfg)?;
                let mut csv = String::from("x,y,mass\n");
                let mut law = Vec::new();
                for ((x, y), mass) in pmf.masses() {
                    writeln!(csv, "{x},{y},{mass}")?;
                    law.push(json!({ "x": x, "y": y, "mass": mass.to_string() }));
                }
                let result = json!({ "a": steps, "patterns": format!("2^{}", pmf.log2_denominator()),
                                     "law": law });
                Ok(Artifact::new(&result, Status::Success)?.with_csv(csv))
            })
        }
        ExactCommand::Mod(a) => {
            let d = need(&a.d, "d")?;
            let m = positive(need(&a.m, "m")?, "m")?;
            if let Some(r) = a.residue {
                if r >= m {
                    bail!("--residue {r} must lie in 0..{m}");
                }
            }
            let residue = a.residue;
            let path = a.path.unwrap_or_default();
            Box::new(move |_| {
                if let Some(r) = residue {
                    let p = mod_probability(&d, m, r, path, &cfg)?;
                    let result = json!({ "d": d, "m": m, "residue": r, "probability": frac(&p) });
                    let csv = format!("residue,mass\n{r},{p}\n");
                    return Ok(Artifact::new(&result, Status::Success)?.with_csv(csv));
                }
                let counts = residue_counts(&d, m, path, &cfg)?;
                let denom = BigRational::from_integer(num_bigint::BigInt::from(1) << d.len());
                let masses: Vec<BigRational> = counts
                    .iter()
                    .map(|c| BigRational::from_integer(c.clone().into()) / &denom)
                    .collect();
                let mut csv = String::from("residue,mass\n");
                for (r, p) in masses.iter().enumerate() {
                    writeln!(csv, "{r},{p}")?;
                }
                let (best, sup) = masses
                    .iter()
                    .enumerate()
                    .fold((0, &masses[0]), |acc, (r, p)| if p > acc.1 { (r, p) } else { acc });
                let result = json!({
                    "d": d, "m": m,
                    "law": masses.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
                    "sup": frac(sup), "argmax": best,
                });
                Ok(Artifact::new(&result, Status::Success)?.with_csv(csv))
            })
        }
        ExactCommand::Interval(a) => {
            let d = need(&a.d, "d")?;
            let hw = need(&a.half_width, "half-width")?;
            Box::new(move |_| {
                let max = max_interval_probability(&d, hw, &cfg)?;
                let result = json!({ "d": d, "half_width": hw, "sup": frac(&max.sup),
                                     "argmax": max.argmax.to_string() });
                Artifact::new(&result, Status::Success)
            })
        }
        ExactCommand::Hit(a) => {
            let steps = need(&a.a, "a")?;
            let target = need(&a.target, "target")?;
            let start = a.start.unwrap_or(parse::Point(0, 0));
            let horizon = a.horizon.unwrap_or(steps.len());
            if horizon > steps.len() {
                bail!("--horizon {horizon} exceeds the number of steps {}", steps.len());
            }
            Box::new(move |_| {
                let p = hit_probability_2d_from(
                    &steps,
                    (start.0, start.1),
                    (target.0, target.1),
                    horizon,
                    &cfg,
                )?;
                let result = json!({ "a": steps, "start": start, "target": target,
                                     "horizon": horizon, "probability": frac(&p) });
                Artifact::new(&result, Status::Success)
            })
        }
    })
}

fn sequence_job(s: &SequenceCommand) -> Result<Job> {
    Ok(match s {
        SequenceCommand::Make(a) => {
            let seq = parse::sequence(&need(&a.seq, "seq")?)?;
            let n = positive(need(&a.n, "n")?, "n")?;
            Box::new(move |_| {
                let values = seq.prefix(n)?;
                let mut csv = String::from("n,a_n\n");
                for (i, v) in values.iter().enumerate() {
                    writeln!(csv, "{},{v}", i + 1)?;
                }
                let result = json!({ "spec": seq.spec(),
                    "values": values.iter().map(|v| v.to_string()).collect::<Vec<_>>() });
                Ok(Artifact::new(&result, Status::Success)?.with_csv(csv))
            })
        }
        SequenceCommand::Decompose(a) => {
            let seq = parse::sequence(&need(&a.seq, "seq")?)?;
            let n = positive(need(&a.n, "n")?, "n")?;
            Box::new(move |_| {
                let dec = run_length_decompose(&seq, n)?;
                let mut csv = String::from("j,value,multiplicity,start\n");
                for (j, ((v, m), s)) in dec
                    .values
                    .iter()
                    .zip(&dec.multiplicities)
                    .zip(&dec.starts)
                    .enumerate()
                {
                    writeln!(csv, "{},{v},{m},{s}", j + 1)?;
                }
                Ok(Artifact::new(&dec, Status::Success)?.with_csv(csv))
            })
        }
        SequenceCommand::Doubling(a) => {
            let seq = parse::sequence(&need(&a.seq, "seq")?)?;
            let n = positive(need(&a.n, "n")?, "n")?;
            let gap = a.gap;
            Box::new(move |_| {
                let cert = extract_doubling_subsequence(&seq, n, gap)?;
                Artifact::new(&cert, Status::Success)
            })
        }
        SequenceCommand::Monotone(a) => {
            let seq = parse::sequence(&need(&a.seq, "seq")?)?;
            let r = need(&a.r, "r")?;
            let s = need(&a.s, "s")?;
            let n_max = need(&a.n_max, "n-max")?;
            Box::new(move |_| {
                let report = check_rs_monotone(&seq, r, s, n_max)?;
                Artifact::new(&report, Status::check(report.holds()))
            })
        }
        SequenceCommand::Blocks(a) => {
            let k_max = positive(need(&a.k_max, "k-max")?, "k-max")?;
            let max_bits = a.max_bits.unwrap_or(MAX_MATERIALIZED_BITS);
            let scale = if a.scaled {
                BlockScale::Scaled {
                    growth: a
                        .k_exponent
                        .map_or_else(Growth::default, |k_exponent| Growth::Power { k_exponent }),
                    require_squaring: false,
                }
            } else {
                if a.k_exponent.is_some() {
                    bail!("--k-exponent only applies with --scaled");
                }
                BlockScale::Exact
            };
            Box::new(move |_| {
                let bounds = scale.boundaries(k_max, max_bits)?;
                let mut csv = String::from("k,j,end\n");
                let mut rows = Vec::new();
                for b in &bounds {
                    writeln!(csv, "{},{},{}", b.k, b.j, b.end)?;
                    rows.push(json!({ "k": b.k, "j": b.j, "end": b.end.to_string() }));
                }
                let result = json!({ "scale": scale, "boundaries": rows });
                Ok(Artifact::new(&result, Status::Success)?.with_csv(csv))
            })
        }
    })
}

struct Search {
    trials: u64,
    cap: Option<u64>,
    level: f64,
    max_targets: Option<usize>,
    hit_rule: Option<rademacher_walk::construction::HitRule>,
}

impl Search {
    fn config(&self, ctx: &Ctx) -> N0Config {
        let mut cfg = N0Config::new(self.trials, ctx.seed);
        cfg.level = self.level;
        cfg.execution = ctx.execution;
        if let Some(c) = self.cap {
            cfg.horizon_cap = c;
        }
        if let Some(m) = self.max_targets {
            cfg.max_targets = m;
        }
        if let Some(h) = self.hit_rule {
            cfg.hit_rule = h;
        }
        cfg
    }
}

fn construct_job(c: &ConstructCommand) -> Result<Job> {
    Ok(match c {
        ConstructCommand::Bezout(a) => {
            let b1 = need(&a.b_prime, "b-prime")?;
            let b2 = need(&a.b_second, "b-second")?;
            Box::new(move |_| {
                let pair = positive_bezout(b1, b2)?;
                let result = json!({ "pair": pair, "period": pair.period(),
                                     "identity_holds": pair.identity_holds() });
                Artifact::new(&result, Status::check(pair.identity_holds()))
            })
        }
        ConstructCommand::N0(a) => {
            let b1 = need(&a.b_prime, "b-prime")?;
            let b2 = need(&a.b_second, "b-second")?;
            let radius = need(&a.radius, "radius")?;
            let search = Search {
                trials: positive(need(&a.trials, "trials")?, "trials")?,
                cap: a.cap,
                level: level(a.level)?,
                max_targets: a.max_targets,
                hit_rule: a.hit_rule,
            };
            Box::new(move |ctx| {
                let pair = positive_bezout(b1, b2)?;
                let est = estimate_n0(&pair, radius, &search.config(ctx))?;
                let status = match est.status {
                    N0Status::Certified => Status::Success,
                    N0Status::Inconclusive => Status::Inconclusive,
                };
                Ok(Artifact::new(&est, status)?.seeded(ctx.seed))
            })
        }
        ConstructCommand::Build(a) => {
            let set = parse::good_set(&need(&a.set, "set")?)?;
            let rounds = need(&a.rounds, "rounds")?;
            let search = Search {
                trials: positive(need(&a.trials, "trials")?, "trials")?,
                cap: a.cap,
                level: level(a.level)?,
                max_targets: a.max_targets,
                hit_rule: a.hit_rule,
            };
            let radius = a.radius_rule.unwrap_or_default();
            let on_inconclusive = a.on_inconclusive.unwrap_or_default();
            let check_trials = a.check_trials;
            Box::new(move |ctx| {
                let cfg = BuildConfig {
                    rounds,
                    n0: search.config(ctx),
                    radius,
                    on_inconclusive,
                };
                let plan = match build_recurrent_sequence(&set, &cfg) {
                    Ok((plan, _, _)) => plan,
                    Err(ConstructionError::Inconclusive { round, estimate }) => {
                        let result = json!({ "inconclusive_round": round, "estimate": estimate });
                        return Ok(Artifact::new(&result, Status::Inconclusive)?.seeded(ctx.seed));
                    }
                    Err(e) => return Err(e.into()),
                };
                let segments = match check_trials {
                    Some(t) => Some(segment_return_fractions(
                        &plan,
                        t,
                        rademacher_walk::walk::derive_seed(ctx.seed, u64::MAX),
                        search.level,
                        ctx.execution,
                    )?),
                    None => None,
                };
                let mut csv = String::from(
                    "round,b_prime,c_prime,b_second,c_second,radius,n_start,n0,n_end,certified,worst_lower_bound\n",
                );
                for r in &plan.rounds {
                    writeln!(
                        csv,
                        "{},{},{},{},{},{},{},{},{},{},{}",
                        r.round, r.b_prime, r.c_prime, r.b_second, r.c_second, r.radius,
                        r.n_start, r.n0, r.n_end, r.certified, r.worst_lower_bound
                    )?;
                }
                let status = if plan.rounds.iter().all(|r| r.certified) {
                    Status::Success
                } else {
                    Status::Inconclusive
                };
                let result = json!({ "plan": plan, "segments": segments });
                Ok(Artifact::new(&result, status)?.seeded(ctx.seed).with_csv(csv))
            })
        }
        ConstructCommand::CheckGood(a) => {
            let set = parse::good_set(&need(&a.set, "set")?)?;
            let horizon = need(&a.horizon, "horizon")?;
            Box::new(move |_| {
                let report = check_good_set(&set, horizon);
                let mut csv = String::from("value,partners,flagged\n");
                for e in &report.entries {
                    writeln!(csv, "{},{},{}", e.value, e.partners, e.flagged)?;
                }
                let status = Status::check(report.flagged().next().is_none());
                Ok(Artifact::new(&report, status)?.with_csv(csv))
            })
        }
    })
}

fn verify_job(v: &VerifyCommand) -> Result<Job> {
    let cfg = ExactConfig::default();
    Ok(match v {
        VerifyCommand::Supermartingale(a) => {
            let radius = positive(need(&a.radius, "radius")?, "radius")?;
            Box::new(move |ctx| {
                let report = verify_supermartingale(radius, ctx.execution)?;
                Artifact::new(&report, Status::check(report.pass))
            })
        }
        VerifyCommand::Elo(a) => {
            let hw = need(&a.half_width, "half-width")?;
            if a.exhaustive {
                if hw.denom() != 1 {
                    bail!("--half-width must be an integer for --exhaustive");
                }
                let half_width = hw.numer();
                let max_len = a.max_len.unwrap_or(10);
                let max_factor = a.max_factor.unwrap_or(3);
                Box::new(move |ctx| {
                    let scan = elo_exhaustive(half_width, max_len, max_factor, ctx.execution)?;
                    Artifact::new(&scan, Status::check(scan.pass))
                })
            } else {
                let d = need(&a.d, "d")?;
                Box::new(move |_| {
                    let cmp = verify_elo(&d, hw, &cfg)?;
                    Artifact::new(&cmp, Status::check(cmp.pass))
                })
            }
        }
        VerifyCommand::Modlemma(a) => {
            let c_cap = a.c_cap.unwrap_or(DEFAULT_C_CAP);
            if let Some(ks) = a.trend.clone() {
                let from = a.monotone_from.unwrap_or(16);
                let slack = a.slack.unwrap_or(0.2);
                Box::new(move |_| {
                    let t = mod_lemma_trend(&ks, c_cap, from, slack, &cfg)?;
                    Ok(Artifact::new(&t, Status::check(t.pass))?.with_csv(trend_csv(&t.rows)))
                })
            } else {
                let d = need(&a.d, "d")?;
                let m = positive(need(&a.m, "m")?, "m")?;
                let path = a.path.unwrap_or_default();
                Box::new(move |_| {
                    let cmp = verify_mod_lemma(&d, m, path, c_cap, &cfg)?;
                    Artifact::new(&cmp, Status::check(cmp.pass))
                })
            }
        }
        VerifyCommand::Hitting(a) => {
            let r = need(&a.radius, "radius")?;
            let step = positive(a.step.unwrap_or(1), "step")?;
            let trials = positive(need(&a.trials, "trials")?, "trials")?;
            let floor = a.floor.unwrap_or(DEFAULT_FLOOR);
            let start = a.start.unwrap_or_default();
            let level = level(a.level)?;
            Box::new(move |ctx| {
                let mut mc = MonteCarloConfig::new(trials, ctx.seed).with_execution(ctx.execution);
                mc.level = level;
                let res = hitting_time_experiment(r, step, start, floor, &mc)?;
                Ok(Artifact::new(&res, Status::check(res.pass))?.seeded(ctx.seed))
            })
        }
        VerifyCommand::Suppmf(a) => {
            let k_max = positive(need(&a.k_max, "k-max")?, "k-max")?;
            let tol = a.slope_tolerance.unwrap_or(DEFAULT_SLOPE_TOLERANCE);
            Box::new(move |_| {
                let t = sup_pmf_trend(k_max, tol, &cfg)?;
                Ok(Artifact::new(&t, Status::check(t.pass))?.with_csv(trend_csv(&t.rows)))
            })
        }
    })
}

/// Renders the artifact in the requested format.
pub fn render(artifact: &Artifact, format: Format) -> Result<String> {
    match format {
        Format::Json => {
            let mut text = Report::new(artifact.seed, &artifact.result).to_json()?;
            text.push('\n');
            Ok(text)
        }
        Format::Csv => {
            let body = artifact
                .csv
                .as_ref()
                .ok_or_else(|| anyhow!("this command has no CSV form; use --format json"))?;
            let meta = RunMetadata::new(artifact.seed);
            let seed = meta.master_seed.map_or_else(|| "none".to_string(), |s| s.to_string());
            Ok(format!(
                "# {} {}\n# rng: {}\n# seed: {seed}\n{body}",
                meta.tool, meta.version, meta.rng
            ))
        }
    }
}

/// Runs the configured command and writes its report. Returns the status
/// that decides the exit code.
pub fn run(config: &RunConfig) -> Result<Status> {
    let job = prepare(config)?;
    let execution = if config.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let ctx = Ctx {
        execution,
        seed: config.seed.unwrap_or(0),
    };
    let artifact = job(&ctx)?;
    let text = render(&artifact, config.format)?;
    emit(&text, config.out.as_ref())?;
    Ok(artifact.status)
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)
            .with_context(|| format!("cannot write {}", path.display())),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}
