//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//!
//! Runs with `harness = false` so every line is printed whether or not the
//! criterion passes.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use rademacher_walk::construction::{
    build_recurrent_sequence, first_primes, segment_return_fractions, BuildConfig, HitRule,
    InconclusivePolicy, N0Config, RadiusRule,
};
use rademacher_walk::exact::{mod_probability, pmf_1d, pmf_2d, ExactConfig, ModPath};
use rademacher_walk::sequences::{extract_doubling_subsequence, StepSequence};
use rademacher_walk::stats::binomial_sigma;
use rademacher_walk::verify::{
    elo_exhaustive, hitting_time_experiment, mod_lemma_trend, verify_supermartingale, StartRule,
    DEFAULT_FLOOR,
};
use rademacher_walk::walk::{monte_carlo_return, run_trials, MonteCarloConfig, StepTable};
use rademacher_walk::{Execution, Rational};

const SEED: u64 = 20_240_601;
const EXEC: Execution = Execution::Parallel;

struct Outcome {
    pass: bool,
    detail: String,
}

fn frac(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

fn exact_oracles() -> Outcome {
    let cfg = ExactConfig::default();
    let p0 = pmf_2d(&[1, 1, 1, 1], &cfg).unwrap().mass((0, 0));

    let d = [1u64, 2, 3];
    let pmf = pmf_1d(&d, &cfg).unwrap();
    let mut counts = std::collections::BTreeMap::<i64, i64>::new();
    for signs in 0..8u32 {
        let t: i64 = d
            .iter()
            .enumerate()
            .map(|(i, &v)| if signs >> i & 1 == 1 { v as i64 } else { -(v as i64) })
            .sum();
        *counts.entry(t).or_default() += 1;
    }
    let enumerated = counts.iter().all(|(&z, &c)| pmf.mass(z) == frac(c, 8))
        && pmf.support().len() == counts.len();

    let m_res = mod_probability(&d, 3, 0, ModPath::Residue, &cfg).unwrap();
    let m_full = mod_probability(&d, 3, 0, ModPath::Full, &cfg).unwrap();
    Outcome {
        pass: p0 == frac(9, 64) && enumerated && m_res == frac(1, 2) && m_full == m_res,
        detail: format!(
            "P(S_4=0)={p0}, pmf_1d(1,2,3) matches 8-pattern enumeration: {enumerated}, \
             P(T≡0 mod 3)={m_res}"
        ),
    }
}

fn supermartingale_grid() -> Outcome {
    let r = verify_supermartingale(200, EXEC).unwrap();
    let pass = r.pass
        && r.violations.is_empty()
        && r.identity_failures.is_empty()
        && r.neighbor_relative_gap <= 1e-12
        && r.max_relative_gap <= 1e-12;
    Outcome {
        pass,
        detail: format!(
            "{} points, max Δ={:e}, violations={}, exp(4Δ) next to origin={:.15} (gap {:e}), \
             direct vs closed max gap={:e}",
            r.points,
            r.max_delta,
            r.violations.len(),
            r.neighbor_exp_4delta,
            r.neighbor_relative_gap,
            r.max_relative_gap
        ),
    }
}

fn elo_bound() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for d in [1, 2] {
        let scan = elo_exhaustive(d, 10, 3, EXEC).unwrap();
        pass &= scan.pass && scan.violations.is_empty();
        let worst = scan.worst.as_ref().map_or(0.0, |w| w.ratio);
        parts.push(format!(
            "D={d}: {} vectors, {} violations, worst sup/bound={worst:.6}",
            scan.instances,
            scan.violations.len()
        ));
    }
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn mod_lemma() -> Outcome {
    let ks = [4, 8, 16, 32, 64, 128];
    let t = mod_lemma_trend(&ks, 10.0, 16, 0.2, &ExactConfig::default()).unwrap();
    // pinned by the residue-space oracle: sup_M P(T_k ≡ M mod k) = 2/k
    let pinned = t.rows.iter().all(|r| r.sup == frac(2, r.k as i64).to_string());
    let ratios: Vec<String> = t.rows.iter().map(|r| format!("{}:{:.4}", r.k, r.ratio)).collect();
    Outcome {
        pass: t.pass && pinned,
        detail: format!(
            "ratios {} (bounded {}, non-increasing from 16 {}, pinned sups {pinned})",
            ratios.join(" "),
            t.bounded,
            t.non_increasing
        ),
    }
}

fn mc_vs_exact(exec: Execution) -> (Outcome, String) {
    let mc = MonteCarloConfig::new(100_000, SEED).with_execution(exec);
    let seq = StepSequence::constant(1).unwrap();
    let ret = monte_carlo_return(&seq, 2, (0, 0), &mc).unwrap();
    let ret_sigmas = (ret.estimate - 0.25).abs() / binomial_sigma(0.25, mc.trials);

    let hit = hitting_time_experiment(2.0, 1, StartRule::Axis, DEFAULT_FLOOR, &mc).unwrap();
    let hit_sigmas = hit.sigmas.unwrap_or(f64::INFINITY);
    let pass = ret_sigmas <= 4.0 && hit_sigmas <= 4.0 && hit.exact.as_deref() == Some("2791/16384");
    let data = serde_json::to_string(&(&ret, &hit)).unwrap();
    (
        Outcome {
            pass,
            detail: format!(
                "return: {:.5} vs 1/4 ({ret_sigmas:.2}σ); hitting r=2: {:.5} vs {} ({hit_sigmas:.2}σ)",
                ret.estimate,
                hit.estimate.estimate,
                hit.exact.as_deref().unwrap_or("-")
            ),
        },
        data,
    )
}

fn hitting_floor(exec: Execution) -> (Outcome, String) {
    let mc = MonteCarloConfig::new(10_000, SEED).with_execution(exec);
    let mut pass = true;
    let mut parts = Vec::new();
    let mut data = Vec::new();
    for r in [5.0, 10.0] {
        let res = hitting_time_experiment(r, 1, StartRule::Axis, DEFAULT_FLOOR, &mc).unwrap();
        pass &= res.estimate.interval.lower > 0.15;
        parts.push(format!(
            "r={r}: P(τ₀ ≤ {})={:.4}, Wilson lower {:.4}",
            res.horizon, res.estimate.estimate, res.estimate.interval.lower
        ));
        data.push(res);
    }
    (
        Outcome {
            pass,
            detail: parts.join("; "),
        },
        serde_json::to_string(&data).unwrap(),
    )
}

fn recurrent_construction(exec: Execution) -> (Outcome, String) {
    let mut n0 = N0Config::new(2000, SEED);
    n0.horizon_cap = 1 << 17;
    n0.hit_rule = HitRule::AnyStep;
    n0.execution = exec;
    let cfg = BuildConfig {
        rounds: 3,
        n0,
        radius: RadiusRule::Coarse,
        on_inconclusive: InconclusivePolicy::UseCap,
    };
    let (plan, _, _) = build_recurrent_sequence(&first_primes(10), &cfg).unwrap();
    let segments = segment_return_fractions(&plan, 1000, SEED + 1, 0.95, exec).unwrap();
    let certified = plan.rounds.iter().all(|r| r.certified);
    let returns = segments.iter().all(|s| s.interval.lower >= 0.40);
    let parts: Vec<String> = plan
        .rounds
        .iter()
        .zip(&segments)
        .map(|(r, s)| {
            format!(
                "round {} ({},{}) C={} N0={} certified={} worst lower {:.3}, segment return {:.3} \
                 (Wilson lower {:.3})",
                r.round,
                r.b_prime,
                r.b_second,
                r.radius,
                r.n0,
                r.certified,
                r.worst_lower_bound,
                s.fraction,
                s.interval.lower
            )
        })
        .collect();
    (
        Outcome {
            pass: certified && returns,
            detail: parts.join("; "),
        },
        serde_json::to_string(&(&plan, &segments)).unwrap(),
    )
}

fn doubling() -> Outcome {
    let seq = StepSequence::floor_power(Rational::integer(1)).unwrap();
    let c16 = extract_doubling_subsequence(&seq, 16, None).unwrap();
    let c1024 = extract_doubling_subsequence(&seq, 1024, None).unwrap();
    let exact = (1..=10u64).all(|j| {
        let c = extract_doubling_subsequence(&seq, 1 << j, None).unwrap();
        c.exact_ratio == Some(Rational::new(j + 1, j))
    });
    let pass = c16.indices == [1, 2, 4, 8, 16] && c1024.len() == 11 && exact;
    Outcome {
        pass,
        detail: format!(
            "n=16 indices {:?}; n=1024 K={}; K/log2 n = 1 + 1/log2 n on 2^1..2^10: {exact}",
            c16.indices,
            c1024.len()
        ),
    }
}

fn transience_signal() -> Outcome {
    const LEN: u64 = 100_000;
    const AFTER: u64 = 1_000;
    let seq = StepSequence::floor_power(Rational::integer(1)).unwrap();
    let table = StepTable::from_sequence(&seq, LEN).unwrap();
    let sizes = table.narrow().unwrap();
    let mc = MonteCarloConfig::new(1000, SEED).with_execution(EXEC);
    let est = run_trials(&mc, |s| {
        let (mut x, mut y) = (0i64, 0i64);
        for (i, &a) in sizes.iter().enumerate() {
            let (dx, dy) = s.sample_step().unit();
            x += dx * a;
            y += dy * a;
            if x == 0 && y == 0 && i as u64 + 1 > AFTER {
                return Ok(true);
            }
        }
        Ok(false)
    })
    .unwrap();
    Outcome {
        pass: est.successes * 20 <= est.trials,
        detail: format!(
            "{} of {} walks of length {LEN} visit 0 after step {AFTER} ({:.1}%)",
            est.successes,
            est.trials,
            100.0 * est.estimate
        ),
    }
}

#[cfg(feature = "parallel")]
fn with_threads<T: Send>(n: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .unwrap()
        .install(f)
}

#[cfg(not(feature = "parallel"))]
fn with_threads<T: Send>(_: usize, f: impl FnOnce() -> T + Send) -> T {
    f()
}

fn determinism(reference: &[String; 3]) -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for threads in [1, 4] {
        let runs = with_threads(threads, || {
            [
                mc_vs_exact(Execution::Parallel).1,
                hitting_floor(Execution::Parallel).1,
                recurrent_construction(Execution::Parallel).1,
            ]
        });
        let same: Vec<bool> = runs.iter().zip(reference).map(|(a, b)| a == b).collect();
        pass &= same.iter().all(|&s| s);
        parts.push(format!("{threads} thread(s): criteria 5/6/7 identical {same:?}"));
    }
    let sequential = mc_vs_exact(Execution::Sequential).1 == reference[0];
    pass &= sequential;
    parts.push(format!("sequential criterion 5 identical {sequential}"));
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn main() {
    let mut results: Vec<(u32, bool)> = Vec::new();
    let mut record = |id, name: &str, limit: Duration, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let mut outcome = f();
        let took = start.elapsed();
        if took > limit {
            outcome.pass = false;
        }
        let tag = if outcome.pass { "PASS" } else { "FAIL" };
        println!(
            "[{tag}] {id:>2} {name} ({:.2}s, limit {}s): {}",
            took.as_secs_f64(),
            limit.as_secs(),
            outcome.detail
        );
        results.push((id, outcome.pass));
    };
    let secs = Duration::from_secs;
    let mut data: [String; 3] = Default::default();

    record(1, "exact oracles", secs(1), &mut exact_oracles);
    record(2, "supermartingale grid", secs(10), &mut supermartingale_grid);
    record(3, "ELO bound, exhaustive", secs(120), &mut elo_bound);
    record(4, "mod-lemma trend", secs(60), &mut mod_lemma);
    record(5, "MC vs exact", secs(60), &mut || {
        let (o, d) = mc_vs_exact(EXEC);
        data[0] = d;
        o
    });
    record(6, "hitting-time floor", secs(120), &mut || {
        let (o, d) = hitting_floor(EXEC);
        data[1] = d;
        o
    });
    record(7, "recurrent construction", secs(600), &mut || {
        let (o, d) = recurrent_construction(EXEC);
        data[2] = d;
        o
    });
    record(8, "doubling extraction", secs(1), &mut doubling);
    record(9, "transience signal", secs(600), &mut transience_signal);
    let reference = data.clone();
    record(10, "determinism across worker counts", secs(1800), &mut || determinism(&reference));

    let failed: Vec<u32> = results.iter().filter(|r| !r.1).map(|r| r.0).collect();
    println!(
        "acceptance: {} of {} criteria passed",
        results.len() - failed.len(),
        results.len()
    );
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
