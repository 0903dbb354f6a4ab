use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Serialize;
use serde_json::json;

use super::VerifyError;
use crate::exact::{
    hoeffding_tail, max_interval_probability, sup_mod_probability, sup_pmf, ExactConfig, ModPath,
};
use crate::{Execution, Rational};

/// Default cap on the measured mod-lemma constant `sup · k / log k`.
pub const DEFAULT_C_CAP: f64 = 10.0;

/// Default tolerance on the least-squares slope of the sup-pmf trend.
pub const DEFAULT_SLOPE_TOLERANCE: f64 = 0.1;

/// An exact quantity set against the bound it should satisfy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundComparison {
    pub check: String,
    pub parameters: serde_json::Value,
    /// Exact value as a fraction, when available.
    pub exact: Option<String>,
    pub exact_value: f64,
    pub bound: f64,
    /// `bound − exact_value`.
    pub slack: f64,
    pub pass: bool,
}

fn ratio_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `0.8 / √m`.
pub fn elo_bound(m: usize) -> f64 {
    0.8 / (m as f64).sqrt()
}

/// `p/q ≤ 0.8/√m` decided exactly as `25 p² m ≤ 16 q²`.
pub fn within_elo(sup: &BigRational, m: usize) -> bool {
    let p = sup.numer();
    let q = sup.denom();
    BigInt::from(25u32) * p * p * BigInt::from(m) <= BigInt::from(16u32) * q * q
}

/// Exact `sup_x P(T_m ∈ (x − D, x + D])` against `0.8/√m`.
pub fn verify_elo(
    d: &[u64],
    half_width: Rational,
    config: &ExactConfig,
) -> Result<BoundComparison, VerifyError> {
    if d.is_empty() {
        return Err(VerifyError::InvalidParameter("need at least one step".into()));
    }
    let max = max_interval_probability(d, half_width, config)?;
    let value = ratio_f64(&max.sup);
    let bound = elo_bound(d.len());
    Ok(BoundComparison {
        check: "elo".into(),
        parameters: json!({ "d": d, "D": half_width.to_string(), "m": d.len(),
                            "argmax": max.argmax.to_string() }),
        exact: Some(max.sup.to_string()),
        exact_value: value,
        bound,
        slack: bound - value,
        pass: within_elo(&max.sup, d.len()),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EloInstance {
    pub d: Vec<u64>,
    /// Largest window count out of `2^m` sign patterns.
    pub count: u64,
    /// `sup · √m / 0.8`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EloScan {
    pub half_width: u64,
    pub max_len: usize,
    pub max_factor: u64,
    pub instances: u64,
    pub violations: Vec<EloInstance>,
    pub worst: Option<EloInstance>,
    pub pass: bool,
}

struct ScanState {
    dist: Vec<u64>,
    centre: usize,
    instances: u64,
    violations: Vec<EloInstance>,
    worst: Option<EloInstance>,
}

/// Every non-decreasing `d` of length `1..=max_len` with entries in
/// `D..=max_factor·D`. Sign-pattern counts are extended one step at a time
/// along the enumeration tree, so each instance costs one convolution step.
pub fn elo_exhaustive(
    half_width: u64,
    max_len: usize,
    max_factor: u64,
    execution: Execution,
) -> Result<EloScan, VerifyError> {
    if half_width == 0 || max_factor == 0 || max_len == 0 {
        return Err(VerifyError::InvalidParameter(
            "half-width, length and factor must all be >= 1".into(),
        ));
    }
    if max_len > 62 {
        return Err(VerifyError::InvalidParameter("length is limited to 62".into()));
    }
    let values: Vec<u64> = (half_width..=max_factor * half_width).collect();
    let reach = max_len as u64 * max_factor * half_width;
    let width = usize::try_from(2 * reach + 1)
        .map_err(|_| VerifyError::Range("support too wide".into()))?;
    let firsts: Vec<usize> = (0..values.len()).collect();
    let parts = execution.map_slice(&firsts, |&i| {
        let mut state = ScanState {
            dist: vec![0; width],
            centre: reach as usize,
            instances: 0,
            violations: Vec::new(),
            worst: None,
        };
        state.dist[state.centre] = 1;
        let mut d = Vec::with_capacity(max_len);
        descend(&mut state, &values, i, &mut d, half_width, max_len);
        state
    });
    let mut scan = EloScan {
        half_width,
        max_len,
        max_factor,
        instances: 0,
        violations: Vec::new(),
        worst: None,
        pass: false,
    };
    for part in parts {
        scan.instances += part.instances;
        scan.violations.extend(part.violations);
        if let Some(w) = part.worst {
            if scan.worst.as_ref().is_none_or(|b| w.ratio > b.ratio) {
                scan.worst = Some(w);
            }
        }
    }
    scan.pass = scan.violations.is_empty();
    Ok(scan)
}

fn descend(
    state: &mut ScanState,
    values: &[u64],
    index: usize,
    d: &mut Vec<u64>,
    half_width: u64,
    max_len: usize,
) {
    let step = values[index] as usize;
    let saved = state.dist.clone();
    let reach: usize = d.iter().sum::<u64>() as usize;
    let c = state.centre;
    let mut next = vec![0u64; state.dist.len()];
    for z in c - reach..=c + reach {
        let v = state.dist[z];
        if v != 0 {
            next[z + step] += v;
            next[z - step] += v;
        }
    }
    state.dist = next;
    d.push(values[index]);
    record(state, d, half_width);
    if d.len() < max_len {
        for j in index..values.len() {
            descend(state, values, j, d, half_width, max_len);
        }
    }
    d.pop();
    state.dist = saved;
}

fn record(state: &mut ScanState, d: &[u64], half_width: u64) {
    let m = d.len();
    let reach: usize = d.iter().sum::<u64>() as usize;
    let c = state.centre;
    let lo = c - reach;
    let hi = c + reach;
    // (x − D, x + D] holds 2D consecutive integers
    let w = 2 * half_width as usize;
    let mut window: u64 = 0;
    let mut best = 0;
    for z in lo..=hi {
        window += state.dist[z];
        if z >= lo + w {
            window -= state.dist[z - w];
        }
        best = best.max(window);
    }
    state.instances += 1;
    let ratio = best as f64 / 2f64.powi(m as i32) / elo_bound(m);
    let exact_ok = 25 * (best as u128).pow(2) * m as u128 <= 16 * (1u128 << (2 * m));
    let inst = || EloInstance {
        d: d.to_vec(),
        count: best,
        ratio,
    };
    if !exact_ok {
        state.violations.push(inst());
    }
    if state.worst.as_ref().is_none_or(|b| ratio > b.ratio) {
        state.worst = Some(inst());
    }
}

/// Number of distinct entries of `d`.
fn distinct(d: &[u64]) -> usize {
    let mut v = d.to_vec();
    v.sort_unstable();
    v.dedup();
    v.len()
}

/// `sup_M P(T ≡ M mod m)` against `C_cap · log k / k`, `k` the number of
/// distinct entries.
pub fn verify_mod_lemma(
    d: &[u64],
    m: u64,
    path: ModPath,
    c_cap: f64,
    config: &ExactConfig,
) -> Result<BoundComparison, VerifyError> {
    let Some(&max) = d.iter().max() else {
        return Err(VerifyError::InvalidParameter("need at least one step".into()));
    };
    if m < max {
        return Err(VerifyError::Precondition(format!(
            "modulus {m} is below the largest step {max}"
        )));
    }
    let k = distinct(d);
    let (sup, residue) = sup_mod_probability(d, m, path, config)?;
    let value = ratio_f64(&sup);
    let (bound, constant) = if k >= 2 {
        let lk = (k as f64).ln();
        (c_cap * lk / k as f64, Some(value * k as f64 / lk))
    } else {
        (0.0, None)
    };
    Ok(BoundComparison {
        check: "mod-lemma".into(),
        parameters: json!({ "k": k, "m": m, "len": d.len(), "argmax_residue": residue,
                            "c_cap": c_cap, "measured_constant": constant }),
        exact: Some(sup.to_string()),
        exact_value: value,
        bound,
        slack: bound - value,
        pass: constant.is_some_and(|c| c <= c_cap),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendRow {
    pub k: u64,
    pub sup: String,
    pub sup_value: f64,
    /// The scaled quantity whose boundedness is being checked.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModLemmaTrend {
    pub rows: Vec<TrendRow>,
    pub c_cap: f64,
    /// Rows from this `k` on must not grow by more than `slack`.
    pub monotone_from: u64,
    pub slack: f64,
    pub bounded: bool,
    pub non_increasing: bool,
    pub pass: bool,
}

/// `sup_M P(T_k ≡ M mod k) · k / log k` for `d = (1, …, k)`.
pub fn mod_lemma_trend(
    ks: &[u64],
    c_cap: f64,
    monotone_from: u64,
    slack: f64,
    config: &ExactConfig,
) -> Result<ModLemmaTrend, VerifyError> {
    let mut rows = Vec::with_capacity(ks.len());
    for &k in ks {
        if k < 2 {
            return Err(VerifyError::InvalidParameter("trend needs k >= 2".into()));
        }
        let d: Vec<u64> = (1..=k).collect();
        let (sup, _) = sup_mod_probability(&d, k, ModPath::Residue, config)?;
        let v = ratio_f64(&sup);
        rows.push(TrendRow {
            k,
            sup: sup.to_string(),
            sup_value: v,
            ratio: v * k as f64 / (k as f64).ln(),
        });
    }
    let bounded = rows.iter().all(|r| r.ratio <= c_cap);
    let tail: Vec<&TrendRow> = rows.iter().filter(|r| r.k >= monotone_from).collect();
    let non_increasing = tail.windows(2).all(|w| w[1].ratio <= w[0].ratio * (1.0 + slack));
    Ok(ModLemmaTrend {
        rows,
        c_cap,
        monotone_from,
        slack,
        bounded,
        non_increasing,
        pass: bounded && non_increasing,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupPmfTrend {
    pub rows: Vec<TrendRow>,
    /// Least-squares slope of the ratio against `ln k` over the upper half.
    pub slope: f64,
    pub slope_tolerance: f64,
    pub pass: bool,
}

/// `sup_z P(T_k = z) · k^{3/2}` for `d = (1, …, k)`, `k = 1..=k_max`.
pub fn sup_pmf_trend(
    k_max: u64,
    slope_tolerance: f64,
    config: &ExactConfig,
) -> Result<SupPmfTrend, VerifyError> {
    if k_max == 0 {
        return Err(VerifyError::InvalidParameter("k_max must be >= 1".into()));
    }
    let mut rows = Vec::with_capacity(k_max as usize);
    for k in 1..=k_max {
        let d: Vec<u64> = (1..=k).collect();
        let sup = sup_pmf(&d, config)?;
        let v = ratio_f64(&sup);
        rows.push(TrendRow {
            k,
            sup: sup.to_string(),
            sup_value: v,
            ratio: v * (k as f64).powf(1.5),
        });
    }
    let upper: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| 2 * r.k > k_max)
        .map(|r| ((r.k as f64).ln(), r.ratio))
        .collect();
    let slope = least_squares_slope(&upper);
    Ok(SupPmfTrend {
        rows,
        slope,
        slope_tolerance,
        pass: slope <= slope_tolerance,
    })
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    if points.len() < 2 {
        return 0.0;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Exact two-sided tail `P(|T| ≥ t)` against `2 exp(−t² / (2 Σ d_i²))`.
pub fn verify_hoeffding(
    d: &[u64],
    threshold: f64,
    config: &ExactConfig,
) -> Result<BoundComparison, VerifyError> {
    let h = hoeffding_tail(d, threshold, config)?;
    let exact_value = h.exact.as_ref().map_or(f64::NAN, ratio_f64);
    Ok(BoundComparison {
        check: "hoeffding".into(),
        parameters: json!({ "d": d, "t": threshold }),
        exact: h.exact.as_ref().map(|r| r.to_string()),
        exact_value,
        bound: h.reported_bound,
        slack: h.reported_bound - exact_value,
        pass: h.exact.is_some() && exact_value <= h.bound,
    })
}

/// Rows as `k,sup,ratio` CSV.
pub fn trend_csv(rows: &[TrendRow]) -> String {
    let mut out = String::from("k,sup,sup_value,ratio\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{}\n", r.k, r.sup, r.sup_value, r.ratio));
    }
    out
}
