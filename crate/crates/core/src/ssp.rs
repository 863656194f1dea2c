//! Finite-horizon tests of the sequence selection property.
//!
//! Sequence tests look at a statistic `s_m` (the ratio excess `|ρ_m − 1|` or
//! the relative midpoint gap) on two nested windows below the horizon `h`:
//! `W1 = (h/γ, h]` and `W0 = (h/γ², h/γ]` with `γ = h / window`. With `S0`,
//! `S1` the window maxima, the statistic is *decaying* when
//! `S1 ≤ S0 · γ^{-1/4}`.
//!
//! * violated: `S0` and `S1` both reach the violation threshold and are not
//!   decaying (large values persist across scales);
//! * satisfied (direct): the max over the last `window` indices is `≤ tol`;
//! * satisfied (trend): otherwise, if the maxima are decaying;
//! * inconclusive: anything else.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::germ::{DirectionSet, GermOracle, ScaleSchedule};
use crate::linalg::{ls_slope, scale};
use crate::sequence::SequenceGerm;

/// Slack on `ln a_m ≥ −k ln m` in the polynomial-boundedness test.
pub const PB_SLACK: f64 = 1e-12;
/// Default ratio-test tolerance.
pub const RATIO_TOL: f64 = 1e-2;
/// Default distance-test tolerance.
pub const DISTANCE_TOL: f64 = 5e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Satisfied,
    Violated,
    Inconclusive,
}

/// Which rule produced a sequence verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    Direct,
    Trend,
    Persistent,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    /// Index `m` or scale `t_k`.
    pub at: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SspVerdict {
    pub verdict: Verdict,
    pub basis: Basis,
    pub tol: f64,
    pub evidence: Vec<Evidence>,
}

impl SspVerdict {
    pub fn is_satisfied(&self) -> bool {
        self.verdict == Verdict::Satisfied
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowStats {
    pub gamma: f64,
    /// Max over `(h/γ², h/γ]`.
    pub s0: f64,
    /// Max over `(h/γ, h]`.
    pub s1: f64,
    /// Max over the last `window` indices.
    pub last: f64,
    pub decaying: bool,
}

fn window_max(stat: &[f64], lo: u64, hi: u64) -> (u64, f64) {
    let mut best = (hi, f64::NEG_INFINITY);
    for m in (lo + 1)..=hi {
        let v = stat[m as usize - 1];
        if v > best.1 {
            best = (m, v);
        }
    }
    best
}

/// Log-spaced indices up to `h`, about 20 per decade.
fn log_indices(h: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut k = 0;
    loop {
        let m = 10f64.powf(k as f64 / 20.0).round() as u64;
        if m > h {
            break;
        }
        if out.last() != Some(&m) {
            out.push(m);
        }
        k += 1;
    }
    if out.last() != Some(&h) {
        out.push(h);
    }
    out
}

/// Applies the windowed classifier to `stat[m-1] = s_m`, `m = 1..=h`.
pub fn classify(stat: &[f64], window: u64, tol: f64, violation: f64) -> (Verdict, Basis, WindowStats, Vec<Evidence>) {
    let h = stat.len() as u64;
    let gamma = h as f64 / window as f64;
    let b1 = (h as f64 / gamma).floor() as u64;
    let b0 = (h as f64 / (gamma * gamma)).floor() as u64;
    let (m1, s1) = window_max(stat, b1, h);
    let (m0, s0) = window_max(stat, b0, b1);
    let (ml, last) = window_max(stat, h - window, h);
    let decaying = s1 <= s0 * gamma.powf(-0.25);
    let (verdict, basis) = if s0 >= violation && s1 >= violation && !decaying {
        (Verdict::Violated, Basis::Persistent)
    } else if last <= tol {
        (Verdict::Satisfied, Basis::Direct)
    } else if decaying {
        (Verdict::Satisfied, Basis::Trend)
    } else {
        (Verdict::Inconclusive, Basis::Undetermined)
    };
    let mut idx = log_indices(h);
    idx.extend([m0, m1, ml]);
    idx.sort_unstable();
    idx.dedup();
    let evidence = idx
        .into_iter()
        .map(|m| Evidence { at: m as f64, value: stat[m as usize - 1] })
        .collect();
    (verdict, basis, WindowStats { gamma, s0, s1, last, decaying }, evidence)
}

fn check_horizon(a: &SequenceGerm, horizon: u64) -> Result<()> {
    if horizon + 1 > a.max_index() {
        return Err(Error::SequenceExhausted(a.max_index() as usize));
    }
    a.check_monotone(horizon + 1)
}

/// `|ρ_m − 1|` for `m = 1..=horizon`.
pub fn ratio_excess(a: &SequenceGerm, horizon: u64) -> Result<Vec<f64>> {
    (1..=horizon).map(|m| Ok((a.ratio(m)? - 1.0).abs())).collect()
}

/// Relative midpoint gap `(a_m − a_{m+1})/(a_m + a_{m+1})`, from log terms.
pub fn midpoint_gaps(a: &SequenceGerm, horizon: u64) -> Result<Vec<f64>> {
    (1..=horizon)
        .map(|m| Ok(((a.ln_term(m)? - a.ln_term(m + 1)?) / 2.0).tanh()))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceReport {
    pub result: SspVerdict,
    pub horizon: u64,
    pub window: u64,
    pub stats: WindowStats,
}

/// Ratio criterion `a_m / a_{m+1} → 1`; violation threshold `10·tol`.
pub fn ssp_ratio_test(a: &SequenceGerm, horizon: u64, tol: f64, window: u64) -> Result<SequenceReport> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tol must be > 0, got {tol}")));
    }
    if window == 0 || horizon < 2 * window {
        return Err(Error::InvalidParameter(format!("need horizon >= 2·window >= 2, got {horizon}, {window}")));
    }
    check_horizon(a, horizon)?;
    let stat = ratio_excess(a, horizon)?;
    let (verdict, basis, stats, evidence) = classify(&stat, window, tol, 10.0 * tol);
    Ok(SequenceReport { result: SspVerdict { verdict, basis, tol, evidence }, horizon, window, stats })
}

/// Direct check with midpoint probes; violation threshold `tol`; window
/// `horizon/10`.
pub fn ssp_definition_oracle(a: &SequenceGerm, horizon: u64, tol: f64) -> Result<SequenceReport> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tol must be > 0, got {tol}")));
    }
    if horizon < 4 {
        return Err(Error::InvalidParameter(format!("horizon must be >= 4, got {horizon}")));
    }
    check_horizon(a, horizon)?;
    let window = (horizon / 10).max(1);
    let stat = midpoint_gaps(a, horizon)?;
    let (verdict, basis, stats, evidence) = classify(&stat, window, tol, tol);
    Ok(SequenceReport { result: SspVerdict { verdict, basis, tol, evidence }, horizon, window, stats })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PbReport {
    pub bounded: bool,
    pub witness: Option<u32>,
    pub k_max: u32,
    pub horizon: u64,
    /// First `m` with `a_m < 1/m^k`, for each rejected `k`.
    pub failures: Vec<(u32, u64)>,
    /// Always true: the check covers `2 ≤ m ≤ horizon` only.
    pub finite_horizon: bool,
}

/// Smallest `k ≤ k_max` with `a_m ≥ 1/m^k` on `2 ≤ m ≤ horizon`.
pub fn polynomial_boundedness_test(a: &SequenceGerm, k_max: u32, horizon: u64) -> Result<PbReport> {
    if k_max < 1 || horizon < 2 {
        return Err(Error::InvalidParameter(format!("need k_max >= 1 and horizon >= 2, got {k_max}, {horizon}")));
    }
    if horizon > a.max_index() {
        return Err(Error::SequenceExhausted(a.max_index() as usize));
    }
    let ln_a: Vec<f64> = (2..=horizon).map(|m| a.ln_term(m)).collect::<Result<_>>()?;
    let mut failures = Vec::new();
    let mut witness = None;
    for k in 1..=k_max {
        let first_bad = (2..=horizon)
            .zip(&ln_a)
            .find(|(m, la)| **la < -(k as f64) * (*m as f64).ln() - PB_SLACK)
            .map(|(m, _)| m);
        match first_bad {
            Some(m) => failures.push((k, m)),
            None => {
                witness = Some(k);
                break;
            }
        }
    }
    Ok(PbReport { bounded: witness.is_some(), witness, k_max, horizon, failures, finite_horizon: true })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepEvidence {
    pub rep: Vec<f64>,
    pub verdict: Verdict,
    pub max_q: f64,
    pub slope: f64,
    /// `(t_k, q_k)` over the whole schedule.
    pub curve: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceReport {
    /// Evidence is the curve of the worst representative.
    pub result: SspVerdict,
    pub per_rep: Vec<RepEvidence>,
    /// Allowed least-squares slope of `q_k` against `k`.
    pub trend_slack: f64,
}

/// Distance criterion `dist(t a, A) = o(t)` along each representative.
///
/// Per representative, over the finest `⌈depth/2⌉` scales: satisfied when
/// `max q_k ≤ tol` and the slope of `q_k` in `k` is at most `tol/100`;
/// violated when `max q_k ≥ 10·tol`.
pub fn ssp_distance_test(g: &dyn GermOracle, d: &DirectionSet, s: &ScaleSchedule, tol: f64) -> Result<DistanceReport> {
    if d.is_empty() {
        return Err(Error::Empty("direction set"));
    }
    if d.dim() != g.dim() {
        return Err(Error::DimensionMismatch { expected: g.dim(), got: d.dim() });
    }
    if s.depth() < 8 {
        return Err(Error::InvalidParameter(format!("schedule depth must be >= 8, got {}", s.depth())));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tol must be > 0, got {tol}")));
    }
    let trend_slack = tol / 100.0;
    let start = s.fine_start();
    let mut per_rep = Vec::with_capacity(d.len());
    for a in d.reps() {
        let curve: Vec<(f64, f64)> = s
            .scales()
            .into_iter()
            .map(|t| (t, g.distance(&scale(a.as_slice(), t)) / t))
            .collect();
        let tail = &curve[start..];
        let max_q = tail.iter().map(|c| c.1).fold(0.0, f64::max);
        let ks: Vec<f64> = (start..curve.len()).map(|k| k as f64).collect();
        let qs: Vec<f64> = tail.iter().map(|c| c.1).collect();
        let slope = ls_slope(&ks, &qs);
        let verdict = if max_q >= 10.0 * tol {
            Verdict::Violated
        } else if max_q <= tol && slope <= trend_slack {
            Verdict::Satisfied
        } else {
            Verdict::Inconclusive
        };
        per_rep.push(RepEvidence { rep: a.as_slice().to_vec(), verdict, max_q, slope, curve });
    }
    let verdict = if per_rep.iter().any(|r| r.verdict == Verdict::Violated) {
        Verdict::Violated
    } else if per_rep.iter().all(|r| r.verdict == Verdict::Satisfied) {
        Verdict::Satisfied
    } else {
        Verdict::Inconclusive
    };
    let worst = per_rep
        .iter()
        .enumerate()
        .fold(0, |b, (i, r)| if r.max_q > per_rep[b].max_q { i } else { b });
    let evidence = per_rep[worst].curve.iter().map(|&(at, value)| Evidence { at, value }).collect();
    let basis = match verdict {
        Verdict::Violated => Basis::Persistent,
        Verdict::Satisfied => Basis::Direct,
        Verdict::Inconclusive => Basis::Undetermined,
    };
    Ok(DistanceReport { result: SspVerdict { verdict, basis, tol, evidence }, per_rep, trend_slack })
}
