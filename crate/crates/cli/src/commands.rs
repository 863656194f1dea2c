//! Subcommand arguments and their analyses.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use germlab::direction::{cone_dimension, default_resolutions, estimate_direction_set};
use germlab::examples::{gen_sequence, SequenceFamily};
use germlab::lipschitz::{default_grid, empirical_constant, pseudo_derivative, whitney_extend, ExtensionSpec};
use germlab::map::ExtensionMode;
use germlab::sequence::SequenceGerm;
use germlab::ssp::{
    midpoint_gaps, polynomial_boundedness_test, ratio_excess, ssp_definition_oracle, ssp_distance_test, ssp_ratio_test,
    DistanceReport, Verdict, RATIO_TOL,
};
use germlab::transversality::{
    check_cone_invariance, check_dimension_equality, check_weak_transversality_preservation, transversality_summary,
    HarnessConfig, HarnessReport,
};
use germlab::{DirectionSet, MapDescriptor, ScaleSchedule};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::inputs::{load_germ, load_json};
use crate::report::{num, Artifacts, Table};
use crate::svg::{direction_plot, line_chart, Series};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
    Inconclusive,
}

impl Outcome {
    pub fn code(self) -> u8 {
        match self {
            Outcome::Pass => 0,
            Outcome::Fail => 1,
            Outcome::Inconclusive => 2,
        }
    }

    pub fn from_verdict(v: Verdict) -> Self {
        match v {
            Verdict::Satisfied => Outcome::Pass,
            Verdict::Violated => Outcome::Fail,
            Verdict::Inconclusive => Outcome::Inconclusive,
        }
    }

    pub fn from_pass(p: Option<bool>) -> Self {
        match p {
            Some(true) => Outcome::Pass,
            Some(false) => Outcome::Fail,
            None => Outcome::Inconclusive,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Outcome::Pass => "pass",
            Outcome::Fail => "fail",
            Outcome::Inconclusive => "inconclusive",
        }
    }
}

pub type Run = (Outcome, Artifacts);

/// Flags shared by every analysis subcommand.
#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct Common {
    /// Report directory (report.json, evidence.csv, plots/); stdout gets the
    /// report JSON when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON object whose keys mirror the long flags; flags win.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<PathBuf>,
}

// ---- ssp-seq ----

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct SspSeqArgs {
    /// harmonic | log_ratio | power_sqrt | geometric | pb_not_ssp
    #[arg(long, conflicts_with = "file")]
    pub family: Option<String>,
    /// Sequence JSON: {"prefix": [...], "rule": {"name": ..., "params": ...}}
    #[arg(long)]
    pub file: Option<PathBuf>,
    /// Ratio of the geometric family.
    #[arg(long)]
    pub q: Option<f64>,
    /// Number of blocks of pb_not_ssp.
    #[arg(long)]
    pub i_max: Option<u32>,
    #[arg(long)]
    pub horizon: Option<u64>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Defaults to horizon/10.
    #[arg(long)]
    pub window: Option<u64>,
    /// Largest exponent tried by the polynomial-boundedness check.
    #[arg(long)]
    pub k_max: Option<u32>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

fn sequence_from(a: &SspSeqArgs) -> Result<(String, SequenceGerm)> {
    match (&a.family, &a.file) {
        (Some(name), None) => {
            let mut fam = SequenceFamily::from_name(name)?;
            match &mut fam {
                SequenceFamily::Geometric { q } => *q = a.q.unwrap_or(*q),
                SequenceFamily::PbNotSsp { i_max } => *i_max = a.i_max.unwrap_or(*i_max),
                _ => {
                    if a.q.is_some() || a.i_max.is_some() {
                        bail!("--q/--i-max do not apply to family '{name}'");
                    }
                }
            }
            Ok((name.clone(), gen_sequence(&fam)?))
        }
        (None, Some(path)) => Ok((path.display().to_string(), load_json(path)?)),
        _ => bail!("give exactly one of --family or --file"),
    }
}

pub fn ssp_seq(a: &SspSeqArgs) -> Result<Run> {
    let (name, seq) = sequence_from(a)?;
    let horizon = a.horizon.unwrap_or(10_000);
    let tol = a.tol.unwrap_or(RATIO_TOL);
    let window = a.window.unwrap_or((horizon / 10).max(1));
    let ratio = ssp_ratio_test(&seq, horizon, tol, window)?;
    let oracle = ssp_definition_oracle(&seq, horizon, tol)?;
    let pb = polynomial_boundedness_test(&seq, a.k_max.unwrap_or(8), horizon)?;
    let agree = ratio.result.verdict == oracle.result.verdict;
    let outcome = if agree { Outcome::from_verdict(ratio.result.verdict) } else { Outcome::Inconclusive };
    let mut art = Artifacts::new(&json!({
        "command": "ssp-seq",
        "sequence": name,
        "definition": seq,
        "horizon": horizon,
        "tol": tol,
        "window": window,
        "ratio_test": ratio,
        "definition_oracle": oracle,
        "polynomially_bounded": pb,
        "tests_agree": agree,
        "outcome": outcome.name(),
    }))?;
    let excess = ratio_excess(&seq, horizon)?;
    let gaps = midpoint_gaps(&seq, horizon)?;
    let mut t = Table::new(&["m", "ratio_minus_1", "midpoint_gap"]);
    for (i, (e, g)) in excess.iter().zip(&gaps).enumerate() {
        t.push([(i + 1).to_string(), num(*e), num(*g)]);
    }
    art.evidence = t;
    let curve = |v: &[f64]| v.iter().enumerate().map(|(i, y)| ((i + 1) as f64, *y)).collect();
    art.plots.push((
        "ratio_curve".into(),
        line_chart(
            &format!("{name}: a_m/a_(m+1) - 1 and midpoint gap"),
            "m",
            "excess",
            &[Series { label: "ratio - 1", points: curve(&excess) }, Series { label: "midpoint gap", points: curve(&gaps) }],
            true,
            true,
        ),
    ));
    Ok((outcome, art))
}

// ---- germ-based commands ----

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct Harness {
    /// Scale schedule JSON {"t0":..,"r":..,"depth":..}; default (1, 1/2, 30).
    #[arg(long)]
    pub schedule: Option<PathBuf>,
    /// Direction-net resolution.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Tolerance of the distance test.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub hausdorff_tol: Option<f64>,
    #[arg(long)]
    pub dphi_tol: Option<f64>,
    #[arg(long)]
    pub dphi_budget: Option<u32>,
}

impl Harness {
    fn config(&self) -> Result<HarnessConfig> {
        let d = HarnessConfig::default();
        Ok(HarnessConfig {
            schedule: match &self.schedule {
                Some(p) => load_json(p)?,
                None => d.schedule,
            },
            eps: self.eps.unwrap_or(d.eps),
            ssp_tol: self.tol.unwrap_or(d.ssp_tol),
            hausdorff_tol: self.hausdorff_tol.unwrap_or(d.hausdorff_tol),
            dphi_tol: self.dphi_tol.unwrap_or(d.dphi_tol),
            dphi_budget: self.dphi_budget.unwrap_or(d.dphi_budget),
        })
    }
}

pub fn distance_evidence(label: &str, r: &DistanceReport, t: &mut Table) {
    for (i, rep) in r.per_rep.iter().enumerate() {
        for (k, (s, q)) in rep.curve.iter().enumerate() {
            t.push([label.to_string(), i.to_string(), k.to_string(), num(*s), num(*q)]);
        }
    }
}

pub fn distance_table() -> Table {
    Table::new(&["germ", "rep", "k", "t", "q"])
}

pub fn q_plot(title: &str, r: &DistanceReport) -> String {
    let labels: Vec<String> = (0..r.per_rep.len()).map(|i| format!("rep {i}")).collect();
    let series: Vec<Series> = r
        .per_rep
        .iter()
        .zip(&labels)
        .take(6)
        .map(|(rep, l)| Series { label: l, points: rep.curve.clone() })
        .collect();
    line_chart(title, "t", "dist(t a, A)/t", &series, true, false)
}

fn reps(d: &DirectionSet) -> Vec<Vec<f64>> {
    d.reps().iter().map(|r| r.as_slice().to_vec()).collect()
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct SspGermArgs {
    /// Germ JSON (see README for the kinds).
    #[arg(long)]
    pub germ: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub harness: Harness,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

fn required<'a>(v: &'a Option<PathBuf>, flag: &str) -> Result<&'a PathBuf> {
    v.as_ref().with_context(|| format!("missing --{flag}"))
}

pub fn ssp_germ(a: &SspGermArgs) -> Result<Run> {
    let spec = load_germ(required(&a.germ, "germ")?)?;
    let g = spec.build()?;
    let cfg = a.harness.config()?;
    let d = estimate_direction_set(g.as_ref(), &cfg.schedule, cfg.eps)?;
    let r = ssp_distance_test(g.as_ref(), &d, &cfg.schedule, cfg.ssp_tol)?;
    let outcome = Outcome::from_verdict(r.result.verdict);
    let mut art = Artifacts::new(&json!({
        "command": "ssp-germ",
        "schedule": cfg.schedule,
        "eps": cfg.eps,
        "directions": d,
        "distance_test": r,
        "outcome": outcome.name(),
    }))?;
    let mut t = distance_table();
    distance_evidence("A", &r, &mut t);
    art.evidence = t;
    art.plots.push(("q_curves".into(), q_plot("distance ratios along representatives", &r)));
    Ok((outcome, art))
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct DirectionArgs {
    #[arg(long)]
    pub germ: Option<PathBuf>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub schedule: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

pub fn direction(a: &DirectionArgs) -> Result<Run> {
    let spec = load_germ(required(&a.germ, "germ")?)?;
    let g = spec.build()?;
    let s: ScaleSchedule = match &a.schedule {
        Some(p) => load_json(p)?,
        None => ScaleSchedule::default(),
    };
    let d = estimate_direction_set(g.as_ref(), &s, a.eps.unwrap_or(0.05))?;
    let mut art = Artifacts::new(&d)?;
    let mut t = Table::new(&["rep", "weight", "coords"]);
    for (i, (r, w)) in d.reps().iter().zip(d.weights()).enumerate() {
        let c: Vec<String> = r.as_slice().iter().map(|v| num(*v)).collect();
        t.push([i.to_string(), w.to_string(), c.join(" ")]);
    }
    art.evidence = t;
    if d.dim() <= 3 {
        art.plots.push(("directions".into(), direction_plot("estimated direction set", &[("D(A)", &reps(&d))])));
    }
    Ok((Outcome::Pass, art))
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct DimensionArgs {
    /// DirectionSet JSON as written by `direction`.
    #[arg(long)]
    pub dirset: Option<PathBuf>,
    /// Strictly decreasing resolutions, comma separated; default 16ε,8ε,4ε,2ε.
    #[arg(long, value_delimiter = ',')]
    pub resolutions: Option<Vec<f64>>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

pub fn dimension(a: &DimensionArgs) -> Result<Run> {
    let d: DirectionSet = load_json(required(&a.dirset, "dirset")?)?;
    let res = a.resolutions.clone().unwrap_or_else(|| default_resolutions(d.eps()));
    let (cone, e) = cone_dimension(&d, &res)?;
    let outcome = if e.warning { Outcome::Inconclusive } else { Outcome::Pass };
    let mut art = Artifacts::new(&json!({
        "command": "dimension",
        "direction_dim": e.dim,
        "cone_dim": cone,
        "estimate": e,
        "outcome": outcome.name(),
    }))?;
    let mut t = Table::new(&["delta", "count"]);
    for (r, n) in &e.counts {
        t.push([num(*r), n.to_string()]);
    }
    art.evidence = t;
    let pts = e.counts.iter().map(|(r, n)| (1.0 / r, *n as f64)).collect();
    art.plots.push((
        "box_counts".into(),
        line_chart("box counts", "1/delta", "N(delta)", &[Series { label: "N", points: pts }], true, true),
    ));
    Ok((outcome, art))
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ExtendArgs {
    /// JSON list of [point, value] anchors.
    #[arg(long)]
    pub anchors: Option<PathBuf>,
    /// Lipschitz constant; defaults to the empirical constant of the anchors.
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub lip: Option<f64>,
    /// inf (smallest extension above) or sup (largest below).
    #[arg(long)]
    pub mode: Option<String>,
    /// Grid spacing in the unit ball of the anchor dimension.
    #[arg(long)]
    pub grid: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

pub fn extend(a: &ExtendArgs) -> Result<Run> {
    let anchors: Vec<(Vec<f64>, f64)> = load_json(required(&a.anchors, "anchors")?)?;
    let Some(first) = anchors.first() else { bail!("no anchors") };
    let n = first.0.len();
    let pts: Vec<Vec<f64>> = anchors.iter().map(|a| a.0.clone()).collect();
    let vals: Vec<Vec<f64>> = anchors.iter().map(|a| vec![a.1]).collect();
    let lip = a.lip.unwrap_or_else(|| empirical_constant(&pts, &vals, true));
    let mode = match a.mode.as_deref().unwrap_or("inf") {
        "inf" => ExtensionMode::Inf,
        "sup" => ExtensionMode::Sup,
        m => bail!("--mode must be inf or sup, got '{m}'"),
    };
    let f = whitney_extend(&ExtensionSpec { anchors: anchors.clone(), lip, mode })?;
    let grid = default_grid(n, a.grid.unwrap_or(0.1), 1000);
    let mut t = Table::new(&["x", "value"]);
    let mut curve = Vec::new();
    for x in &grid {
        let v = f.eval(x)?[0];
        let c: Vec<String> = x.iter().map(|c| num(*c)).collect();
        t.push([c.join(" "), num(v)]);
        if n == 1 {
            curve.push((x[0], v));
        }
    }
    let defect = anchors
        .iter()
        .map(|(p, v)| f.eval(p).map(|y| (y[0] - v).abs()))
        .collect::<germlab::Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let mut art = Artifacts::new(&json!({
        "command": "extend",
        "L": lip,
        "mode": mode,
        "anchors": anchors.len(),
        "grid_points": grid.len(),
        "anchor_defect": defect,
        "outcome": "pass",
    }))?;
    art.evidence = t;
    if n == 1 {
        curve.sort_by(|p, q| p.0.total_cmp(&q.0));
        art.plots.push(("extension".into(), line_chart("extension", "x", "value", &[Series { label: "extension", points: curve }], false, false)));
    }
    Ok((Outcome::Pass, art))
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct DphiArgs {
    /// Map JSON with f(0) = 0.
    #[arg(long)]
    pub map: Option<PathBuf>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Largest j in n = 2^j.
    #[arg(long)]
    pub budget: Option<u32>,
    /// Grid spacing in the unit ball.
    #[arg(long)]
    pub grid: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

pub fn dphi(a: &DphiArgs) -> Result<Run> {
    let f: MapDescriptor = load_json(required(&a.map, "map")?)?;
    let grid = default_grid(f.dim_in(), a.grid.unwrap_or(0.25), 1000);
    let (_, report) = pseudo_derivative(&f, &grid, a.tol.unwrap_or(1e-3), a.budget.unwrap_or(20))?;
    let outcome = if report.converged { Outcome::Pass } else { Outcome::Inconclusive };
    let rows = report.rows.clone();
    let mut art = Artifacts::new(&json!({ "command": "dphi", "rescaling": report, "outcome": outcome.name() }))?;
    let mut t = Table::new(&["j", "n", "sup_deviation", "accepted"]);
    for r in &rows {
        t.push([r.j.to_string(), r.n.to_string(), num(r.sup_deviation), r.accepted.to_string()]);
    }
    art.evidence = t;
    let pts = rows.iter().skip(1).map(|r| (r.n as f64, r.sup_deviation)).collect();
    art.plots.push((
        "rescaling".into(),
        line_chart("sup-deviation of successive rescalings", "n", "deviation", &[Series { label: "deviation", points: pts }], true, true),
    ));
    Ok((outcome, art))
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct PairArgs {
    #[arg(long)]
    pub germ_a: Option<PathBuf>,
    #[arg(long)]
    pub germ_b: Option<PathBuf>,
    #[arg(long)]
    pub map: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub harness: Harness,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

pub fn harness_artifacts(r: &HarnessReport) -> Result<Artifacts> {
    let mut art = Artifacts::new(r)?;
    let mut t = distance_table();
    for (k, h) in &r.hypotheses {
        distance_evidence(k, h, &mut t);
        art.plots.push((format!("q_{k}"), q_plot(&format!("distance ratios, {k}"), h)));
    }
    art.evidence = t;
    Ok(art)
}

#[derive(Clone, Copy)]
pub enum PairCheck {
    ConeInvariance,
    DimEquality,
    Transversality,
}

pub fn pair(a: &PairArgs, which: PairCheck) -> Result<Run> {
    let ga = load_germ(required(&a.germ_a, "germ-a")?)?.build()?;
    let gb = load_germ(required(&a.germ_b, "germ-b")?)?.build()?;
    let map = a.map.as_ref().map(|p| load_json::<MapDescriptor>(p)).transpose()?;
    let cfg = a.harness.config()?;
    let r = match (which, map) {
        (PairCheck::ConeInvariance, Some(m)) => check_cone_invariance(ga.as_ref(), gb.as_ref(), &m, &cfg)?,
        (PairCheck::DimEquality, Some(m)) => check_dimension_equality(ga, gb, &m, &cfg)?,
        (PairCheck::Transversality, Some(m)) => check_weak_transversality_preservation(ga, gb, &m, &cfg)?,
        (PairCheck::Transversality, None) => transversality_summary(ga.as_ref(), gb.as_ref(), &cfg)?,
        (_, None) => bail!("missing --map"),
    };
    Ok((Outcome::from_pass(r.pass), harness_artifacts(&r)?))
}
