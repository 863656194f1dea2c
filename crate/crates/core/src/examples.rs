//! Deterministic generators for the example families: null sequences,
//! zigzag curves between two rays, blow-up chart images, and linear germs.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::germ::{DirectionSet, GermOracle, SampledGerm, ScaleSchedule, Shell};
use crate::linalg::{norm, scale, Point};
use crate::map::{Builtin, MapDescriptor};
use crate::sequence::{SequenceGerm, SequenceRule, PB_I_MAX_CAP};
use crate::shapes::{SectorGerm, SegmentGerm, SubspaceGerm, UnionGerm};

/// Default seed for everything randomized downstream of the generators.
pub const DEFAULT_SEED: u64 = 0x5EED;
pub const DEFAULT_PER_SHELL: usize = 16;
pub const MAX_ZIGZAG_DEPTH: usize = 40;

/// Named sequence families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum SequenceFamily {
    Harmonic,
    LogRatio,
    PowerSqrt,
    Geometric { q: f64 },
    PbNotSsp { i_max: u32 },
}

impl SequenceFamily {
    /// Parses a bare family name with default parameters
    /// (`geometric` uses `q = 1/2`, `pb_not_ssp` uses `i_max = 5`).
    pub fn from_name(name: &str) -> Result<Self> {
        Ok(match name {
            "harmonic" => SequenceFamily::Harmonic,
            "log_ratio" => SequenceFamily::LogRatio,
            "power_sqrt" => SequenceFamily::PowerSqrt,
            "geometric" => SequenceFamily::Geometric { q: 0.5 },
            "pb_not_ssp" => SequenceFamily::PbNotSsp { i_max: 5 },
            other => return Err(Error::InvalidParameter(format!("unknown sequence family '{other}'"))),
        })
    }

    pub fn all_default() -> Vec<(&'static str, SequenceFamily)> {
        ["harmonic", "log_ratio", "power_sqrt", "pb_not_ssp", "geometric"]
            .into_iter()
            .map(|n| (n, SequenceFamily::from_name(n).expect("known family")))
            .collect()
    }
}

pub fn gen_sequence(family: &SequenceFamily) -> Result<SequenceGerm> {
    let rule = match family {
        SequenceFamily::Harmonic => SequenceRule::Harmonic,
        SequenceFamily::LogRatio => SequenceRule::LogRatio,
        SequenceFamily::PowerSqrt => SequenceRule::PowerSqrt,
        SequenceFamily::Geometric { q } => SequenceRule::Geometric { q: *q },
        SequenceFamily::PbNotSsp { i_max } => {
            if *i_max > PB_I_MAX_CAP {
                return Err(Error::InvalidParameter(format!("i_max is capped at {PB_I_MAX_CAP}")));
            }
            SequenceRule::PbNotSsp { i_max: *i_max }
        }
    };
    SequenceGerm::from_rule(rule)
}

/// Polynomially bounded sequence without the selection property.
pub fn pb_not_ssp_sequence(i_max: u32) -> Result<SequenceGerm> {
    gen_sequence(&SequenceFamily::PbNotSsp { i_max })
}

/// A zigzag curve in the sector between `ℓ = {y = 0}` and `m = {y = c x}`,
/// `x ≥ 0`, as the graph of a piecewise-linear profile.
#[derive(Clone)]
pub struct Zigzag {
    pub c: f64,
    pub corners: Vec<Point>,
    /// Exact polyline oracle of the graph (ending at the origin).
    pub germ: Arc<SegmentGerm>,
    /// Samples of `germ` on the dyadic schedule of the requested depth.
    pub sample: SampledGerm,
    /// `f` with graph equal to the zigzag over `[0, 1]`, constant outside.
    pub profile: MapDescriptor,
    /// Lipschitz constant of `f` when the construction keeps slopes bounded.
    pub lip: Option<f64>,
}

/// Corner abscissas: `ratio^k` (similar triangles) when `!ssp`, else
/// `exp(−√k)` so consecutive corners have ratio tending to 1.
/// Corners alternate between `ℓ` (even `k`) and `m` (odd `k`) and stop once
/// below the finest shell of `ScaleSchedule(1, 1/2, depth)`.
pub fn gen_zigzag(c: f64, ratio: f64, ssp: bool, depth: usize) -> Result<Zigzag> {
    gen_zigzag_with(c, ratio, ssp, depth, DEFAULT_PER_SHELL)
}

pub fn gen_zigzag_with(c: f64, ratio: f64, ssp: bool, depth: usize, per_shell: usize) -> Result<Zigzag> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidParameter(format!("c must be > 0, got {c}")));
    }
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidParameter(format!("ratio must lie in (0,1), got {ratio}")));
    }
    if !(2..=MAX_ZIGZAG_DEPTH).contains(&depth) {
        return Err(Error::InvalidParameter(format!("depth must lie in 2..={MAX_ZIGZAG_DEPTH}, got {depth}")));
    }
    let schedule = ScaleSchedule::new(1.0, 0.5, depth)?;
    let stop = schedule.min_radius() / 2.0;
    let mut corners = Vec::new();
    let mut k = 0u32;
    loop {
        let x = if ssp { (-(k as f64).sqrt()).exp() } else { ratio.powi(k as i32) };
        let y = if k.is_multiple_of(2) { 0.0 } else { c * x };
        corners.push(vec![x, y]);
        if x < stop {
            break;
        }
        k += 1;
    }
    let mut path = corners.clone();
    path.push(vec![0.0, 0.0]);
    let germ = Arc::new(SegmentGerm::polyline(&path, per_shell)?);
    let sample = SampledGerm::from_oracle(germ.as_ref(), &schedule)?;
    let knots: Vec<[f64; 2]> = path.iter().rev().map(|p| [p[0], p[1]]).collect();
    let profile = MapDescriptor::builtin(Builtin::PiecewiseLinear { knots })?;
    let lip = if ssp { None } else { Some(c / (1.0 - ratio)) };
    Ok(Zigzag { c, corners, germ, sample, profile, lip })
}

/// `Y₊(f)(x, y) = (x, y + f(x))`, which carries `ℓ` onto the graph of `f`.
pub fn zigzag_shear(z: &Zigzag) -> Result<MapDescriptor> {
    MapDescriptor::shear_plus(z.profile.clone())
}

/// Swaps coordinates: the zigzag as a chart curve between `X = 0` and
/// `X = cY`.
pub fn transpose_zigzag(z: &Zigzag) -> Result<SampledGerm> {
    let pts = z.sample.points().iter().map(|p| vec![p[1], p[0]]).collect();
    SampledGerm::with_scales(2, pts, z.sample.min_scale(), z.sample.max_scale())
}

/// Pushes a chart germ through `(X, Y) ↦ (XY, Y)`.
pub fn gen_blowup_image(b: &SampledGerm) -> Result<SampledGerm> {
    let chart = MapDescriptor::builtin(Builtin::BlowupChart)?;
    let pts: Vec<Point> = b
        .points()
        .iter()
        .map(|p| chart.eval(p))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter(|p| norm(p) > 0.0)
        .collect();
    SampledGerm::new(2, pts)
}

/// `max(|x| − c·y², −x, −y)` over the points: nonpositive iff every point
/// lies in `{0 ≤ x ≤ c y², y ≥ 0}`.
pub fn blowup_region_defect(g: &SampledGerm, c: f64) -> f64 {
    g.points()
        .iter()
        .map(|p| (p[0].abs() - c * p[1] * p[1]).max(-p[0]).max(-p[1]))
        .fold(f64::NEG_INFINITY, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LinearKind {
    Ray { dir: Point },
    Line { dir: Point },
    Plane { basis: Vec<Point> },
    Sector { theta1: f64, theta2: f64 },
    ConeOver { directions: DirectionSet },
    Union { parts: Vec<LinearKind> },
}

/// Analytic oracle of a linear germ.
pub fn linear_oracle(kind: &LinearKind, per_shell: usize) -> Result<Arc<dyn GermOracle>> {
    Ok(match kind {
        LinearKind::Ray { dir } => Arc::new(SegmentGerm::ray(dir, per_shell)?),
        LinearKind::Line { dir } => Arc::new(SubspaceGerm::new(dir.len(), std::slice::from_ref(dir), per_shell)?),
        LinearKind::Plane { basis } => {
            if basis.len() != 2 {
                return Err(Error::InvalidParameter("a plane needs exactly 2 spanning vectors".into()));
            }
            Arc::new(SubspaceGerm::new(basis[0].len(), basis, per_shell)?)
        }
        LinearKind::Sector { theta1, theta2 } => Arc::new(SectorGerm::new(*theta1, *theta2, per_shell)?),
        LinearKind::ConeOver { directions } => {
            if directions.is_empty() {
                return Err(Error::Empty("direction set"));
            }
            let dirs: Vec<Point> = directions.reps().iter().map(|r| r.as_slice().to_vec()).collect();
            Arc::new(SegmentGerm::rays(directions.dim(), &dirs, per_shell)?)
        }
        LinearKind::Union { parts } => {
            let parts = parts.iter().map(|p| linear_oracle(p, per_shell)).collect::<Result<Vec<_>>>()?;
            Arc::new(UnionGerm::new(parts)?)
        }
    })
}

/// `per_shell` low-discrepancy samples of the exact set in every shell.
pub fn gen_linear_germ(kind: &LinearKind, s: &ScaleSchedule, per_shell: usize) -> Result<SampledGerm> {
    if per_shell == 0 {
        return Err(Error::InvalidParameter("per_shell must be >= 1".into()));
    }
    SampledGerm::from_oracle(linear_oracle(kind, per_shell)?.as_ref(), s)
}

/// Ray sampled on its own geometric ladder with `per_shell` points in each
/// `[t·ratio, t]`, down to `min_radius`. A small ratio leaves relative gaps
/// that do not shrink, so the sample fails the selection property.
pub fn shell_sampled_ray(dir: &[f64], ratio: f64, per_shell: usize, min_radius: f64) -> Result<SampledGerm> {
    if !(ratio > 0.0 && ratio < 1.0) || !(min_radius > 0.0 && min_radius < 1.0) {
        return Err(Error::InvalidParameter("need 0 < ratio < 1 and 0 < min_radius < 1".into()));
    }
    let depth = ((min_radius.ln() / ratio.ln()).ceil() as usize).max(2);
    let s = ScaleSchedule::new(1.0, ratio, depth)?;
    let ray = SegmentGerm::ray(dir, per_shell)?;
    SampledGerm::from_oracle(&ray, &s)
}

/// Union of finite samples in a common ambient space.
pub fn union_sampled(parts: &[&SampledGerm]) -> Result<SampledGerm> {
    let first = parts.first().ok_or(Error::Empty("union"))?;
    let mut pts = Vec::new();
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for p in parts {
        if p.dim() != first.dim() {
            return Err(Error::DimensionMismatch { expected: first.dim(), got: p.dim() });
        }
        pts.extend(p.points().iter().cloned());
        lo = lo.min(p.min_scale());
        hi = hi.max(p.max_scale());
    }
    SampledGerm::with_scales(first.dim(), pts, lo, hi)
}

/// Points of `g` in `shell` scaled by `factor`; a helper for scale checks.
pub fn scaled_sample(g: &dyn GermOracle, shell: Shell, factor: f64) -> Vec<Point> {
    g.sample(shell).into_iter().map(|p| scale(&p, factor)).collect()
}
