//! Data model for set-germs at the origin: scale ladders, unit directions,
//! finite direction sets, cones, and the two germ encodings (a finite
//! multiscale sample and a distance/sampler oracle).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dist, norm, Point};

/// Tolerance on `|‖u‖ − 1|` for a [`UnitVector`].
pub const UNIT_TOL: f64 = 1e-12;

/// Geometric ladder `t_k = t0 · r^k`, `k = 0..depth`.
///
/// Shell `k` is the annulus `[t_k · r, t_k]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScheduleRepr")]
pub struct ScaleSchedule {
    t0: f64,
    r: f64,
    depth: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScheduleRepr {
    t0: f64,
    r: f64,
    depth: usize,
}

impl TryFrom<ScheduleRepr> for ScaleSchedule {
    type Error = Error;
    fn try_from(s: ScheduleRepr) -> Result<Self> {
        ScaleSchedule::new(s.t0, s.r, s.depth)
    }
}

impl Default for ScaleSchedule {
    fn default() -> Self {
        ScaleSchedule { t0: 1.0, r: 0.5, depth: 30 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shell {
    pub inner: f64,
    pub outer: f64,
}

impl Shell {
    pub fn contains(&self, radius: f64) -> bool {
        self.inner <= radius && radius <= self.outer
    }
}

impl ScaleSchedule {
    pub fn new(t0: f64, r: f64, depth: usize) -> Result<Self> {
        if !(t0 > 0.0 && t0.is_finite()) {
            return Err(Error::InvalidParameter(format!("t0 must be > 0, got {t0}")));
        }
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::InvalidParameter(format!("r must lie in (0,1), got {r}")));
        }
        if depth < 2 {
            return Err(Error::InvalidParameter(format!("depth must be >= 2, got {depth}")));
        }
        Ok(ScaleSchedule { t0, r, depth })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn ratio(&self) -> f64 {
        self.r
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn scale(&self, k: usize) -> f64 {
        self.t0 * self.r.powi(k as i32)
    }

    pub fn scales(&self) -> Vec<f64> {
        (0..self.depth).map(|k| self.scale(k)).collect()
    }

    pub fn shell(&self, k: usize) -> Shell {
        let outer = self.scale(k);
        Shell { inner: outer * self.r, outer }
    }

    pub fn shells(&self) -> impl Iterator<Item = Shell> + '_ {
        (0..self.depth).map(|k| self.shell(k))
    }

    /// Index of the first shell of the finest `⌈depth/2⌉`.
    pub fn fine_start(&self) -> usize {
        self.depth - self.depth.div_ceil(2)
    }

    pub fn fine_shells(&self) -> impl Iterator<Item = Shell> + '_ {
        (self.fine_start()..self.depth).map(|k| self.shell(k))
    }

    /// Inner radius of the finest shell.
    pub fn min_radius(&self) -> f64 {
        self.scale(self.depth - 1) * self.r
    }
}

/// A point of the unit sphere `S^{n-1}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct UnitVector(Vec<f64>);

impl UnitVector {
    /// Normalizes `v`; fails on the zero vector.
    pub fn new(v: &[f64]) -> Result<Self> {
        let n = norm(v);
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::InvalidParameter("cannot normalize a zero or non-finite vector".into()));
        }
        Ok(UnitVector(v.iter().map(|x| x / n).collect()))
    }

    /// Accepts coordinates already on the sphere within [`UNIT_TOL`].
    pub fn try_from_unit(v: Vec<f64>) -> Result<Self> {
        let n = norm(&v);
        if (n - 1.0).abs() > UNIT_TOL {
            return Err(Error::InvalidParameter(format!("not a unit vector (norm {n})")));
        }
        Ok(UnitVector(v))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl<'de> Deserialize<'de> for UnitVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        UnitVector::try_from_unit(v).map_err(serde::de::Error::custom)
    }
}

impl AsRef<[f64]> for UnitVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Finite ε-net approximating a direction set `D(A)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DirectionSetRepr")]
pub struct DirectionSet {
    dim: usize,
    eps: f64,
    reps: Vec<UnitVector>,
    weights: Vec<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DirectionSetRepr {
    dim: usize,
    eps: f64,
    reps: Vec<UnitVector>,
    weights: Vec<usize>,
}

impl TryFrom<DirectionSetRepr> for DirectionSet {
    type Error = Error;
    fn try_from(r: DirectionSetRepr) -> Result<Self> {
        DirectionSet::new(r.dim, r.eps, r.reps, r.weights)
    }
}

impl DirectionSet {
    /// Validates net separation (`≥ eps/2`) and positive weights.
    pub fn new(dim: usize, eps: f64, reps: Vec<UnitVector>, weights: Vec<usize>) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::InvalidParameter(format!("eps must be > 0, got {eps}")));
        }
        if reps.len() != weights.len() {
            return Err(Error::InvalidParameter("reps and weights differ in length".into()));
        }
        if let Some(r) = reps.iter().find(|r| r.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: r.dim() });
        }
        if weights.contains(&0) {
            return Err(Error::InvalidParameter("every representative needs weight >= 1".into()));
        }
        for i in 0..reps.len() {
            for j in 0..i {
                if dist(reps[i].as_slice(), reps[j].as_slice()) < eps / 2.0 {
                    return Err(Error::InvalidParameter(format!(
                        "representatives {j} and {i} closer than eps/2"
                    )));
                }
            }
        }
        Ok(DirectionSet { dim, eps, reps, weights })
    }

    pub(crate) fn from_parts_unchecked(dim: usize, eps: f64, reps: Vec<UnitVector>, weights: Vec<usize>) -> Self {
        DirectionSet { dim, eps, reps, weights }
    }

    pub fn empty(dim: usize, eps: f64) -> Self {
        DirectionSet { dim, eps, reps: Vec::new(), weights: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn reps(&self) -> &[UnitVector] {
        &self.reps
    }

    pub fn weights(&self) -> &[usize] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    /// Euclidean distance from a unit vector to the nearest representative.
    pub fn distance_to(&self, u: &[f64]) -> f64 {
        self.reps
            .iter()
            .map(|r| dist(r.as_slice(), u))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Half-cone `L(D)` over a direction set.
#[derive(Debug, Clone, PartialEq)]
pub struct Cone {
    base: DirectionSet,
}

impl Cone {
    pub(crate) fn new_unchecked(base: DirectionSet) -> Self {
        Cone { base }
    }

    pub fn base(&self) -> &DirectionSet {
        &self.base
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let n = norm(x);
        if n == 0.0 {
            return true;
        }
        let u: Vec<f64> = x.iter().map(|c| c / n).collect();
        self.base.distance_to(&u) <= self.base.eps
    }
}

/// A set-germ presented through distance queries and shell sampling.
///
/// `nearest` returns a point of the germ realizing (or, for pushforwards,
/// bounding) the distance; `distance` defaults to the gap to that point.
pub trait GermOracle: Send + Sync {
    fn dim(&self) -> usize;

    fn nearest(&self, p: &[f64]) -> Option<Point>;

    fn distance(&self, p: &[f64]) -> f64 {
        self.nearest(p).map_or(f64::INFINITY, |q| dist(p, &q))
    }

    /// Germ points with `shell.inner <= |x| <= shell.outer`.
    fn sample(&self, shell: Shell) -> Vec<Point>;
}

/// Finite multiscale sample of a germ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SampledRepr")]
pub struct SampledGerm {
    dim: usize,
    points: Vec<Point>,
    min_scale: f64,
    max_scale: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SampledRepr {
    dim: usize,
    points: Vec<Point>,
    min_scale: f64,
    max_scale: f64,
}

impl TryFrom<SampledRepr> for SampledGerm {
    type Error = Error;
    fn try_from(r: SampledRepr) -> Result<Self> {
        SampledGerm::with_scales(r.dim, r.points, r.min_scale, r.max_scale)
    }
}

impl SampledGerm {
    /// Scales are taken from the extreme norms of the points.
    pub fn new(dim: usize, points: Vec<Point>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Empty("sampled germ"));
        }
        let norms: Vec<f64> = points.iter().map(|p| norm(p)).collect();
        let min = norms.iter().copied().fold(f64::INFINITY, f64::min);
        let max = norms.iter().copied().fold(0.0, f64::max);
        SampledGerm::with_scales(dim, points, min, max)
    }

    pub fn with_scales(dim: usize, points: Vec<Point>, min_scale: f64, max_scale: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dim must be positive".into()));
        }
        if points.is_empty() {
            return Err(Error::Empty("sampled germ"));
        }
        if !(min_scale > 0.0 && min_scale <= max_scale) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < min_scale <= max_scale, got [{min_scale}, {max_scale}]"
            )));
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: p.len() });
            }
            let n = norm(p);
            if n == 0.0 {
                return Err(Error::InvalidParameter(format!("point {i} is the origin")));
            }
            if n < min_scale || n > max_scale {
                return Err(Error::InvalidParameter(format!(
                    "point {i} has norm {n} outside [{min_scale}, {max_scale}]"
                )));
            }
        }
        Ok(SampledGerm { dim, points, min_scale, max_scale })
    }

    /// Samples `oracle` on every shell of `schedule`.
    pub fn from_oracle(oracle: &dyn GermOracle, schedule: &ScaleSchedule) -> Result<Self> {
        let mut points = Vec::new();
        for shell in schedule.shells() {
            points.extend(oracle.sample(shell));
        }
        SampledGerm::with_scales(oracle.dim(), points, schedule.min_radius(), schedule.t0())
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn min_scale(&self) -> f64 {
        self.min_scale
    }

    pub fn max_scale(&self) -> f64 {
        self.max_scale
    }

    /// Every shell of `schedule` inside `[min_scale, max_scale]` holds a point.
    pub fn check_coverage(&self, schedule: &ScaleSchedule) -> Result<()> {
        let norms: Vec<f64> = self.points.iter().map(|p| norm(p)).collect();
        for (k, shell) in schedule.shells().enumerate() {
            if shell.inner < self.min_scale || shell.outer > self.max_scale {
                continue;
            }
            if !norms.iter().any(|&n| shell.contains(n)) {
                return Err(Error::Precondition(format!(
                    "shell {k} [{}, {}] holds no sample",
                    shell.inner, shell.outer
                )));
            }
        }
        Ok(())
    }
}

impl GermOracle for SampledGerm {
    fn dim(&self) -> usize {
        self.dim
    }

    fn nearest(&self, p: &[f64]) -> Option<Point> {
        let mut best = f64::INFINITY;
        let mut arg = None;
        for q in &self.points {
            let d = dist(p, q);
            if d < best {
                best = d;
                arg = Some(q);
            }
        }
        arg.cloned()
    }

    fn sample(&self, shell: Shell) -> Vec<Point> {
        self.points
            .iter()
            .filter(|p| shell.contains(norm(p)))
            .cloned()
            .collect()
    }
}

/// Wraps a finite sample as a distance/sampler oracle.
pub fn sample_to_oracle(g: SampledGerm) -> std::sync::Arc<dyn GermOracle> {
    std::sync::Arc::new(g)
}
