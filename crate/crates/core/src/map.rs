//! Evaluable maps `R^n → R^m` from a closed catalog plus combinators.
//!
//! Wire format: `{"kind": .., "params": .., "inverse": .., "lip_upper": ..}`,
//! or `{"kind":"expr","src":"..","dim_in":k}` for expression maps.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::expr::{self, Expr};
use crate::linalg::{dist, norm, Point};

/// Seed for the pair sampling that estimates Lipschitz constants of
/// expression maps.
pub const LIP_SEED: u64 = 0x5EED;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum Builtin {
    Identity { dim: usize },
    Zero { dim: usize },
    Scale { dim: usize, factor: f64 },
    Diag { d: Vec<f64> },
    Rotation2 { angle: f64 },
    /// `x_i + x_i²` componentwise.
    SquarePlus { dim: usize },
    /// `|x_i|` componentwise.
    Abs { dim: usize },
    /// `x + δ‖x‖w`; positively homogeneous.
    RadialShift { w: Vec<f64>, delta: f64 },
    RadialShiftInv { w: Vec<f64>, delta: f64 },
    /// `x + δ‖x‖²/(1+‖x‖²) w`; tangent to the identity at 0.
    BumpShift { w: Vec<f64>, delta: f64 },
    BumpShiftInv { w: Vec<f64>, delta: f64 },
    /// Linear interpolation through `knots` (sorted by abscissa),
    /// constant beyond the end knots.
    PiecewiseLinear { knots: Vec<[f64; 2]> },
    /// `(X, Y) ↦ (XY, Y)`.
    BlowupChart,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtensionMode {
    /// `α(x) = min_a f(a) + L‖x − a‖`
    Inf,
    /// `β(x) = max_a f(a) − L‖x − a‖`
    Sup,
}

/// Componentwise extremal Lipschitz extension of a finite table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtensionTable {
    pub points: Vec<Point>,
    pub values: Vec<Point>,
    pub lip: f64,
    pub mode: ExtensionMode,
}

impl ExtensionTable {
    pub fn eval(&self, x: &[f64]) -> Point {
        let m = self.values[0].len();
        // An anchor hit returns its value verbatim.
        for (p, v) in self.points.iter().zip(&self.values) {
            if p.as_slice() == x {
                return v.clone();
            }
        }
        let d: Vec<f64> = self.points.iter().map(|p| self.lip * dist(p, x)).collect();
        (0..m)
            .map(|j| match self.mode {
                ExtensionMode::Inf => self
                    .values
                    .iter()
                    .zip(&d)
                    .map(|(v, d)| v[j] + d)
                    .fold(f64::INFINITY, f64::min),
                ExtensionMode::Sup => self
                    .values
                    .iter()
                    .zip(&d)
                    .map(|(v, d)| v[j] - d)
                    .fold(f64::NEG_INFINITY, f64::max),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MapKind {
    Builtin(Builtin),
    Affine { matrix: Vec<Vec<f64>>, offset: Vec<f64> },
    Sum(Vec<MapDescriptor>),
    /// Applied left to right.
    Compose(Vec<MapDescriptor>),
    /// `Y₊(f)(x, y) = (x, y + f(x))`
    ShearPlus(Box<MapDescriptor>),
    /// `Y₋(f)(x, y) = (x + f(y), y)`
    ShearMinus(Box<MapDescriptor>),
    ShearPlusInv(Box<MapDescriptor>),
    ShearMinusInv(Box<MapDescriptor>),
    Extension(ExtensionTable),
    /// `x ↦ n·f(x/n)`
    Rescaled { base: Box<MapDescriptor>, n: u64 },
    Expr { src: String, expr: Expr },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapDescriptor {
    kind: MapKind,
    dim_in: usize,
    dim_out: usize,
    lip_upper: Option<f64>,
    inverse: Option<Box<MapDescriptor>>,
}

fn check_w(w: &[f64], delta: f64) -> Result<()> {
    if w.is_empty() {
        return Err(Error::InvalidParameter("w must be nonempty".into()));
    }
    if !(delta.abs() * norm(w) < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "|delta|·‖w‖ must be < 1 for invertibility, got {}",
            delta.abs() * norm(w)
        )));
    }
    Ok(())
}

// Maximum of d/ds s²/(1+s²).
const BUMP_SLOPE: f64 = 0.649_519_052_838_329;

fn bump(x: &[f64]) -> f64 {
    let s2 = x.iter().map(|v| v * v).sum::<f64>();
    s2 / (1.0 + s2)
}

/// Solves `y = x + δ g(x) w` for `x` by fixed-point iteration.
fn invert_shift(y: &[f64], w: &[f64], delta: f64, g: impl Fn(&[f64]) -> f64) -> Point {
    let mut x = y.to_vec();
    for _ in 0..500 {
        let gx = g(&x);
        let next: Point = y.iter().zip(w).map(|(yi, wi)| yi - delta * gx * wi).collect();
        let step = dist(&next, &x);
        x = next;
        if step <= 1e-17 * (1.0 + norm(y)) {
            break;
        }
    }
    x
}

impl Builtin {
    fn dims(&self) -> Result<(usize, usize)> {
        let d = match self {
            Builtin::Identity { dim }
            | Builtin::Zero { dim }
            | Builtin::Scale { dim, .. }
            | Builtin::SquarePlus { dim }
            | Builtin::Abs { dim } => *dim,
            Builtin::Diag { d } => d.len(),
            Builtin::Rotation2 { .. } | Builtin::BlowupChart => 2,
            Builtin::RadialShift { w, delta }
            | Builtin::RadialShiftInv { w, delta }
            | Builtin::BumpShift { w, delta }
            | Builtin::BumpShiftInv { w, delta } => {
                check_w(w, *delta)?;
                w.len()
            }
            Builtin::PiecewiseLinear { knots } => {
                if knots.len() < 2 {
                    return Err(Error::InvalidParameter("piecewise_linear needs >= 2 knots".into()));
                }
                if knots.windows(2).any(|k| !(k[0][0] < k[1][0])) {
                    return Err(Error::InvalidParameter("knot abscissas must increase strictly".into()));
                }
                1
            }
        };
        if d == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        Ok((d, d))
    }

    fn lip(&self) -> Option<f64> {
        match self {
            Builtin::Identity { .. } | Builtin::Abs { .. } | Builtin::Rotation2 { .. } => Some(1.0),
            Builtin::Zero { .. } => Some(0.0),
            Builtin::Scale { factor, .. } => Some(factor.abs()),
            Builtin::Diag { d } => Some(d.iter().fold(0.0, |m, v| f64::max(m, v.abs()))),
            Builtin::RadialShift { w, delta } => Some(1.0 + delta.abs() * norm(w)),
            Builtin::RadialShiftInv { w, delta } => Some(1.0 / (1.0 - delta.abs() * norm(w))),
            Builtin::BumpShift { w, delta } => Some(1.0 + BUMP_SLOPE * delta.abs() * norm(w)),
            Builtin::BumpShiftInv { w, delta } => Some(1.0 / (1.0 - BUMP_SLOPE * delta.abs() * norm(w))),
            Builtin::PiecewiseLinear { knots } => Some(
                knots
                    .windows(2)
                    .map(|k| ((k[1][1] - k[0][1]) / (k[1][0] - k[0][0])).abs())
                    .fold(0.0, f64::max),
            ),
            Builtin::SquarePlus { .. } | Builtin::BlowupChart => None,
        }
    }

    fn inverse(&self) -> Option<Builtin> {
        Some(match self {
            Builtin::Identity { dim } => Builtin::Identity { dim: *dim },
            Builtin::Scale { dim, factor } if *factor != 0.0 => Builtin::Scale { dim: *dim, factor: 1.0 / factor },
            Builtin::Diag { d } if d.iter().all(|v| *v != 0.0) => Builtin::Diag { d: d.iter().map(|v| 1.0 / v).collect() },
            Builtin::Rotation2 { angle } => Builtin::Rotation2 { angle: -angle },
            Builtin::RadialShift { w, delta } => Builtin::RadialShiftInv { w: w.clone(), delta: *delta },
            Builtin::RadialShiftInv { w, delta } => Builtin::RadialShift { w: w.clone(), delta: *delta },
            Builtin::BumpShift { w, delta } => Builtin::BumpShiftInv { w: w.clone(), delta: *delta },
            Builtin::BumpShiftInv { w, delta } => Builtin::BumpShift { w: w.clone(), delta: *delta },
            _ => return None,
        })
    }

    fn eval(&self, x: &[f64]) -> Point {
        match self {
            Builtin::Identity { .. } => x.to_vec(),
            Builtin::Zero { dim } => vec![0.0; *dim],
            Builtin::Scale { factor, .. } => x.iter().map(|v| v * factor).collect(),
            Builtin::Diag { d } => x.iter().zip(d).map(|(v, s)| v * s).collect(),
            Builtin::Rotation2 { angle } => {
                let (s, c) = angle.sin_cos();
                vec![c * x[0] - s * x[1], s * x[0] + c * x[1]]
            }
            Builtin::SquarePlus { .. } => x.iter().map(|v| v + v * v).collect(),
            Builtin::Abs { .. } => x.iter().map(|v| v.abs()).collect(),
            Builtin::RadialShift { w, delta } => {
                let s = delta * norm(x);
                x.iter().zip(w).map(|(v, wi)| v + s * wi).collect()
            }
            Builtin::RadialShiftInv { w, delta } => invert_shift(x, w, *delta, norm),
            Builtin::BumpShift { w, delta } => {
                let s = delta * bump(x);
                x.iter().zip(w).map(|(v, wi)| v + s * wi).collect()
            }
            Builtin::BumpShiftInv { w, delta } => invert_shift(x, w, *delta, bump),
            Builtin::PiecewiseLinear { knots } => vec![interpolate(knots, x[0])],
            Builtin::BlowupChart => vec![x[0] * x[1], x[1]],
        }
    }
}

fn interpolate(knots: &[[f64; 2]], x: f64) -> f64 {
    let first = knots[0];
    let last = knots[knots.len() - 1];
    if x <= first[0] {
        return first[1];
    }
    if x >= last[0] {
        return last[1];
    }
    // First knot with abscissa > x.
    let hi = knots.partition_point(|k| k[0] <= x);
    let (a, b) = (knots[hi - 1], knots[hi]);
    if x == a[0] {
        return a[1];
    }
    let t = (x - a[0]) / (b[0] - a[0]);
    a[1] + t * (b[1] - a[1])
}

fn to_matrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let m = rows.len();
    let n = rows.first().map_or(0, Vec::len);
    DMatrix::from_fn(m, n, |i, j| rows[i][j])
}

fn from_matrix(a: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..a.nrows()).map(|i| (0..a.ncols()).map(|j| a[(i, j)]).collect()).collect()
}

/// Largest singular value.
pub fn operator_norm(rows: &[Vec<f64>]) -> f64 {
    let a = to_matrix(rows);
    if a.is_empty() {
        return 0.0;
    }
    a.singular_values().iter().fold(0.0, |m, v| f64::max(m, *v))
}

fn mul_lip(ls: impl IntoIterator<Item = Option<f64>>) -> Option<f64> {
    ls.into_iter().try_fold(1.0, |acc, l| l.map(|l| acc * l))
}

impl MapDescriptor {
    fn from_kind(kind: MapKind) -> Result<Self> {
        let (dim_in, dim_out, lip) = match &kind {
            MapKind::Builtin(b) => {
                let (i, o) = b.dims()?;
                (i, o, b.lip())
            }
            MapKind::Affine { matrix, offset } => {
                let m = matrix.len();
                let n = matrix.first().map_or(0, Vec::len);
                if m == 0 || n == 0 || matrix.iter().any(|r| r.len() != n) {
                    return Err(Error::InvalidParameter("matrix must be rectangular and nonempty".into()));
                }
                if offset.len() != m {
                    return Err(Error::DimensionMismatch { expected: m, got: offset.len() });
                }
                (n, m, Some(operator_norm(matrix)))
            }
            MapKind::Sum(maps) => {
                let first = maps.first().ok_or(Error::Empty("sum"))?;
                for f in maps {
                    if f.dim_in != first.dim_in {
                        return Err(Error::DimensionMismatch { expected: first.dim_in, got: f.dim_in });
                    }
                    if f.dim_out != first.dim_out {
                        return Err(Error::DimensionMismatch { expected: first.dim_out, got: f.dim_out });
                    }
                }
                let lip = maps.iter().try_fold(0.0, |acc, f| f.lip_upper.map(|l| acc + l));
                (first.dim_in, first.dim_out, lip)
            }
            MapKind::Compose(maps) => {
                let first = maps.first().ok_or(Error::Empty("composition"))?;
                for w in maps.windows(2) {
                    if w[0].dim_out != w[1].dim_in {
                        return Err(Error::DimensionMismatch { expected: w[0].dim_out, got: w[1].dim_in });
                    }
                }
                let last = &maps[maps.len() - 1];
                (first.dim_in, last.dim_out, mul_lip(maps.iter().map(|f| f.lip_upper)))
            }
            MapKind::ShearPlus(f) | MapKind::ShearMinus(f) | MapKind::ShearPlusInv(f) | MapKind::ShearMinusInv(f) => {
                if f.dim_in != f.dim_out {
                    return Err(Error::DimensionMismatch { expected: f.dim_in, got: f.dim_out });
                }
                (2 * f.dim_in, 2 * f.dim_in, f.lip_upper.map(|l| 1.0 + l))
            }
            MapKind::Extension(t) => {
                let first = t.points.first().ok_or(Error::Empty("extension anchors"))?;
                if t.points.len() != t.values.len() {
                    return Err(Error::InvalidParameter("points and values differ in length".into()));
                }
                let n = first.len();
                let m = t.values[0].len();
                if n == 0 || m == 0 {
                    return Err(Error::InvalidParameter("anchors need positive dimension".into()));
                }
                if let Some(p) = t.points.iter().find(|p| p.len() != n) {
                    return Err(Error::DimensionMismatch { expected: n, got: p.len() });
                }
                if let Some(v) = t.values.iter().find(|v| v.len() != m) {
                    return Err(Error::DimensionMismatch { expected: m, got: v.len() });
                }
                if !(t.lip >= 0.0 && t.lip.is_finite()) {
                    return Err(Error::InvalidParameter(format!("lip must be finite and >= 0, got {}", t.lip)));
                }
                (n, m, Some((m as f64).sqrt() * t.lip))
            }
            MapKind::Rescaled { base, n } => {
                if *n == 0 {
                    return Err(Error::InvalidParameter("rescaling factor must be >= 1".into()));
                }
                (base.dim_in, base.dim_out, base.lip_upper)
            }
            MapKind::Expr { expr, .. } => {
                let k = expr.arity().max(1);
                (k, 1, None)
            }
        };
        Ok(MapDescriptor { kind, dim_in, dim_out, lip_upper: lip, inverse: None })
    }

    pub fn builtin(b: Builtin) -> Result<Self> {
        MapDescriptor::from_kind(MapKind::Builtin(b))
    }

    pub fn identity(dim: usize) -> Self {
        MapDescriptor::builtin(Builtin::Identity { dim }).expect("identity with positive dim")
    }

    pub fn zero(dim: usize) -> Self {
        MapDescriptor::builtin(Builtin::Zero { dim }).expect("zero with positive dim")
    }

    pub fn scale(dim: usize, factor: f64) -> Self {
        MapDescriptor::builtin(Builtin::Scale { dim, factor }).expect("scale with positive dim")
    }

    pub fn rotation2(angle: f64) -> Self {
        MapDescriptor::builtin(Builtin::Rotation2 { angle }).expect("rotation")
    }

    pub fn diag(d: Vec<f64>) -> Result<Self> {
        MapDescriptor::builtin(Builtin::Diag { d })
    }

    pub fn affine(matrix: Vec<Vec<f64>>, offset: Vec<f64>) -> Result<Self> {
        MapDescriptor::from_kind(MapKind::Affine { matrix, offset })
    }

    /// Linear map `x ↦ Ax`.
    pub fn linear(matrix: Vec<Vec<f64>>) -> Result<Self> {
        let m = matrix.len();
        MapDescriptor::affine(matrix, vec![0.0; m])
    }

    pub fn sum(maps: Vec<MapDescriptor>) -> Result<Self> {
        MapDescriptor::from_kind(MapKind::Sum(maps))
    }

    /// `compose(vec![f, g])` evaluates `g(f(x))`.
    pub fn compose(maps: Vec<MapDescriptor>) -> Result<Self> {
        MapDescriptor::from_kind(MapKind::Compose(maps))
    }

    pub fn shear_plus(f: MapDescriptor) -> Result<Self> {
        MapDescriptor::from_kind(MapKind::ShearPlus(Box::new(f)))
    }

    pub fn shear_minus(f: MapDescriptor) -> Result<Self> {
        MapDescriptor::from_kind(MapKind::ShearMinus(Box::new(f)))
    }

    pub fn extension(table: ExtensionTable) -> Result<Self> {
        MapDescriptor::from_kind(MapKind::Extension(table))
    }

    pub fn rescaled(base: MapDescriptor, n: u64) -> Result<Self> {
        MapDescriptor::from_kind(MapKind::Rescaled { base: Box::new(base), n })
    }

    /// Parses `src` as a scalar map of `dim_in` variables; the Lipschitz
    /// constant is estimated on random pairs from the unit ball.
    pub fn from_expr(src: &str, dim_in: usize) -> Result<Self> {
        let e = expr::parse(src)?;
        expr_map(src.to_string(), e, dim_in)
    }

    pub fn with_inverse(mut self, inverse: MapDescriptor) -> Result<Self> {
        if inverse.dim_in != self.dim_out || inverse.dim_out != self.dim_in {
            return Err(Error::DimensionMismatch { expected: self.dim_out, got: inverse.dim_in });
        }
        self.inverse = Some(Box::new(inverse));
        Ok(self)
    }

    pub fn with_lip(mut self, lip: f64) -> Self {
        self.lip_upper = Some(lip);
        self
    }

    pub fn kind(&self) -> &MapKind {
        &self.kind
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn lip_upper(&self) -> Option<f64> {
        self.lip_upper
    }

    /// The declared inverse, or one derived from the structure when the
    /// kind has a closed-form inverse.
    pub fn inverse(&self) -> Option<MapDescriptor> {
        if let Some(inv) = &self.inverse {
            return Some((**inv).clone());
        }
        let kind = match &self.kind {
            MapKind::Builtin(b) => MapKind::Builtin(b.inverse()?),
            MapKind::Affine { matrix, offset } => {
                let a = to_matrix(matrix);
                if !a.is_square() {
                    return None;
                }
                let inv = a.try_inverse()?;
                let b = -(&inv * nalgebra::DVector::from_column_slice(offset));
                MapKind::Affine { matrix: from_matrix(&inv), offset: b.iter().copied().collect() }
            }
            MapKind::Compose(maps) => {
                let inv: Option<Vec<_>> = maps.iter().rev().map(MapDescriptor::inverse).collect();
                MapKind::Compose(inv?)
            }
            MapKind::ShearPlus(f) => MapKind::ShearPlusInv(f.clone()),
            MapKind::ShearMinus(f) => MapKind::ShearMinusInv(f.clone()),
            MapKind::ShearPlusInv(f) => MapKind::ShearPlus(f.clone()),
            MapKind::ShearMinusInv(f) => MapKind::ShearMinus(f.clone()),
            MapKind::Rescaled { base, n } => MapKind::Rescaled { base: Box::new(base.inverse()?), n: *n },
            _ => return None,
        };
        MapDescriptor::from_kind(kind).ok()
    }

    pub fn eval(&self, x: &[f64]) -> Result<Point> {
        if x.len() != self.dim_in {
            return Err(Error::DimensionMismatch { expected: self.dim_in, got: x.len() });
        }
        self.eval_unchecked(x)
    }

    fn eval_unchecked(&self, x: &[f64]) -> Result<Point> {
        Ok(match &self.kind {
            MapKind::Builtin(b) => b.eval(x),
            MapKind::Affine { matrix, offset } => matrix
                .iter()
                .zip(offset)
                .map(|(row, b)| row.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() + b)
                .collect(),
            MapKind::Sum(maps) => {
                let mut acc = vec![0.0; self.dim_out];
                for f in maps {
                    for (a, v) in acc.iter_mut().zip(f.eval_unchecked(x)?) {
                        *a += v;
                    }
                }
                acc
            }
            MapKind::Compose(maps) => {
                let mut v = x.to_vec();
                for f in maps {
                    v = f.eval_unchecked(&v)?;
                }
                v
            }
            MapKind::ShearPlus(f) | MapKind::ShearPlusInv(f) => {
                let n = f.dim_in;
                let fx = f.eval_unchecked(&x[..n])?;
                let sign = if matches!(self.kind, MapKind::ShearPlus(_)) { 1.0 } else { -1.0 };
                let mut out = x[..n].to_vec();
                out.extend(x[n..].iter().zip(&fx).map(|(y, v)| y + sign * v));
                out
            }
            MapKind::ShearMinus(f) | MapKind::ShearMinusInv(f) => {
                let n = f.dim_in;
                let fy = f.eval_unchecked(&x[n..])?;
                let sign = if matches!(self.kind, MapKind::ShearMinus(_)) { 1.0 } else { -1.0 };
                let mut out: Point = x[..n].iter().zip(&fy).map(|(a, v)| a + sign * v).collect();
                out.extend_from_slice(&x[n..]);
                out
            }
            MapKind::Extension(t) => t.eval(x),
            MapKind::Rescaled { base, n } => {
                let n = *n as f64;
                let y: Point = x.iter().map(|v| v / n).collect();
                base.eval_unchecked(&y)?.into_iter().map(|v| v * n).collect()
            }
            MapKind::Expr { expr, .. } => {
                vec![expr.eval(x).map_err(|e| Error::Eval(e.0))?]
            }
        })
    }
}

pub(crate) fn expr_map(src: String, e: Expr, dim_in: usize) -> Result<MapDescriptor> {
    if dim_in == 0 || dim_in > 9 {
        return Err(Error::InvalidParameter(format!("dim_in must lie in 1..=9, got {dim_in}")));
    }
    let k = e.arity();
    if k > dim_in {
        return Err(Error::Eval(format!("unbound variable x{k} (dim_in = {dim_in})")));
    }
    let mut f = MapDescriptor::from_kind(MapKind::Expr { src, expr: e })?;
    f.dim_in = dim_in;
    let lip = estimate_on_ball(&f, 2000, LIP_SEED);
    f.lip_upper = Some(lip);
    Ok(f)
}

fn ball_point(rng: &mut ChaCha8Rng, n: usize) -> Point {
    loop {
        let p: Point = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        if norm(&p) <= 1.0 {
            return p;
        }
    }
}

/// Largest difference quotient over random pairs from the unit ball;
/// pairs where evaluation fails are skipped.
fn estimate_on_ball(f: &MapDescriptor, pairs: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0.0f64;
    for _ in 0..pairs {
        let x = ball_point(&mut rng, f.dim_in);
        let y = ball_point(&mut rng, f.dim_in);
        let d = dist(&x, &y);
        if d == 0.0 {
            continue;
        }
        if let (Ok(fx), Ok(fy)) = (f.eval(&x), f.eval(&y)) {
            best = best.max(dist(&fx, &fy) / d);
        }
    }
    best
}

// ---- wire format ----

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MapRepr {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    params: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    src: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dim_in: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    inverse: Option<Box<MapDescriptor>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lip_upper: Option<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AffineParams {
    matrix: Vec<Vec<f64>>,
    offset: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MapsParams {
    maps: Vec<MapDescriptor>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ShearParams {
    f: Box<MapDescriptor>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RescaledParams {
    base: Box<MapDescriptor>,
    n: u64,
}

fn params<T: serde::de::DeserializeOwned>(kind: &str, p: Option<Value>) -> Result<T> {
    let p = p.ok_or_else(|| Error::InvalidParameter(format!("kind '{kind}' requires params")))?;
    serde_json::from_value(p).map_err(|e| Error::InvalidParameter(format!("params of '{kind}': {e}")))
}

impl TryFrom<MapRepr> for MapDescriptor {
    type Error = Error;

    fn try_from(r: MapRepr) -> Result<Self> {
        if r.kind != "expr" && (r.src.is_some() || r.dim_in.is_some()) {
            return Err(Error::InvalidParameter(format!("src/dim_in are only valid for kind 'expr', not '{}'", r.kind)));
        }
        let k = r.kind.as_str();
        let mut f = match k {
            "builtin" => MapDescriptor::builtin(params(k, r.params)?)?,
            "affine" => {
                let p: AffineParams = params(k, r.params)?;
                MapDescriptor::affine(p.matrix, p.offset)?
            }
            "sum" => MapDescriptor::sum(params::<MapsParams>(k, r.params)?.maps)?,
            "compose" => MapDescriptor::compose(params::<MapsParams>(k, r.params)?.maps)?,
            "shear_plus" => MapDescriptor::from_kind(MapKind::ShearPlus(params::<ShearParams>(k, r.params)?.f))?,
            "shear_minus" => MapDescriptor::from_kind(MapKind::ShearMinus(params::<ShearParams>(k, r.params)?.f))?,
            "shear_plus_inv" => MapDescriptor::from_kind(MapKind::ShearPlusInv(params::<ShearParams>(k, r.params)?.f))?,
            "shear_minus_inv" => MapDescriptor::from_kind(MapKind::ShearMinusInv(params::<ShearParams>(k, r.params)?.f))?,
            "extension" => MapDescriptor::extension(params(k, r.params)?)?,
            "rescaled" => {
                let p: RescaledParams = params(k, r.params)?;
                MapDescriptor::from_kind(MapKind::Rescaled { base: p.base, n: p.n })?
            }
            "expr" => {
                if r.params.is_some() {
                    return Err(Error::InvalidParameter("kind 'expr' takes src and dim_in, not params".into()));
                }
                let src = r.src.ok_or_else(|| Error::InvalidParameter("kind 'expr' requires src".into()))?;
                let dim_in = r.dim_in.ok_or_else(|| Error::InvalidParameter("kind 'expr' requires dim_in".into()))?;
                MapDescriptor::from_expr(&src, dim_in)?
            }
            other => return Err(Error::InvalidParameter(format!("unknown map kind '{other}'"))),
        };
        if let Some(l) = r.lip_upper {
            f.lip_upper = Some(l);
        }
        if let Some(inv) = r.inverse {
            f = f.with_inverse(*inv)?;
        }
        Ok(f)
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("map params serialize")
}

impl From<&MapDescriptor> for MapRepr {
    fn from(f: &MapDescriptor) -> Self {
        let (kind, params, src, dim_in) = match &f.kind {
            MapKind::Builtin(b) => ("builtin", Some(to_value(b)), None, None),
            MapKind::Affine { matrix, offset } => (
                "affine",
                Some(to_value(&AffineParams { matrix: matrix.clone(), offset: offset.clone() })),
                None,
                None,
            ),
            MapKind::Sum(maps) => ("sum", Some(to_value(&MapsParams { maps: maps.clone() })), None, None),
            MapKind::Compose(maps) => ("compose", Some(to_value(&MapsParams { maps: maps.clone() })), None, None),
            MapKind::ShearPlus(g) => ("shear_plus", Some(to_value(&ShearParams { f: g.clone() })), None, None),
            MapKind::ShearMinus(g) => ("shear_minus", Some(to_value(&ShearParams { f: g.clone() })), None, None),
            MapKind::ShearPlusInv(g) => ("shear_plus_inv", Some(to_value(&ShearParams { f: g.clone() })), None, None),
            MapKind::ShearMinusInv(g) => ("shear_minus_inv", Some(to_value(&ShearParams { f: g.clone() })), None, None),
            MapKind::Extension(t) => ("extension", Some(to_value(t)), None, None),
            MapKind::Rescaled { base, n } => (
                "rescaled",
                Some(to_value(&RescaledParams { base: base.clone(), n: *n })),
                None,
                None,
            ),
            MapKind::Expr { src, .. } => ("expr", None, Some(src.clone()), Some(f.dim_in)),
        };
        MapRepr {
            kind: kind.to_string(),
            params,
            src,
            dim_in,
            inverse: f.inverse.clone(),
            lip_upper: f.lip_upper,
        }
    }
}

impl Serialize for MapDescriptor {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MapRepr::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for MapDescriptor {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = MapRepr::deserialize(d)?;
        MapDescriptor::try_from(r).map_err(serde::de::Error::custom)
    }
}
