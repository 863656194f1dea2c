//! Analytic germ oracles: rays, segments and polylines, planar sectors,
//! linear subspaces, finite unions, and images under maps.
//!
//! Every sampler uses the same radial fractions in each shell, so a germ
//! invariant under `x ↦ x/2` yields samples invariant under the same map.

use std::f64::consts::TAU;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::germ::{GermOracle, Shell};
use crate::linalg::{add, dist, dot, norm, orthonormalize, scale, sub, Point};
use crate::lowdisc::{fibonacci_sphere, golden};
use crate::map::MapDescriptor;

/// Radius of the `i`-th of `n` stratified samples in `shell`, geometric in
/// the radius.
fn radius(shell: Shell, i: usize, n: usize) -> f64 {
    let f = (i as f64 + 0.5) / n as f64;
    shell.inner * (shell.outer / shell.inner).powf(f)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Piece {
    /// `{t·u : t ≥ 0}` for a unit `u`.
    Ray(Point),
    Segment(Point, Point),
}

impl Piece {
    fn nearest(&self, p: &[f64]) -> Point {
        match self {
            Piece::Ray(u) => scale(u, dot(p, u).max(0.0)),
            Piece::Segment(a, b) => {
                let d = sub(b, a);
                let dd = dot(&d, &d);
                if dd == 0.0 {
                    return a.clone();
                }
                let t = (dot(&sub(p, a), &d) / dd).clamp(0.0, 1.0);
                add(a, &scale(&d, t))
            }
        }
    }
}

/// Union of rays and segments.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentGerm {
    dim: usize,
    pieces: Vec<Piece>,
    per_shell: usize,
}

impl SegmentGerm {
    pub fn new(dim: usize, pieces: Vec<Piece>, per_shell: usize) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::Empty("segment germ"));
        }
        if per_shell == 0 {
            return Err(Error::InvalidParameter("per_shell must be >= 1".into()));
        }
        let mut fixed = Vec::with_capacity(pieces.len());
        for p in pieces {
            let ok = match &p {
                Piece::Ray(u) => u.len() == dim,
                Piece::Segment(a, b) => a.len() == dim && b.len() == dim,
            };
            if !ok {
                return Err(Error::DimensionMismatch { expected: dim, got: 0 });
            }
            fixed.push(match p {
                Piece::Ray(u) => {
                    let n = norm(&u);
                    if n == 0.0 {
                        return Err(Error::InvalidParameter("ray direction is zero".into()));
                    }
                    Piece::Ray(scale(&u, 1.0 / n))
                }
                s => s,
            });
        }
        Ok(SegmentGerm { dim, pieces: fixed, per_shell })
    }

    pub fn ray(dir: &[f64], per_shell: usize) -> Result<Self> {
        SegmentGerm::new(dir.len(), vec![Piece::Ray(dir.to_vec())], per_shell)
    }

    pub fn rays(dim: usize, dirs: &[Point], per_shell: usize) -> Result<Self> {
        SegmentGerm::new(dim, dirs.iter().cloned().map(Piece::Ray).collect(), per_shell)
    }

    /// Polyline through `corners` in order.
    pub fn polyline(corners: &[Point], per_shell: usize) -> Result<Self> {
        let dim = corners.first().map_or(0, Vec::len);
        let pieces = corners.windows(2).map(|w| Piece::Segment(w[0].clone(), w[1].clone())).collect();
        SegmentGerm::new(dim, pieces, per_shell)
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }
}

/// Parameter intervals of `a + s(b − a)`, `s ∈ [0,1]`, on which the norm lies
/// in `[lo, hi]`.
fn segment_shell_intervals(a: &[f64], b: &[f64], lo: f64, hi: f64) -> Vec<(f64, f64)> {
    let d = sub(b, a);
    let qa = dot(&d, &d);
    let qb = 2.0 * dot(a, &d);
    let qc = dot(a, a);
    if qa == 0.0 {
        let r = qc.sqrt();
        return if lo <= r && r <= hi { vec![(0.0, 1.0)] } else { vec![] };
    }
    // |x(s)|² ≤ r² holds on an interval (convex quadratic).
    let within = |r: f64| -> Option<(f64, f64)> {
        let disc = qb * qb - 4.0 * qa * (qc - r * r);
        if disc < 0.0 {
            return None;
        }
        let sq = disc.sqrt();
        Some(((-qb - sq) / (2.0 * qa), (-qb + sq) / (2.0 * qa)))
    };
    let Some((o0, o1)) = within(hi) else { return vec![] };
    let (o0, o1) = (o0.max(0.0), o1.min(1.0));
    if o0 > o1 {
        return vec![];
    }
    let mut out = Vec::new();
    match within(lo) {
        None => out.push((o0, o1)),
        Some((i0, i1)) => {
            if o0 < i0.min(o1) {
                out.push((o0, i0.min(o1)));
            }
            if i1.max(o0) < o1 {
                out.push((i1.max(o0), o1));
            }
        }
    }
    out
}

impl GermOracle for SegmentGerm {
    fn dim(&self) -> usize {
        self.dim
    }

    fn nearest(&self, p: &[f64]) -> Option<Point> {
        let mut best = f64::INFINITY;
        let mut arg = None;
        for piece in &self.pieces {
            let q = piece.nearest(p);
            let d = dist(p, &q);
            if d < best {
                best = d;
                arg = Some(q);
            }
        }
        arg
    }

    fn sample(&self, shell: Shell) -> Vec<Point> {
        let mut out = Vec::new();
        let width = shell.outer - shell.inner;
        for piece in &self.pieces {
            match piece {
                Piece::Ray(u) => {
                    for i in 0..self.per_shell {
                        out.push(scale(u, radius(shell, i, self.per_shell)));
                    }
                }
                Piece::Segment(a, b) => {
                    let len = dist(a, b);
                    for (s0, s1) in segment_shell_intervals(a, b, shell.inner, shell.outer) {
                        let count = ((self.per_shell as f64 * len * (s1 - s0) / width).ceil() as usize).max(1);
                        for j in 0..count {
                            let s = s0 + (s1 - s0) * (j as f64 + 0.5) / count as f64;
                            let x = add(a, &scale(&sub(b, a), s));
                            if shell.contains(norm(&x)) {
                                out.push(x);
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

/// Closed planar sector between polar angles `θ1 ≤ θ2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorGerm {
    theta1: f64,
    theta2: f64,
    per_shell: usize,
}

impl SectorGerm {
    pub fn new(theta1: f64, theta2: f64, per_shell: usize) -> Result<Self> {
        if !(theta1 <= theta2 && theta2 - theta1 < TAU) {
            return Err(Error::InvalidParameter(format!("need θ1 <= θ2 < θ1 + 2π, got [{theta1}, {theta2}]")));
        }
        if per_shell == 0 {
            return Err(Error::InvalidParameter("per_shell must be >= 1".into()));
        }
        Ok(SectorGerm { theta1, theta2, per_shell })
    }

    pub fn angles(&self) -> (f64, f64) {
        (self.theta1, self.theta2)
    }
}

impl GermOracle for SectorGerm {
    fn dim(&self) -> usize {
        2
    }

    fn nearest(&self, p: &[f64]) -> Option<Point> {
        let rel = (p[1].atan2(p[0]) - self.theta1).rem_euclid(TAU);
        if norm(p) == 0.0 || rel <= self.theta2 - self.theta1 {
            return Some(p.to_vec());
        }
        let (s1, c1) = self.theta1.sin_cos();
        let (s2, c2) = self.theta2.sin_cos();
        let a = Piece::Ray(vec![c1, s1]).nearest(p);
        let b = Piece::Ray(vec![c2, s2]).nearest(p);
        Some(if dist(p, &a) <= dist(p, &b) { a } else { b })
    }

    fn sample(&self, shell: Shell) -> Vec<Point> {
        let n = self.per_shell;
        (0..n)
            .map(|i| {
                let r = radius(shell, i, n);
                let th = self.theta1 + (self.theta2 - self.theta1) * golden(i as u64 + 1);
                vec![r * th.cos(), r * th.sin()]
            })
            .collect()
    }
}

/// Linear subspace spanned by up to three vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceGerm {
    dim: usize,
    basis: Vec<Point>,
    per_shell: usize,
}

impl SubspaceGerm {
    pub fn new(dim: usize, spanning: &[Point], per_shell: usize) -> Result<Self> {
        if spanning.is_empty() || spanning.len() > 3 {
            return Err(Error::InvalidParameter("subspace needs 1 to 3 spanning vectors".into()));
        }
        if let Some(v) = spanning.iter().find(|v| v.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: v.len() });
        }
        if per_shell == 0 {
            return Err(Error::InvalidParameter("per_shell must be >= 1".into()));
        }
        let basis = orthonormalize(spanning)
            .ok_or_else(|| Error::InvalidParameter("spanning vectors are linearly dependent".into()))?;
        Ok(SubspaceGerm { dim, basis, per_shell })
    }

    pub fn basis(&self) -> &[Point] {
        &self.basis
    }

    fn combine(&self, coeffs: &[f64]) -> Point {
        let mut out = vec![0.0; self.dim];
        for (c, b) in coeffs.iter().zip(&self.basis) {
            for (o, v) in out.iter_mut().zip(b) {
                *o += c * v;
            }
        }
        out
    }
}

impl GermOracle for SubspaceGerm {
    fn dim(&self) -> usize {
        self.dim
    }

    fn nearest(&self, p: &[f64]) -> Option<Point> {
        let coeffs: Vec<f64> = self.basis.iter().map(|b| dot(p, b)).collect();
        Some(self.combine(&coeffs))
    }

    fn sample(&self, shell: Shell) -> Vec<Point> {
        let n = self.per_shell;
        (0..n)
            .map(|i| {
                let r = radius(shell, i, n);
                let u: Vec<f64> = match self.basis.len() {
                    1 => vec![if i % 2 == 0 { 1.0 } else { -1.0 }],
                    2 => {
                        let th = TAU * golden(i as u64);
                        vec![th.cos(), th.sin()]
                    }
                    _ => fibonacci_sphere(i, n).to_vec(),
                };
                scale(&self.combine(&u), r)
            })
            .collect()
    }
}

/// Finite union of germs in a common ambient space.
#[derive(Clone)]
pub struct UnionGerm {
    parts: Vec<Arc<dyn GermOracle>>,
}

impl UnionGerm {
    pub fn new(parts: Vec<Arc<dyn GermOracle>>) -> Result<Self> {
        let first = parts.first().ok_or(Error::Empty("union"))?;
        let dim = first.dim();
        if let Some(p) = parts.iter().find(|p| p.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: p.dim() });
        }
        Ok(UnionGerm { parts })
    }
}

impl GermOracle for UnionGerm {
    fn dim(&self) -> usize {
        self.parts[0].dim()
    }

    fn nearest(&self, p: &[f64]) -> Option<Point> {
        let mut best = f64::INFINITY;
        let mut arg = None;
        for part in &self.parts {
            if let Some(q) = part.nearest(p) {
                let d = dist(p, &q);
                if d < best {
                    best = d;
                    arg = Some(q);
                }
            }
        }
        arg
    }

    fn sample(&self, shell: Shell) -> Vec<Point> {
        self.parts.iter().flat_map(|p| p.sample(shell)).collect()
    }
}

/// Image `h(A)` of a germ under a bi-Lipschitz map with known inverse.
///
/// `nearest(p)` is `h(nearest_A(h⁻¹ p))`, a point of `h(A)`; its distance is
/// an upper bound on the true distance (exact for isometries).
#[derive(Clone)]
pub struct ImageGerm {
    base: Arc<dyn GermOracle>,
    map: MapDescriptor,
    inverse: MapDescriptor,
    lip: f64,
    lip_inv: f64,
}

impl ImageGerm {
    pub fn new(base: Arc<dyn GermOracle>, map: MapDescriptor) -> Result<Self> {
        let inverse = map
            .inverse()
            .ok_or_else(|| Error::Precondition("image germ needs an invertible map".into()))?;
        let lip = map
            .lip_upper()
            .ok_or_else(|| Error::Precondition("image germ needs a Lipschitz bound for the map".into()))?;
        let lip_inv = inverse
            .lip_upper()
            .ok_or_else(|| Error::Precondition("image germ needs a Lipschitz bound for the inverse".into()))?;
        if map.dim_in() != base.dim() || map.dim_out() != base.dim() {
            return Err(Error::DimensionMismatch { expected: base.dim(), got: map.dim_in() });
        }
        Ok(ImageGerm { base, map, inverse, lip, lip_inv })
    }
}

impl GermOracle for ImageGerm {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn nearest(&self, p: &[f64]) -> Option<Point> {
        let pre = self.inverse.eval(p).ok()?;
        let q = self.base.nearest(&pre)?;
        self.map.eval(&q).ok()
    }

    fn sample(&self, shell: Shell) -> Vec<Point> {
        // ‖h(x)‖ ∈ [‖x‖/lip_inv, lip·‖x‖], so preimages lie in this band.
        let lo = shell.inner / self.lip.max(1e-300);
        let hi = shell.outer * self.lip_inv;
        let mut out = Vec::new();
        let mut outer = hi;
        while outer > lo {
            let inner = (outer / 2.0).max(lo);
            for x in self.base.sample(Shell { inner, outer }) {
                if let Ok(y) = self.map.eval(&x) {
                    if shell.contains(norm(&y)) {
                        out.push(y);
                    }
                }
            }
            outer = inner;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::germ::ScaleSchedule;

    #[test]
    fn ray_distance_and_samples() {
        let g = SegmentGerm::ray(&[1.0, 0.0], 4).unwrap();
        assert_eq!(g.distance(&[2.0, 3.0]), 3.0);
        assert_eq!(g.distance(&[-3.0, 4.0]), 5.0);
        let s = g.sample(Shell { inner: 0.25, outer: 0.5 });
        assert_eq!(s.len(), 4);
        assert!(s.iter().all(|p| p[1] == 0.0 && (0.25..=0.5).contains(&p[0])));
    }

    #[test]
    fn segment_samples_stay_in_shell() {
        let g = SegmentGerm::polyline(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 0.0]], 8).unwrap();
        let sh = Shell { inner: 0.3, outer: 0.8 };
        let s = g.sample(sh);
        assert!(!s.is_empty());
        for p in &s {
            assert!(sh.contains(norm(p)));
            assert!(g.distance(p) < 1e-15);
        }
    }

    #[test]
    fn sector_nearest() {
        let g = SectorGerm::new(0.0, std::f64::consts::FRAC_PI_4, 8).unwrap();
        assert_eq!(g.distance(&[1.0, 0.5]), 0.0);
        let d = g.distance(&[0.0, 1.0]);
        assert!((d - (0.5f64).sqrt()).abs() < 1e-15);
        assert_eq!(g.distance(&[-1.0, -1.0]), 2f64.sqrt());
    }

    #[test]
    fn subspace_projection() {
        let g = SubspaceGerm::new(3, &[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]], 8).unwrap();
        assert_eq!(g.distance(&[3.0, -2.0, 5.0]), 5.0);
        for p in g.sample(Shell { inner: 0.5, outer: 1.0 }) {
            assert!(p[2].abs() < 1e-15);
        }
    }

    #[test]
    fn samples_lie_on_germ_for_every_schedule_shell() {
        let s = ScaleSchedule::new(1.0, 0.5, 12).unwrap();
        let parts: Vec<Arc<dyn GermOracle>> = vec![
            Arc::new(SectorGerm::new(0.2, 1.0, 6).unwrap()),
            Arc::new(SegmentGerm::ray(&[-1.0, -1.0], 3).unwrap()),
        ];
        let g = UnionGerm::new(parts).unwrap();
        for shell in s.shells() {
            let pts = g.sample(shell);
            assert!(!pts.is_empty());
            for p in pts {
                assert!(g.distance(&p) < 1e-12 * norm(&p));
            }
        }
    }

    #[test]
    fn image_of_ray_under_rotation() {
        let base: Arc<dyn GermOracle> = Arc::new(SegmentGerm::ray(&[1.0, 0.0], 4).unwrap());
        let g = ImageGerm::new(base, MapDescriptor::rotation2(std::f64::consts::FRAC_PI_2)).unwrap();
        assert!(g.distance(&[0.0, 1.0]) < 1e-15);
        let pts = g.sample(Shell { inner: 0.25, outer: 0.5 });
        assert!(!pts.is_empty());
        assert!(pts.iter().all(|p| p[0].abs() < 1e-15 && p[1] > 0.0));
    }
}
