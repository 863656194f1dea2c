//! Direction-set estimation, cones, sphere Hausdorff distance and
//! box-counting dimension.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::germ::{Cone, DirectionSet, GermOracle, ScaleSchedule, UnitVector};
use crate::linalg::{dist, lex_cmp, ls_slope, norm, Point};
use crate::map::MapDescriptor;

/// Greedy farthest-point ε-net of unit vectors.
///
/// Starts at the lexicographically smallest point and keeps adding the point
/// farthest from the current net while that distance exceeds `eps`; ties go
/// to the lexicographically smaller point. Each input point then joins its
/// nearest representative (lowest index on ties) and contributes its weight.
pub fn farthest_point_net(dim: usize, points: &[Point], weights: &[usize], eps: f64) -> DirectionSet {
    if points.is_empty() {
        return DirectionSet::empty(dim, eps);
    }
    let lex_min = |a: usize, b: usize| match lex_cmp(&points[a], &points[b]) {
        Ordering::Greater => b,
        _ => a,
    };
    let start = (1..points.len()).fold(0, lex_min);
    let mut centers = vec![start];
    let mut gap: Vec<f64> = points.iter().map(|p| dist(p, &points[start])).collect();
    loop {
        let mut best = 0;
        for i in 1..points.len() {
            match gap[i].total_cmp(&gap[best]) {
                Ordering::Greater => best = i,
                Ordering::Equal => best = lex_min(best, i),
                Ordering::Less => {}
            }
        }
        if gap[best] <= eps {
            break;
        }
        centers.push(best);
        for (g, p) in gap.iter_mut().zip(points) {
            *g = g.min(dist(p, &points[best]));
        }
    }
    let mut w = vec![0usize; centers.len()];
    for (i, p) in points.iter().enumerate() {
        let mut arg = 0;
        let mut bd = f64::INFINITY;
        for (k, &c) in centers.iter().enumerate() {
            let d = dist(p, &points[c]);
            if d < bd {
                bd = d;
                arg = k;
            }
        }
        w[arg] += weights.get(i).copied().unwrap_or(1);
    }
    let reps = centers
        .iter()
        .map(|&c| UnitVector::new(&points[c]).expect("net points are nonzero"))
        .collect();
    DirectionSet::from_parts_unchecked(dim, eps, reps, w)
}

/// Estimates `D(A)` from the finest `⌈depth/2⌉` shells of `s`.
pub fn estimate_direction_set(g: &dyn GermOracle, s: &ScaleSchedule, eps: f64) -> Result<DirectionSet> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("eps must be > 0, got {eps}")));
    }
    let mut dirs = Vec::new();
    for shell in s.fine_shells() {
        for x in g.sample(shell) {
            let n = norm(&x);
            if n > 0.0 && n.is_finite() {
                dirs.push(x.iter().map(|v| v / n).collect::<Point>());
            }
        }
    }
    if dirs.is_empty() {
        return Err(Error::NotPopulated);
    }
    Ok(farthest_point_net(g.dim(), &dirs, &[], eps))
}

pub fn cone_over(d: &DirectionSet) -> Result<Cone> {
    if d.is_empty() {
        return Err(Error::Empty("direction set"));
    }
    Ok(Cone::new_unchecked(d.clone()))
}

/// `max_{a ∈ d1} dist(a, d2)`.
pub fn one_sided_excess(d1: &DirectionSet, d2: &DirectionSet) -> Result<f64> {
    if d1.dim() != d2.dim() {
        return Err(Error::DimensionMismatch { expected: d1.dim(), got: d2.dim() });
    }
    if d1.is_empty() || d2.is_empty() {
        return Err(Error::Empty("direction set"));
    }
    Ok(d1
        .reps()
        .iter()
        .map(|a| d2.distance_to(a.as_slice()))
        .fold(0.0, f64::max))
}

/// Symmetric Hausdorff distance between representative sets.
pub fn sphere_hausdorff(d1: &DirectionSet, d2: &DirectionSet) -> Result<f64> {
    Ok(one_sided_excess(d1, d2)?.max(one_sided_excess(d2, d1)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionEstimate {
    pub dim: usize,
    pub slope: f64,
    /// Slope farther than 0.25 from an integer.
    pub warning: bool,
    /// `(δ, N(δ))` pairs.
    pub counts: Vec<(f64, usize)>,
}

/// Resolutions `16ε, 8ε, 4ε, 2ε`.
pub fn default_resolutions(eps: f64) -> Vec<f64> {
    [16.0, 8.0, 4.0, 2.0].iter().map(|k| k * eps).collect()
}

/// Number of `δ`-balls a greedy cover in lexicographic order needs.
pub fn cover_count(d: &DirectionSet, delta: f64) -> usize {
    let mut order: Vec<&[f64]> = d.reps().iter().map(UnitVector::as_slice).collect();
    order.sort_by(|a, b| lex_cmp(a, b));
    let mut covered = vec![false; order.len()];
    let mut count = 0;
    for i in 0..order.len() {
        if covered[i] {
            continue;
        }
        count += 1;
        for j in i..order.len() {
            if !covered[j] && dist(order[i], order[j]) <= delta {
                covered[j] = true;
            }
        }
    }
    count
}

/// Box-counting dimension of a direction set, rounded and clamped to
/// `[0, n−1]`. The empty set has dimension 0 here; cone dimensions are
/// handled by [`cone_dimension`].
pub fn estimate_dimension(d: &DirectionSet, resolutions: &[f64]) -> Result<DimensionEstimate> {
    if resolutions.len() < 2 {
        return Err(Error::InvalidParameter("need at least 2 resolutions".into()));
    }
    if resolutions.windows(2).any(|w| !(w[0] > w[1])) {
        return Err(Error::InvalidParameter("resolutions must be strictly decreasing".into()));
    }
    if let Some(r) = resolutions.iter().find(|&&r| !(r > d.eps())) {
        return Err(Error::InvalidParameter(format!("resolution {r} not above eps {}", d.eps())));
    }
    let counts: Vec<(f64, usize)> = resolutions.iter().map(|&r| (r, cover_count(d, r))).collect();
    if d.is_empty() {
        return Ok(DimensionEstimate { dim: 0, slope: 0.0, warning: false, counts });
    }
    let xs: Vec<f64> = counts.iter().map(|(r, _)| (1.0 / r).ln()).collect();
    let ys: Vec<f64> = counts.iter().map(|(_, n)| (*n as f64).ln()).collect();
    let slope = ls_slope(&xs, &ys);
    let top = d.dim().saturating_sub(1) as f64;
    let dim = slope.round().clamp(0.0, top) as usize;
    let warning = (slope - slope.round()).abs() > 0.25;
    Ok(DimensionEstimate { dim, slope, warning, counts })
}

/// `dim LD = dim D + 1`, and 0 for the empty set (the cone is the origin).
pub fn cone_dimension(d: &DirectionSet, resolutions: &[f64]) -> Result<(usize, DimensionEstimate)> {
    let e = estimate_dimension(d, resolutions)?;
    let dim = if d.is_empty() { 0 } else { e.dim + 1 };
    Ok((dim, e))
}

/// Normalized images `f(a)/‖f(a)‖` of the representatives, re-netted.
pub fn map_direction_set(f: &MapDescriptor, d: &DirectionSet, eps: f64) -> Result<DirectionSet> {
    let mut pts = Vec::with_capacity(d.len());
    for a in d.reps() {
        let y = f.eval(a.as_slice())?;
        let n = norm(&y);
        if !(n > 0.0) {
            return Err(Error::CollapsedDirection);
        }
        pts.push(y.iter().map(|v| v / n).collect::<Point>());
    }
    Ok(farthest_point_net(f.dim_out(), &pts, d.weights(), eps))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds(eps: f64, reps: &[[f64; 2]]) -> DirectionSet {
        let r: Vec<_> = reps.iter().map(|v| UnitVector::new(v).unwrap()).collect();
        let n = r.len();
        DirectionSet::new(2, eps, r, vec![1; n]).unwrap()
    }

    fn arc_net(a: f64, b: f64, eps: f64) -> DirectionSet {
        let pts: Vec<Point> = (0..=2000)
            .map(|i| {
                let t = a + (b - a) * i as f64 / 2000.0;
                vec![t.cos(), t.sin()]
            })
            .collect();
        farthest_point_net(2, &pts, &[], eps)
    }

    #[test]
    fn hausdorff_examples() {
        let x = ds(0.1, &[[1.0, 0.0]]);
        let y = ds(0.1, &[[0.0, 1.0]]);
        let xy = ds(0.1, &[[1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(sphere_hausdorff(&x, &x).unwrap(), 0.0);
        assert_eq!(sphere_hausdorff(&x, &y).unwrap(), 2f64.sqrt());
        assert_eq!(sphere_hausdorff(&x, &xy).unwrap(), 2f64.sqrt());
        assert!(sphere_hausdorff(&x, &DirectionSet::empty(2, 0.1)).is_err());
    }

    #[test]
    fn net_is_separated_and_covering() {
        let d = arc_net(0.0, 1.0, 0.05);
        for i in 0..d.len() {
            for j in 0..i {
                assert!(dist(d.reps()[i].as_slice(), d.reps()[j].as_slice()) > 0.05);
            }
        }
        for i in 0..=100 {
            let t = i as f64 / 100.0;
            assert!(d.distance_to(&[t.cos(), t.sin()]) <= 0.05 + 1e-3);
        }
        assert_eq!(d.weights().iter().sum::<usize>(), 2001);
    }

    #[test]
    fn sector_cone_membership() {
        let c = cone_over(&arc_net(0.0, std::f64::consts::FRAC_PI_4, 0.05)).unwrap();
        assert!(c.contains(&[1.0, 0.5]));
        assert!(!c.contains(&[0.5, 1.0]));
        assert!(cone_over(&DirectionSet::empty(2, 0.1)).is_err());
    }

    #[test]
    fn dimension_of_point_and_arc() {
        let eps = 0.05;
        let p = ds(eps, &[[1.0, 0.0]]);
        assert_eq!(estimate_dimension(&p, &default_resolutions(eps)).unwrap().dim, 0);
        let arc = arc_net(0.0, std::f64::consts::FRAC_PI_4, eps);
        let e = estimate_dimension(&arc, &default_resolutions(eps)).unwrap();
        assert_eq!(e.dim, 1, "{e:?}");
        assert!(estimate_dimension(&arc, &[0.8]).is_err());
        assert!(estimate_dimension(&arc, &[0.1, 0.2]).is_err());
        assert!(estimate_dimension(&arc, &[0.8, 0.01]).is_err());
    }

    #[test]
    fn mapping_directions() {
        let y = ds(0.1, &[[0.0, 1.0]]);
        let f = MapDescriptor::diag(vec![1.0, 3.0]).unwrap();
        let m = map_direction_set(&f, &y, 0.1).unwrap();
        assert_eq!(m.reps()[0].as_slice(), &[0.0, 1.0]);
        let r = map_direction_set(&MapDescriptor::rotation2(std::f64::consts::FRAC_PI_2), &ds(0.1, &[[1.0, 0.0]]), 0.1)
            .unwrap();
        assert!(dist(r.reps()[0].as_slice(), &[0.0, 1.0]) < 1e-15);
        let z = MapDescriptor::zero(2);
        assert_eq!(map_direction_set(&z, &y, 0.1), Err(Error::CollapsedDirection));
    }
}
