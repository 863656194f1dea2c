//! Lipschitz constants, extremal extensions, the doubling process and the
//! rescaling pseudo-derivative.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dist, norm, Point};
use crate::lowdisc::halton;
use crate::map::{ExtensionMode, ExtensionTable, MapDescriptor};

/// Relative slack in the anchor compatibility check.
pub const COMPAT_SLACK: f64 = 1e-12;
/// Tolerance on `‖f(0)‖` for rescaling.
pub const ORIGIN_TOL: f64 = 1e-12;

/// Largest difference quotient of `f` over `pairs`; a lower bound on the
/// true constant.
pub fn estimate_lipschitz(f: &MapDescriptor, pairs: &[(Point, Point)]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::Empty("sample pairs"));
    }
    let mut best = 0.0f64;
    for (i, (x, y)) in pairs.iter().enumerate() {
        let d = dist(x, y);
        if d == 0.0 {
            return Err(Error::CoincidentPair(i));
        }
        best = best.max(dist(&f.eval(x)?, &f.eval(y)?) / d);
    }
    Ok(best)
}

/// `count` pairs of independent uniform points in the ball of radius `r`.
pub fn random_pairs(dim: usize, count: usize, r: f64, seed: u64) -> Vec<(Point, Point)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut point = || loop {
        let p: Point = (0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let n = norm(&p);
        if n <= 1.0 && n > 0.0 {
            return p.into_iter().map(|v| v * r).collect::<Point>();
        }
    };
    (0..count).map(|_| (point(), point())).collect()
}

/// Largest `‖v_i − v_j‖ / ‖p_i − p_j‖` over anchor pairs, per component
/// when `componentwise` (the constant the scalar extension needs).
pub fn empirical_constant(points: &[Point], values: &[Point], componentwise: bool) -> f64 {
    let mut best = 0.0f64;
    for i in 0..points.len() {
        for j in 0..i {
            let d = dist(&points[i], &points[j]);
            if d == 0.0 {
                continue;
            }
            let dv = if componentwise {
                values[i].iter().zip(&values[j]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
            } else {
                dist(&values[i], &values[j])
            };
            best = best.max(dv / d);
        }
    }
    best
}

/// Scalar anchors `(a, f(a))` with the constant and the extremal choice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtensionSpec {
    pub anchors: Vec<(Point, f64)>,
    #[serde(rename = "L")]
    pub lip: f64,
    pub mode: ExtensionMode,
}

fn check_compatible(points: &[Point], values: &[Point], lip: f64) -> Result<()> {
    for i in 0..points.len() {
        for j in 0..i {
            let d = dist(&points[i], &points[j]);
            for (a, b) in values[i].iter().zip(&values[j]) {
                let dv = (a - b).abs();
                if dv > lip * d * (1.0 + COMPAT_SLACK) {
                    return Err(Error::Incompatible { lip, ratio: dv / d, i: j, j: i });
                }
            }
        }
    }
    Ok(())
}

/// `α` (inf mode) or `β` (sup mode) of the anchors; rejects anchors that
/// are not `L`-compatible.
pub fn whitney_extend(spec: &ExtensionSpec) -> Result<MapDescriptor> {
    let (points, values): (Vec<Point>, Vec<Point>) =
        spec.anchors.iter().map(|(p, v)| (p.clone(), vec![*v])).unzip();
    extend_map(points, values, spec.lip, spec.mode)
}

/// Componentwise extension of a vector-valued table; the result is
/// `√m·L`-Lipschitz and that bound is recorded on the descriptor.
pub fn extend_map(points: Vec<Point>, values: Vec<Point>, lip: f64, mode: ExtensionMode) -> Result<MapDescriptor> {
    if points.is_empty() {
        return Err(Error::Empty("extension anchors"));
    }
    if points.len() != values.len() {
        return Err(Error::InvalidParameter("points and values differ in length".into()));
    }
    if !(lip >= 0.0 && lip.is_finite()) {
        return Err(Error::InvalidParameter(format!("L must be finite and >= 0, got {lip}")));
    }
    check_compatible(&points, &values, lip)?;
    MapDescriptor::extension(ExtensionTable { points, values, lip, mode })
}

/// `Y₊(f)(x, y) = (x, y + f(x))` with its exact inverse attached.
pub fn doubling_plus(f: MapDescriptor) -> Result<MapDescriptor> {
    MapDescriptor::shear_plus(f)
}

/// `Y₋(f)(x, y) = (x + f(y), y)` with its exact inverse attached.
pub fn doubling_minus(f: MapDescriptor) -> Result<MapDescriptor> {
    MapDescriptor::shear_minus(f)
}

/// `Y₋(φ̃⁻¹)⁻¹ ∘ Y₊(φ̃)`, which sends `(x, 0)` to `(0, φ(x))` on anchors.
pub fn doubling_composite(phi_ext: &MapDescriptor, phi_inv_ext: &MapDescriptor) -> Result<MapDescriptor> {
    let n = phi_ext.dim_in();
    for g in [phi_ext, phi_inv_ext] {
        if g.dim_in() != n || g.dim_out() != n {
            return Err(Error::DimensionMismatch { expected: n, got: g.dim_out() });
        }
    }
    let plus = doubling_plus(phi_ext.clone())?;
    let minus_inv = doubling_minus(phi_inv_ext.clone())?
        .inverse()
        .expect("shears carry inverses");
    MapDescriptor::compose(vec![plus, minus_inv])
}

/// `max ‖φ̃̃(x, 0) − (0, φ(x))‖` over anchors `x` with values `φ(x)`.
pub fn doubling_defect(composite: &MapDescriptor, points: &[Point], values: &[Point]) -> Result<f64> {
    let mut worst = 0.0f64;
    for (x, v) in points.iter().zip(values) {
        let mut input = x.clone();
        input.extend(std::iter::repeat_n(0.0, x.len()));
        let mut want = vec![0.0; x.len()];
        want.extend_from_slice(v);
        worst = worst.max(dist(&composite.eval(&input)?, &want));
    }
    Ok(worst)
}

/// `ψ_n(x) = n ψ(x/n)`; requires `ψ(0) = 0`.
pub fn rescale(f: &MapDescriptor, n: u64) -> Result<MapDescriptor> {
    let f0 = norm(&f.eval(&vec![0.0; f.dim_in()])?);
    if f0 > ORIGIN_TOL {
        return Err(Error::OriginNotFixed(f0));
    }
    MapDescriptor::rescaled(f.clone(), n)
}

/// Lattice of spacing `h` in the closed unit ball for `n ≤ 3`, else
/// `count` shifted Halton points in the ball (fixed seed).
pub fn default_grid(n: usize, h: f64, count: usize) -> Vec<Point> {
    if n <= 3 {
        let k = (1.0 / h).round() as i64;
        let mut out = Vec::new();
        let mut idx = vec![-k; n];
        loop {
            let p: Point = idx.iter().map(|&i| i as f64 * h).collect();
            if norm(&p) <= 1.0 + 1e-12 {
                out.push(p);
            }
            let mut d = 0;
            loop {
                if d == n {
                    return out;
                }
                idx[d] += 1;
                if idx[d] <= k {
                    break;
                }
                idx[d] = -k;
                d += 1;
            }
        }
    }
    let shift: Vec<f64> = (0..n).map(|d| crate::lowdisc::golden(d as u64 + 1)).collect();
    let mut out = Vec::with_capacity(count);
    let mut i = 0;
    while out.len() < count {
        let p: Point = halton(i, n, &shift).into_iter().map(|v| 2.0 * v - 1.0).collect();
        if norm(&p) <= 1.0 {
            out.push(p);
        }
        i += 1;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RescalingRow {
    pub j: u32,
    pub n: u64,
    /// Sup-deviation from the last accepted table (0 for the chain start).
    pub sup_deviation: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RescalingReport {
    /// Accepted `n_i` of the final chain.
    pub indices: Vec<u64>,
    pub sup_deviations: Vec<f64>,
    pub converged: bool,
    pub tol: f64,
    pub rows: Vec<RescalingRow>,
    pub limit_grid: Vec<(Point, Point)>,
}

/// Consecutive acceptances that declare convergence.
pub const ACCEPT_RUN: usize = 3;

/// Subsequential limit of `ψ_{2^j}` on `grid`, `j = 0..=budget`.
///
/// Index `j` joins the current chain when its sup-deviation from the chain's
/// last table is at most `tol · 2^{-c}`, `c` the chain length so far; a
/// rejected index starts a new chain. Convergence is [`ACCEPT_RUN`]
/// acceptances after the chain start. The limit is the last accepted
/// table, extended with `extend_map` in inf mode.
pub fn pseudo_derivative(f: &MapDescriptor, grid: &[Point], tol: f64, budget: u32) -> Result<(MapDescriptor, RescalingReport)> {
    if grid.is_empty() {
        return Err(Error::Empty("grid"));
    }
    if !(4..=62).contains(&budget) {
        return Err(Error::InvalidParameter(format!("budget must lie in 4..=62, got {budget}")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tol must be > 0, got {tol}")));
    }
    if let Some(p) = grid.iter().find(|p| p.len() != f.dim_in()) {
        return Err(Error::DimensionMismatch { expected: f.dim_in(), got: p.len() });
    }
    if let Some(p) = grid.iter().find(|p| norm(p) > 1.0 + 1e-12) {
        return Err(Error::InvalidParameter(format!("grid point {p:?} outside the unit ball")));
    }
    let table = |n: u64| -> Result<Vec<Point>> {
        let g = rescale(f, n)?;
        grid.iter().map(|x| g.eval(x)).collect()
    };
    let sup_dev = |a: &[Point], b: &[Point]| a.iter().zip(b).map(|(x, y)| dist(x, y)).fold(0.0, f64::max);

    let mut rows = vec![RescalingRow { j: 0, n: 1, sup_deviation: 0.0, accepted: true }];
    let mut chain: Vec<(u64, f64)> = vec![(1, 0.0)];
    let mut last = table(1)?;
    let mut converged = false;
    for j in 1..=budget {
        let n = 1u64 << j;
        let t = table(n)?;
        let dev = sup_dev(&t, &last);
        let accept = dev <= tol * 2f64.powi(-(chain.len() as i32));
        rows.push(RescalingRow { j, n, sup_deviation: dev, accepted: accept });
        if accept {
            chain.push((n, dev));
        } else {
            chain = vec![(n, 0.0)];
        }
        last = t;
        if chain.len() > ACCEPT_RUN {
            converged = true;
            break;
        }
    }
    let lip_f = f.lip_upper().unwrap_or(0.0);
    let lip = lip_f.max(empirical_constant(grid, &last, true));
    let limit = extend_map(grid.to_vec(), last.clone(), lip, ExtensionMode::Inf)?;
    let report = RescalingReport {
        indices: chain.iter().map(|c| c.0).collect(),
        sup_deviations: chain.iter().map(|c| c.1).collect(),
        converged,
        tol,
        rows,
        limit_grid: grid.iter().cloned().zip(last).collect(),
    };
    Ok((limit, report))
}
