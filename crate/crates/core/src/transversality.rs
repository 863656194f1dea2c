//! Direction-set intersection, (weak) transversality, and hypothesis-gated
//! harnesses for tangent-cone invariance, dimension equality and
//! preservation of weak transversality under bi-Lipschitz maps.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::direction::{
    cone_dimension, default_resolutions, estimate_direction_set, farthest_point_net, one_sided_excess,
    sphere_hausdorff, DimensionEstimate,
};
use crate::error::{Error, Result};
use crate::germ::{DirectionSet, GermOracle, SampledGerm, ScaleSchedule};
use crate::linalg::{dist, dot, lex_cmp, norm, scale, Point};
use crate::lipschitz::{doubling_composite, empirical_constant, extend_map, pseudo_derivative};
use crate::map::{ExtensionMode, MapDescriptor};
use crate::shapes::ImageGerm;
use crate::ssp::{ssp_distance_test, DistanceReport, Verdict, DISTANCE_TOL};

/// Reps of either set lying within `eps` of the other, merged and re-netted
/// at `eps`, the resolution the intersection is known to. The merge is order
/// independent, so the result does not depend on argument order.
pub fn intersect_direction_sets(d1: &DirectionSet, d2: &DirectionSet, eps: f64) -> Result<DirectionSet> {
    if d1.dim() != d2.dim() {
        return Err(Error::DimensionMismatch { expected: d1.dim(), got: d2.dim() });
    }
    let mut kept: Vec<(Point, usize)> = Vec::new();
    for (a, b) in [(d1, d2), (d2, d1)] {
        for (r, w) in a.reps().iter().zip(a.weights()) {
            if b.distance_to(r.as_slice()) <= eps {
                kept.push((r.as_slice().to_vec(), *w));
            }
        }
    }
    kept.sort_by(|x, y| lex_cmp(&x.0, &y.0).then(x.1.cmp(&y.1)));
    let (pts, ws): (Vec<Point>, Vec<usize>) = kept.into_iter().unzip();
    Ok(farthest_point_net(d1.dim(), &pts, &ws, eps))
}

/// Default intersection threshold `2·max(eps1, eps2)`.
pub fn default_intersection_eps(d1: &DirectionSet, d2: &DirectionSet) -> f64 {
    2.0 * d1.eps().max(d2.eps())
}

pub fn is_weakly_transverse(da: &DirectionSet, db: &DirectionSet, eps: f64) -> Result<bool> {
    Ok(intersect_direction_sets(da, db, eps)?.is_empty())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransversalityReport {
    pub transverse: bool,
    pub ambient: usize,
    pub cone_dim_a: usize,
    pub cone_dim_b: usize,
    pub cone_dim_intersection: usize,
    pub warnings: Vec<String>,
    pub estimates: Vec<DimensionEstimate>,
}

/// `dim LD(A) + dim LD(B) − dim(LD(A) ∩ LD(B)) = n` with box-counting
/// dimensions at `resolutions` (defaults to `16ε..2ε` of each set) and the
/// intersection taken at `2·max ε`.
pub fn is_transverse(da: &DirectionSet, db: &DirectionSet, n: usize, resolutions: Option<&[f64]>) -> Result<TransversalityReport> {
    let int = intersect_direction_sets(da, db, default_intersection_eps(da, db))?;
    let res_for = |d: &DirectionSet| resolutions.map(<[f64]>::to_vec).unwrap_or_else(|| default_resolutions(d.eps()));
    let (ca, ea) = cone_dimension(da, &res_for(da))?;
    let (cb, eb) = cone_dimension(db, &res_for(db))?;
    let (ci, ei) = cone_dimension(&int, &res_for(&int))?;
    let mut warnings = Vec::new();
    for (name, e) in [("A", &ea), ("B", &eb), ("intersection", &ei)] {
        if e.warning {
            warnings.push(format!("dimension slope {:.3} of {name} is far from an integer", e.slope));
        }
    }
    Ok(TransversalityReport {
        transverse: ca + cb == n + ci,
        ambient: n,
        cone_dim_a: ca,
        cone_dim_b: cb,
        cone_dim_intersection: ci,
        warnings,
        estimates: vec![ea, eb, ei],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarnessConfig {
    pub schedule: ScaleSchedule,
    pub eps: f64,
    pub ssp_tol: f64,
    pub hausdorff_tol: f64,
    pub dphi_tol: f64,
    pub dphi_budget: u32,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        HarnessConfig {
            schedule: ScaleSchedule::default(),
            eps: 0.05,
            ssp_tol: DISTANCE_TOL,
            hausdorff_tol: 0.1,
            dphi_tol: 1e-3,
            dphi_budget: 20,
        }
    }
}

/// `{hypotheses, measured, pass}`; `pass` is `None` when the hypotheses of
/// the checked statement are not established.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarnessReport {
    pub check: String,
    pub hypotheses: BTreeMap<String, DistanceReport>,
    pub hypotheses_met: bool,
    pub measured: BTreeMap<String, Value>,
    pub pass: Option<bool>,
    pub note: String,
}

struct Analysed {
    dirs: DirectionSet,
    ssp: DistanceReport,
}

fn analyse(g: &dyn GermOracle, cfg: &HarnessConfig) -> Result<Analysed> {
    let dirs = estimate_direction_set(g, &cfg.schedule, cfg.eps)?;
    let ssp = ssp_distance_test(g, &dirs, &cfg.schedule, cfg.ssp_tol)?;
    Ok(Analysed { dirs, ssp })
}

fn sat(a: &Analysed) -> bool {
    a.ssp.result.verdict == Verdict::Satisfied
}

fn verdict_name(a: &Analysed) -> Value {
    serde_json::to_value(a.ssp.result.verdict).expect("verdict serializes")
}

fn dirs_value(d: &DirectionSet) -> Value {
    serde_json::to_value(d).expect("direction set serializes")
}

/// Sample point of `g` in the fine shells whose direction is closest to `u`.
fn witness(g: &dyn GermOracle, s: &ScaleSchedule, u: &[f64]) -> Option<Point> {
    let mut best: Option<(f64, Point)> = None;
    for shell in s.fine_shells() {
        for x in g.sample(shell) {
            let c = dot(&x, u) / norm(&x);
            if best.as_ref().is_none_or(|b| c > b.0) {
                best = Some((c, x));
            }
        }
    }
    best.map(|b| b.1)
}

/// Multiplies by the power of two that brings `‖x‖` into `[1/2, 1]`.
fn dyadic_normalize(x: &[f64]) -> Point {
    let e = norm(x).log2().ceil() as i32;
    let mut y = scale(x, 2f64.powi(-e));
    if norm(&y) > 1.0 {
        y = scale(&y, 0.5);
    }
    y
}

fn embed_second(d: &DirectionSet) -> Vec<Point> {
    d.reps()
        .iter()
        .map(|r| {
            let mut v = vec![0.0; d.dim()];
            v.extend_from_slice(r.as_slice());
            v
        })
        .collect()
}

/// Tangent-cone invariance `dφ̃̃(LD(A)) = LD(B)` for `B = φ(A)`.
///
/// `φ` is globalized by the doubling process over the samples of `A`, the
/// pseudo-derivative is taken on dyadically normalized witnesses of `D(A)`
/// embedded as `(x, 0)`, and the image directions are compared with
/// `D(B)` embedded as `(0, b)`. Both germs must pass the distance test for a
/// PASS/FAIL; when only `A` does, the one-sided excess is still measured.
pub fn check_cone_invariance(
    ga: &dyn GermOracle,
    gb: &dyn GermOracle,
    phi: &MapDescriptor,
    cfg: &HarnessConfig,
) -> Result<HarnessReport> {
    let n = ga.dim();
    if gb.dim() != n || phi.dim_in() != n || phi.dim_out() != n {
        return Err(Error::DimensionMismatch { expected: n, got: phi.dim_out() });
    }
    let a = analyse(ga, cfg)?;
    let b = analyse(gb, cfg)?;
    let mut hypotheses = BTreeMap::new();
    hypotheses.insert("ssp_a".to_string(), a.ssp.clone());
    hypotheses.insert("ssp_b".to_string(), b.ssp.clone());
    let mut measured = BTreeMap::new();
    measured.insert("verdict_a".into(), verdict_name(&a));
    measured.insert("verdict_b".into(), verdict_name(&b));
    measured.insert("directions_a".into(), dirs_value(&a.dirs));
    measured.insert("directions_b".into(), dirs_value(&b.dirs));

    // Anchors: samples of A on every shell, plus the origin.
    let sample = SampledGerm::from_oracle(ga, &cfg.schedule)?;
    let mut anchors: Vec<Point> = vec![vec![0.0; n]];
    anchors.extend(sample.points().iter().cloned());
    let values: Vec<Point> = anchors.iter().map(|x| phi.eval(x)).collect::<Result<_>>()?;
    let map_defect = anchors[1..]
        .iter()
        .zip(&values[1..])
        .map(|(_, y)| gb.distance(y) / norm(y))
        .fold(0.0, f64::max);
    measured.insert("phi_a_to_b_defect".into(), json!(map_defect));
    if map_defect > 1e-9 {
        return Err(Error::Precondition(format!("phi does not map A into B (relative defect {map_defect:e})")));
    }

    if !sat(&a) {
        return Ok(HarnessReport {
            check: "cone_invariance".into(),
            hypotheses,
            hypotheses_met: false,
            measured,
            pass: None,
            note: "A does not pass the distance test".into(),
        });
    }

    let l_fwd = empirical_constant(&anchors, &values, true);
    let l_inv = empirical_constant(&values, &anchors, true);
    let phi_ext = extend_map(anchors.clone(), values.clone(), l_fwd, ExtensionMode::Inf)?;
    let phi_inv_ext = extend_map(values, anchors, l_inv, ExtensionMode::Inf)?;
    let composite = doubling_composite(&phi_ext, &phi_inv_ext)?;

    let mut grid = Vec::with_capacity(a.dirs.len());
    for r in a.dirs.reps() {
        let x = witness(ga, &cfg.schedule, r.as_slice()).ok_or(Error::NotPopulated)?;
        let mut g = dyadic_normalize(&x);
        g.extend(std::iter::repeat_n(0.0, n));
        grid.push(g);
    }
    let (_, rescaling) = pseudo_derivative(&composite, &grid, cfg.dphi_tol, cfg.dphi_budget)?;
    let mut images = Vec::with_capacity(grid.len());
    for (_, y) in &rescaling.limit_grid {
        let m = norm(y);
        if !(m > 0.0) {
            return Err(Error::CollapsedDirection);
        }
        images.push(scale(y, 1.0 / m));
    }
    let d_image = farthest_point_net(2 * n, &images, a.dirs.weights(), cfg.eps);
    let b_embedded = farthest_point_net(2 * n, &embed_second(&b.dirs), b.dirs.weights(), cfg.eps);
    let excess = one_sided_excess(&d_image, &b_embedded)?;
    let two_sided = sphere_hausdorff(&d_image, &b_embedded)?;
    measured.insert("dphi_converged".into(), json!(rescaling.converged));
    measured.insert("dphi_indices".into(), json!(rescaling.indices));
    measured.insert("one_sided_excess".into(), json!(excess));
    measured.insert("hausdorff".into(), json!(two_sided));
    measured.insert("tol".into(), json!(cfg.hausdorff_tol));

    let (met, pass, note) = if sat(&b) {
        (true, Some(two_sided <= cfg.hausdorff_tol), "two-sided comparison; both germs pass the distance test")
    } else {
        (false, None, "B does not pass the distance test; one-sided excess recorded for reference")
    };
    Ok(HarnessReport { check: "cone_invariance".into(), hypotheses, hypotheses_met: met, measured, pass, note: note.into() })
}

fn image_germ(g: Arc<dyn GermOracle>, h: &MapDescriptor) -> Result<Arc<dyn GermOracle>> {
    Ok(Arc::new(ImageGerm::new(g, h.clone())?))
}

fn intersection_dim(d1: &DirectionSet, d2: &DirectionSet) -> Result<(usize, DirectionSet, DimensionEstimate)> {
    let int = intersect_direction_sets(d1, d2, default_intersection_eps(d1, d2))?;
    let (dim, est) = cone_dimension(&int, &default_resolutions(int.eps()))?;
    Ok((dim, int, est))
}

/// `dim(D(hA) ∩ D(hB)) = dim(D(A) ∩ D(B))` (compared as cone dimensions,
/// so an empty intersection is distinguished from a single direction).
///
/// With all four germs SSP this is an equality check, also requiring
/// transversality to agree on both sides; with only one side SSP the
/// matching inequality is checked instead.
pub fn check_dimension_equality(
    ga: Arc<dyn GermOracle>,
    gb: Arc<dyn GermOracle>,
    h: &MapDescriptor,
    cfg: &HarnessConfig,
) -> Result<HarnessReport> {
    let n = ga.dim();
    let ha = image_germ(ga.clone(), h)?;
    let hb = image_germ(gb.clone(), h)?;
    let all = [
        ("ssp_a", analyse(ga.as_ref(), cfg)?),
        ("ssp_b", analyse(gb.as_ref(), cfg)?),
        ("ssp_ha", analyse(ha.as_ref(), cfg)?),
        ("ssp_hb", analyse(hb.as_ref(), cfg)?),
    ];
    let mut hypotheses = BTreeMap::new();
    let mut measured = BTreeMap::new();
    for (k, a) in &all {
        hypotheses.insert(k.to_string(), a.ssp.clone());
        measured.insert(format!("verdict_{}", &k[4..]), verdict_name(a));
    }
    let [a, b, ha_, hb_] = &all;
    let (src_dim, src_int, src_est) = intersection_dim(&a.1.dirs, &b.1.dirs)?;
    let (img_dim, img_int, img_est) = intersection_dim(&ha_.1.dirs, &hb_.1.dirs)?;
    let t_src = is_transverse(&a.1.dirs, &b.1.dirs, n, None)?;
    let t_img = is_transverse(&ha_.1.dirs, &hb_.1.dirs, n, None)?;
    measured.insert("cone_dim_intersection_src".into(), json!(src_dim));
    measured.insert("cone_dim_intersection_img".into(), json!(img_dim));
    measured.insert("intersection_src".into(), dirs_value(&src_int));
    measured.insert("intersection_img".into(), dirs_value(&img_int));
    measured.insert("dimension_estimates".into(), json!([src_est, img_est]));
    measured.insert("transverse_src".into(), json!(t_src.transverse));
    measured.insert("transverse_img".into(), json!(t_img.transverse));
    let src_ok = sat(&a.1) && sat(&b.1);
    let img_ok = sat(&ha_.1) && sat(&hb_.1);
    let (met, pass, note) = match (src_ok, img_ok) {
        (true, true) => (
            true,
            Some(src_dim == img_dim && t_src.transverse == t_img.transverse),
            "all four germs pass the distance test: equality of dimensions and of transversality",
        ),
        (true, false) => (true, Some(img_dim >= src_dim), "only A, B pass: checking dim image >= dim source"),
        (false, true) => (true, Some(src_dim >= img_dim), "only h(A), h(B) pass: checking dim source >= dim image"),
        (false, false) => (false, None, "neither side passes the distance test"),
    };
    Ok(HarnessReport { check: "dimension_equality".into(), hypotheses, hypotheses_met: met, measured, pass, note: note.into() })
}

/// Weak transversality of `A, B` agrees with that of `h(A), h(B)`, given
/// that one of `A, B` and one of `h(A), h(B)` pass the distance test.
pub fn check_weak_transversality_preservation(
    ga: Arc<dyn GermOracle>,
    gb: Arc<dyn GermOracle>,
    h: &MapDescriptor,
    cfg: &HarnessConfig,
) -> Result<HarnessReport> {
    let ha = image_germ(ga.clone(), h)?;
    let hb = image_germ(gb.clone(), h)?;
    let all = [
        ("ssp_a", analyse(ga.as_ref(), cfg)?),
        ("ssp_b", analyse(gb.as_ref(), cfg)?),
        ("ssp_ha", analyse(ha.as_ref(), cfg)?),
        ("ssp_hb", analyse(hb.as_ref(), cfg)?),
    ];
    let mut hypotheses = BTreeMap::new();
    let mut measured = BTreeMap::new();
    for (k, a) in &all {
        hypotheses.insert(k.to_string(), a.ssp.clone());
        measured.insert(format!("verdict_{}", &k[4..]), verdict_name(a));
    }
    let [a, b, ha_, hb_] = &all;
    let w_src = is_weakly_transverse(&a.1.dirs, &b.1.dirs, default_intersection_eps(&a.1.dirs, &b.1.dirs))?;
    let w_img = is_weakly_transverse(&ha_.1.dirs, &hb_.1.dirs, default_intersection_eps(&ha_.1.dirs, &hb_.1.dirs))?;
    measured.insert("weakly_transverse_src".into(), json!(w_src));
    measured.insert("weakly_transverse_img".into(), json!(w_img));
    let met = (sat(&a.1) || sat(&b.1)) && (sat(&ha_.1) || sat(&hb_.1));
    let (pass, note) = if met {
        (Some(w_src == w_img), "hypotheses met: one germ on each side passes the distance test")
    } else {
        (None, "no germ passes the distance test on at least one side")
    };
    Ok(HarnessReport {
        check: "weak_transversality".into(),
        hypotheses,
        hypotheses_met: met,
        measured,
        pass,
        note: note.into(),
    })
}

/// Transversality and weak transversality of a single pair.
pub fn transversality_summary(ga: &dyn GermOracle, gb: &dyn GermOracle, cfg: &HarnessConfig) -> Result<HarnessReport> {
    let a = analyse(ga, cfg)?;
    let b = analyse(gb, cfg)?;
    let t = is_transverse(&a.dirs, &b.dirs, ga.dim(), None)?;
    let w = is_weakly_transverse(&a.dirs, &b.dirs, default_intersection_eps(&a.dirs, &b.dirs))?;
    let mut hypotheses = BTreeMap::new();
    hypotheses.insert("ssp_a".to_string(), a.ssp.clone());
    hypotheses.insert("ssp_b".to_string(), b.ssp.clone());
    let mut measured = BTreeMap::new();
    measured.insert("transversality".into(), serde_json::to_value(&t).expect("report serializes"));
    measured.insert("weakly_transverse".into(), json!(w));
    Ok(HarnessReport {
        check: "transversality".into(),
        hypotheses,
        hypotheses_met: true,
        measured,
        pass: Some(t.transverse),
        note: "pass reports whether the pair is transverse".into(),
    })
}

/// Maximum over `points` of `‖h(p) − q‖` where `q` is the nearest image point;
/// used by callers that want to confirm a germ pair is an image pair.
pub fn image_defect(h: &MapDescriptor, points: &[Point], image: &dyn GermOracle) -> Result<f64> {
    let mut worst = 0.0f64;
    for p in points {
        let y = h.eval(p)?;
        if let Some(q) = image.nearest(&y) {
            worst = worst.max(dist(&y, &q));
        }
    }
    Ok(worst)
}
