//! The twelve acceptance criteria, one line of output each.
//!
//! Run with `cargo test -p germlab-cli --test acceptance`.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use germlab::direction::{estimate_direction_set, sphere_hausdorff};
use germlab::examples::{
    blowup_region_defect, gen_blowup_image, gen_zigzag, linear_oracle, shell_sampled_ray, transpose_zigzag,
    union_sampled, zigzag_shear, LinearKind,
};
use germlab::linalg::{dist, Point};
use germlab::lipschitz::{
    default_grid, doubling_composite, doubling_defect, empirical_constant, extend_map, pseudo_derivative,
    whitney_extend, ExtensionSpec,
};
use germlab::map::{Builtin, ExtensionMode};
use germlab::sequence::{seq_product, seq_sum, SequenceGerm, SequenceRule};
use germlab::shapes::ImageGerm;
use germlab::ssp::{
    polynomial_boundedness_test, ssp_definition_oracle, ssp_distance_test, ssp_ratio_test, Verdict,
};
use germlab::transversality::{
    check_cone_invariance, check_dimension_equality, check_weak_transversality_preservation, HarnessConfig,
};
use germlab::{DirectionSet, GermOracle, MapDescriptor, SampledGerm, ScaleSchedule, UnitVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

type Outcome = Result<String, String>;
type Germ = Arc<dyn GermOracle>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn e<T, E: std::fmt::Debug>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|x| format!("{x:?}"))
}

fn ulps(a: f64, b: f64) -> u64 {
    (a.to_bits() as i64 - b.to_bits() as i64).unsigned_abs()
}

fn seq(rule: SequenceRule) -> SequenceGerm {
    SequenceGerm::from_rule(rule).unwrap()
}

// 1 -------------------------------------------------------------------------

fn sequence_matrix() -> Outcome {
    let h = 10_000;
    let cases = [
        ("harmonic", SequenceRule::Harmonic, true),
        ("log_ratio", SequenceRule::LogRatio, true),
        ("power_sqrt", SequenceRule::PowerSqrt, true),
        ("pb_not_ssp", SequenceRule::PbNotSsp { i_max: 5 }, false),
        ("geometric", SequenceRule::Geometric { q: 0.5 }, false),
    ];
    for (name, rule, ssp) in cases {
        let a = seq(rule);
        let r = e(ssp_ratio_test(&a, h, 1e-2, h / 10))?.result.verdict;
        let d = e(ssp_definition_oracle(&a, h, 1e-2))?.result.verdict;
        let want = if ssp { Verdict::Satisfied } else { Verdict::Violated };
        ensure(r == want && d == want, format!("{name}: ratio {r:?}, oracle {d:?}, want {want:?}"))?;
    }
    // Geometric: a_m/a_{m+1} = 2 at every m, independent of the horizon.
    let g = seq(SequenceRule::Geometric { q: 0.5 });
    ensure((1..h).all(|m| g.ratio(m).unwrap() == 2.0), "geometric ratio not constant")?;
    let pb = |rule, k| polynomial_boundedness_test(&seq(rule), k, h).unwrap();
    let lr = pb(SequenceRule::LogRatio, 8);
    ensure(lr.witness == Some(2), format!("log_ratio witness {:?}", lr.witness))?;
    let ps = pb(SequenceRule::PowerSqrt, 8);
    ensure(!ps.bounded, "power_sqrt bounded up to k=8")?;
    let nb = pb(SequenceRule::PbNotSsp { i_max: 5 }, 8);
    ensure(nb.witness == Some(2), format!("pb_not_ssp witness {:?}", nb.witness))?;
    Ok("5 families classified; tests agree; PB witnesses 2 / none / 2".into())
}

// 2 -------------------------------------------------------------------------

fn random_ssp(rng: &mut ChaCha8Rng) -> SequenceGerm {
    let base = [SequenceRule::Harmonic, SequenceRule::LogRatio, SequenceRule::PowerSqrt];
    let mut pick = || seq(base[rng.gen_range(0..3)].clone());
    let (a, b) = (pick(), pick());
    match rng.gen_range(0..3) {
        0 => a,
        1 => seq_sum(&a, &b).unwrap(),
        _ => seq_product(&a, &b).unwrap(),
    }
}

fn semigroup() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let h = 10_000u64;
    let mut worst_ulps = 0;
    for i in 0..50 {
        let a = random_ssp(&mut rng);
        let b = random_ssp(&mut rng);
        let s = e(seq_sum(&a, &b))?;
        let p = e(seq_product(&a, &b))?;
        for (op, c) in [("sum", &s), ("product", &p)] {
            let v = e(ssp_ratio_test(c, h, 1e-2, h / 10))?.result.verdict;
            ensure(v == Verdict::Satisfied, format!("pair {i} {op}: {v:?}"))?;
        }
        for m in 1..h {
            let (ra, rb) = (a.ratio(m).unwrap(), b.ratio(m).unwrap());
            let rs = s.ratio(m).unwrap();
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            let over = if rs > hi { ulps(rs, hi) } else if rs < lo { ulps(rs, lo) } else { 0 };
            let prod = ulps(p.ratio(m).unwrap(), ra * rb);
            worst_ulps = worst_ulps.max(over).max(prod);
            ensure(over <= 1 && prod <= 1, format!("pair {i} m={m}: mediant {over} ulp, product {prod} ulp"))?;
        }
    }
    Ok(format!("50 pairs SSP under sum and product; worst termwise excess {worst_ulps} ulp"))
}

// 3 -------------------------------------------------------------------------

fn ball(rng: &mut ChaCha8Rng, n: usize, r: f64) -> Point {
    loop {
        let p: Point = (0..n).map(|_| rng.gen_range(-r..r)).collect();
        if p.iter().map(|v| v * v).sum::<f64>().sqrt() <= r {
            return p;
        }
    }
}

fn whitney() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst_lip = 0.0f64;
    for set in 0..20 {
        let n = 1 + set % 3;
        let k = rng.gen_range(2..=50);
        let anchors: Vec<(Point, f64)> = (0..k).map(|_| (ball(&mut rng, n, 1.0), rng.gen_range(-1.0..1.0))).collect();
        let pts: Vec<Point> = anchors.iter().map(|a| a.0.clone()).collect();
        let vals: Vec<Point> = anchors.iter().map(|a| vec![a.1]).collect();
        let lip = empirical_constant(&pts, &vals, true);
        let alpha = e(whitney_extend(&ExtensionSpec { anchors: anchors.clone(), lip, mode: ExtensionMode::Inf }))?;
        let beta = e(whitney_extend(&ExtensionSpec { anchors: anchors.clone(), lip, mode: ExtensionMode::Sup }))?;
        for (p, v) in &anchors {
            ensure(alpha.eval(p).unwrap()[0] == *v && beta.eval(p).unwrap()[0] == *v, format!("set {set}: restriction"))?;
        }
        // About 10³ lattice points of the unit ball.
        let grid = default_grid(n, 1.0 / [500.0, 18.0, 6.0][n - 1], 0);
        for x in &grid {
            let (a, b) = (alpha.eval(x).unwrap()[0], beta.eval(x).unwrap()[0]);
            ensure(b <= a + 1e-12, format!("set {set}: beta {b} > alpha {a}"))?;
        }
        for _ in 0..10_000 {
            let (x, y) = (ball(&mut rng, n, 1.5), ball(&mut rng, n, 1.5));
            let d = dist(&x, &y);
            for f in [&alpha, &beta] {
                let dv = (f.eval(&x).unwrap()[0] - f.eval(&y).unwrap()[0]).abs();
                worst_lip = worst_lip.max(dv - lip * d);
                ensure(dv <= lip * d + 1e-9, format!("set {set}: Lipschitz excess {}", dv - lip * d))?;
            }
        }
    }
    Ok(format!("20 anchor sets; exact on anchors; beta <= alpha on grids; worst Lipschitz excess {worst_lip:.1e}"))
}

// 4 -------------------------------------------------------------------------

fn doubling() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let z = e(gen_zigzag(1.0, 0.25, false, 12))?;
    let maps = [
        ("identity", MapDescriptor::identity(2)),
        ("2x", MapDescriptor::scale(2, 2.0)),
        ("rotation", MapDescriptor::rotation2(0.9)),
        ("zigzag shear", e(zigzag_shear(&z))?),
    ];
    let mut worst = 0.0f64;
    for (name, phi) in maps {
        let pts: Vec<Point> = (0..100).map(|_| ball(&mut rng, 2, 1.0)).collect();
        let vals: Vec<Point> = pts.iter().map(|p| phi.eval(p).unwrap()).collect();
        let fwd = e(extend_map(pts.clone(), vals.clone(), empirical_constant(&pts, &vals, true), ExtensionMode::Inf))?;
        let inv = e(extend_map(vals.clone(), pts.clone(), empirical_constant(&vals, &pts, true), ExtensionMode::Inf))?;
        let composite = e(doubling_composite(&fwd, &inv))?;
        let defect = e(doubling_defect(&composite, &pts, &vals))?;
        // Independent recomputation of the composite on each anchor.
        for (x, v) in pts.iter().zip(&vals) {
            let mut input = x.clone();
            input.extend([0.0, 0.0]);
            let mut want = vec![0.0, 0.0];
            want.extend_from_slice(v);
            ensure(dist(&composite.eval(&input).unwrap(), &want) <= 1e-9, format!("{name}: anchor {x:?}"))?;
        }
        worst = worst.max(defect);
    }
    Ok(format!("4 maps x 100 anchors; worst defect {worst:.1e}"))
}

// 5 -------------------------------------------------------------------------

/// Chain the acceptance rule over the closed-form deviations of x + x²:
/// consecutive tables differ by `max x² / 2^j = 2^{-j}` on the grid.
fn expected_indices(tol: f64, budget: u32) -> Vec<u64> {
    let mut chain = vec![1u64];
    for j in 1..=budget {
        let dev = 2f64.powi(-(j as i32));
        if dev <= tol * 2f64.powi(-(chain.len() as i32)) {
            chain.push(1 << j);
        } else {
            chain = vec![1 << j];
        }
        if chain.len() > 3 {
            break;
        }
    }
    chain
}

fn pseudo_derivative_check() -> Outcome {
    let grid = default_grid(2, 0.25, 100);
    for m in [vec![vec![2.0, 1.0], vec![0.0, 1.0]], vec![vec![0.3, -1.0], vec![1.0, 0.5]]] {
        let f = e(MapDescriptor::linear(m))?;
        let (_, rep) = e(pseudo_derivative(&f, &grid, 1e-3, 20))?;
        for (x, y) in &rep.limit_grid {
            ensure(*y == f.eval(x).unwrap(), format!("linear map not reproduced at {x:?}"))?;
        }
    }
    let sq = e(MapDescriptor::builtin(Builtin::SquarePlus { dim: 1 }))?;
    let grid1 = default_grid(1, 0.05, 100);
    let (_, r1) = e(pseudo_derivative(&sq, &grid1, 1e-3, 20))?;
    let (_, r2) = e(pseudo_derivative(&sq, &grid1, 1e-3, 20))?;
    ensure(r1.converged, "x + x^2 did not converge by budget 20")?;
    let dev = r1.limit_grid.iter().map(|(x, y)| (x[0] - y[0]).abs()).fold(0.0, f64::max);
    ensure(dev <= 1e-3, format!("limit is {dev} from the identity"))?;
    ensure(r1.indices == r2.indices, "accepted indices differ between runs")?;
    let want = expected_indices(1e-3, 20);
    ensure(r1.indices == want, format!("indices {:?}, closed form {want:?}", r1.indices))?;
    Ok(format!("linear maps exact; x + x^2 accepted {:?}, distance {dev:.1e}", r1.indices))
}

// 6 -------------------------------------------------------------------------

fn unit(v: &[f64]) -> UnitVector {
    UnitVector::new(v).unwrap()
}

fn rays(dirs: &[&[f64]]) -> LinearKind {
    let reps: Vec<UnitVector> = dirs.iter().map(|d| unit(d)).collect();
    let n = reps.len();
    LinearKind::ConeOver { directions: DirectionSet::new(dirs[0].len(), 0.05, reps, vec![1; n]).unwrap() }
}

fn builtin(b: Builtin) -> MapDescriptor {
    MapDescriptor::builtin(b).unwrap()
}

fn linear(m: Vec<Vec<f64>>) -> MapDescriptor {
    MapDescriptor::linear(m).unwrap()
}

fn cone_invariance() -> Outcome {
    let plane = LinearKind::Plane { basis: vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]] };
    let sector = LinearKind::Sector { theta1: 0.1, theta2: 0.9 };
    let l2 = linear(vec![vec![2.0, 1.0], vec![0.0, 1.0]]);
    let l3 = linear(vec![vec![1.0, 0.4, 0.0], vec![0.0, 1.5, 0.3], vec![0.2, 0.0, 1.0]]);
    let triples: Vec<(&str, LinearKind, usize, MapDescriptor)> = vec![
        ("ray / linear", LinearKind::Ray { dir: vec![1.0, 1.0] }, 16, l2.clone()),
        ("ray / bump", LinearKind::Ray { dir: vec![1.0, 0.0, 1.0] }, 16, builtin(Builtin::BumpShift { w: vec![0.0, 1.0, 0.0], delta: 0.4 })),
        ("sector / linear", sector.clone(), 128, l2.clone()),
        ("sector / radial", sector.clone(), 128, builtin(Builtin::RadialShift { w: vec![0.2, 0.1], delta: 0.5 })),
        ("sector / bump", sector, 128, builtin(Builtin::BumpShift { w: vec![-0.3, 0.5], delta: 0.5 })),
        ("plane / linear", plane.clone(), 128, l3.clone()),
        ("plane / bump", plane.clone(), 128, builtin(Builtin::BumpShift { w: vec![0.0, 0.0, 1.0], delta: 0.3 })),
        ("plane / radial", plane, 128, builtin(Builtin::RadialShift { w: vec![0.1, 0.0, 0.3], delta: 0.5 })),
        ("rays / linear", rays(&[&[1.0, 0.0], &[-0.6, 0.8], &[0.0, -1.0]]), 16, l2),
        ("rays / radial", rays(&[&[1.0, 0.0, 0.0], &[0.0, 0.6, 0.8]]), 16, builtin(Builtin::RadialShift { w: vec![0.0, 0.3, 0.0], delta: 0.4 })),
    ];
    let start = Instant::now();
    let cfg = HarnessConfig::default();
    let mut worst = 0.0f64;
    for (name, kind, per_shell, phi) in triples {
        let a = e(linear_oracle(&kind, per_shell))?;
        let b: Arc<dyn GermOracle> = Arc::new(e(ImageGerm::new(a.clone(), phi.clone()))?);
        let r = e(check_cone_invariance(a.as_ref(), b.as_ref(), &phi, &cfg))?;
        let h = r.measured.get("hausdorff").and_then(|v| v.as_f64()).unwrap_or(f64::INFINITY);
        worst = worst.max(h);
        ensure(r.pass == Some(true) && h <= 0.1, format!("{name}: pass {:?}, hausdorff {h} ({})", r.pass, r.note))?;
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs <= 60.0, format!("took {secs:.1}s"))?;
    Ok(format!("10 triples; worst two-sided Hausdorff {worst:.3}; {secs:.1}s"))
}

// 7 -------------------------------------------------------------------------

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_germlab"))
}

fn zigzag_obstruction() -> Outcome {
    let s = ScaleSchedule::default();
    let z = e(gen_zigzag(1.0, 0.25, false, 30))?;
    ensure(z.lip.is_some_and(|l| (l - 4.0 / 3.0).abs() < 1e-12), "profile Lipschitz constant")?;
    let phi = e(zigzag_shear(&z))?;
    let axis = e(linear_oracle(&LinearKind::Ray { dir: vec![1.0, 0.0] }, 16))?;
    let img: Arc<dyn GermOracle> = Arc::new(e(ImageGerm::new(axis, phi.clone()))?);
    let d = e(estimate_direction_set(img.as_ref(), &s, 0.05))?;
    let v_img = e(ssp_distance_test(img.as_ref(), &d, &s, 0.05))?;
    ensure(v_img.result.verdict == Verdict::Violated, format!("phi(l): {:?}", v_img.result.verdict))?;
    let good = e(gen_zigzag(1.0, 0.25, true, 30))?;
    let d = e(estimate_direction_set(good.germ.as_ref(), &s, 0.05))?;
    let v_good = e(ssp_distance_test(good.germ.as_ref(), &d, &s, 0.05))?;
    ensure(v_good.result.verdict == Verdict::Satisfied, format!("SSP zigzag: {:?}", v_good.result.verdict))?;

    // Exit-code paths of the binary.
    let dir = e(tempfile::tempdir())?;
    let germ = dir.path().join("phi_line.json");
    let spec = json!({ "kind": "image", "base": { "kind": "linear", "shape": { "kind": "ray", "dir": [1.0, 0.0] } }, "map": phi });
    e(std::fs::write(&germ, spec.to_string()))?;
    let st = e(bin().args(["ssp-germ", "--germ"]).arg(&germ).arg("--out").arg(dir.path().join("g")).status())?;
    ensure(st.code() == Some(1), format!("ssp-germ on phi(l) exited {:?}", st.code()))?;
    let st = e(bin().args(["demo", "zigzag-obstruction", "--out"]).arg(dir.path().join("demo")).status())?;
    ensure(st.code() == Some(0), format!("demo exited {:?}", st.code()))?;
    Ok(format!(
        "phi(l) violated (max q {:.2}); SSP zigzag satisfied (max q {:.3}); CLI exits 1 and 0",
        v_img.per_rep.iter().map(|r| r.max_q).fold(0.0, f64::max),
        v_good.per_rep.iter().map(|r| r.max_q).fold(0.0, f64::max)
    ))
}

// 8 -------------------------------------------------------------------------

fn blowup() -> Outcome {
    let c = 1.0;
    let z = e(gen_zigzag(c, 0.25, false, 30))?;
    let img = e(gen_blowup_image(&e(transpose_zigzag(&z))?))?;
    // Pointwise, without the library helper: 0 <= x <= c y².
    for p in img.points() {
        ensure(p[0] >= 0.0 && p[0].abs() <= c * p[1] * p[1], format!("point {p:?} outside the region"))?;
    }
    ensure(blowup_region_defect(&img, c) <= 0.0, "region defect")?;
    let d = e(estimate_direction_set(&img, &ScaleSchedule::default(), 0.05))?;
    let up = e(DirectionSet::new(2, 0.05, vec![unit(&[0.0, 1.0])], vec![1]))?;
    let h = e(sphere_hausdorff(&d, &up))?;
    ensure(h <= 0.05, format!("direction set is {h} from (0,1)"))?;
    Ok(format!("{} points in |x| <= c y^2; Hausdorff to (0,1) {h:.1e}", img.points().len()))
}

// 9 -------------------------------------------------------------------------

fn well_conditioned(rng: &mut ChaCha8Rng) -> MapDescriptor {
    loop {
        let m: Vec<Vec<f64>> = (0..3)
            .map(|i| (0..3).map(|j| if i == j { 1.0 } else { 0.0 } + rng.gen_range(-0.5..0.5)).collect())
            .collect();
        let Ok(h) = MapDescriptor::linear(m) else { continue };
        let Some(inv) = h.inverse() else { continue };
        if h.lip_upper().unwrap() * inv.lip_upper().unwrap() <= 4.0 {
            return h;
        }
    }
}

fn dimension_equality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (x, y, z) = (vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]);
    let plane = |a: &Vec<f64>, b: &Vec<f64>| linear_oracle(&LinearKind::Plane { basis: vec![a.clone(), b.clone()] }, 128).unwrap();
    let line = |a: &Vec<f64>| linear_oracle(&LinearKind::Line { dir: a.clone() }, 16).unwrap();
    // (A, B, cone dim of the intersection, transverse)
    let pairs: Vec<(&str, Germ, Germ, u64, bool)> = vec![
        ("plane/plane", plane(&x, &y), plane(&y, &z), 1, true),
        ("line/plane", line(&x), plane(&y, &z), 0, true),
        ("line in plane", line(&x), plane(&x, &y), 1, false),
        ("line/line", line(&x), line(&y), 0, false),
    ];
    let cfg = HarnessConfig::default();
    let mut n = 0;
    for k in 0..5 {
        let h = well_conditioned(&mut rng);
        for (name, a, b, dim, transverse) in &pairs {
            let r = e(check_dimension_equality(a.clone(), b.clone(), &h, &cfg))?;
            let m = &r.measured;
            let src = m["cone_dim_intersection_src"].as_u64();
            let img = m["cone_dim_intersection_img"].as_u64();
            ensure(
                r.pass == Some(true) && src == Some(*dim) && img == Some(*dim),
                format!("h{k} {name}: pass {:?}, dims {src:?} / {img:?}, want {dim}", r.pass),
            )?;
            ensure(
                m["transverse_src"] == json!(transverse) && m["transverse_img"] == json!(transverse),
                format!("h{k} {name}: transversality {} / {}", m["transverse_src"], m["transverse_img"]),
            )?;
            n += 1;
        }
    }
    Ok(format!("{n} cases: intersection dimensions and transversality agree"))
}

// 10 ------------------------------------------------------------------------

fn weak_transversality() -> Outcome {
    let sec = |a: f64, b: f64| linear_oracle(&LinearKind::Sector { theta1: a, theta2: b }, 128).unwrap();
    let ray = |d: &[f64]| linear_oracle(&LinearKind::Ray { dir: d.to_vec() }, 16).unwrap();
    let plane = |a: &[f64], b: &[f64]| linear_oracle(&LinearKind::Plane { basis: vec![a.to_vec(), b.to_vec()] }, 128).unwrap();
    let pairs: Vec<(&str, Germ, Germ, bool)> = vec![
        ("rays e1, e2", ray(&[1.0, 0.0]), ray(&[0.0, 1.0]), true),
        ("separated sectors", sec(0.0, 0.5), sec(1.2, 2.0), true),
        ("ray off a sector", ray(&[-1.0, 0.2]), sec(0.0, 1.0), true),
        ("ray off a plane", ray(&[0.0, 0.0, 1.0]), plane(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]), true),
        ("skew rays", ray(&[1.0, 1.0, 0.0]), ray(&[0.0, 1.0, 1.0]), true),
        ("overlapping sectors", sec(0.0, 1.0), sec(0.5, 1.5), false),
        ("ray in a sector", ray(&[1.0, 0.5]), sec(0.0, 1.0), false),
        ("planes", plane(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]), plane(&[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]), false),
        ("ray in a plane", ray(&[1.0, 1.0, 0.0]), plane(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]), false),
        ("equal rays", ray(&[0.3, -1.0]), ray(&[0.3, -1.0]), false),
    ];
    let maps2 = [
        linear(vec![vec![1.5, 0.3], vec![-0.2, 1.0]]),
        builtin(Builtin::RadialShift { w: vec![0.1, -0.3], delta: 0.5 }),
        builtin(Builtin::BumpShift { w: vec![0.4, 0.2], delta: 0.5 }),
    ];
    let maps3 = [
        linear(vec![vec![1.0, 0.4, 0.0], vec![0.0, 1.5, 0.3], vec![0.2, 0.0, 1.0]]),
        builtin(Builtin::RadialShift { w: vec![0.1, 0.0, 0.3], delta: 0.5 }),
        builtin(Builtin::BumpShift { w: vec![0.0, 0.5, 0.5], delta: 0.5 }),
    ];
    let cfg = HarnessConfig::default();
    let mut n = 0;
    for (name, a, b, weak) in &pairs {
        let maps = if a.dim() == 2 { &maps2 } else { &maps3 };
        for (k, h) in maps.iter().enumerate() {
            let r = e(check_weak_transversality_preservation(a.clone(), b.clone(), h, &cfg))?;
            ensure(r.measured["weakly_transverse_src"] == json!(weak), format!("{name}: source predicate wrong"))?;
            ensure(r.pass == Some(true), format!("{name}, map {k}: pass {:?} ({})", r.pass, r.note))?;
            n += 1;
        }
    }
    Ok(format!("{n} cases agree (5 weakly transverse pairs, 5 not)"))
}

// 11 ------------------------------------------------------------------------

fn union_criterion() -> Outcome {
    let s = ScaleSchedule::default();
    let good = |d: &[f64]| SampledGerm::from_oracle(linear_oracle(&LinearKind::Ray { dir: d.to_vec() }, 16).unwrap().as_ref(), &s).unwrap();
    let bad = |d: &[f64]| shell_sampled_ray(d, 0.125, 1, s.min_radius()).unwrap();
    let test = |g: &SampledGerm| {
        let d = estimate_direction_set(g, &s, 0.05).unwrap();
        ssp_distance_test(g, &d, &s, 0.05).unwrap()
    };
    // One point per 1/8-shell at the geometric middle: the worst dyadic probe
    // sits 1.5 octaves from both neighbours, so q = 1 − 2^{-3/2}.
    let q_bad = 1.0 - 2f64.powf(-1.5);
    let r = test(&bad(&[1.0, 0.0]));
    let got = r.per_rep.iter().map(|p| p.max_q).fold(0.0, f64::max);
    ensure((got - q_bad).abs() < 1e-9, format!("non-SSP variant max q {got}, expected {q_bad}"))?;
    let mut lines = Vec::new();
    for (ia, ib) in [(true, true), (true, false), (false, true), (false, false)] {
        let a = if ia { good(&[1.0, 0.0]) } else { bad(&[1.0, 0.0]) };
        let b = if ib { good(&[0.0, 1.0]) } else { bad(&[0.0, 1.0]) };
        let u = e(union_sampled(&[&a, &b]))?;
        let (sa, sb, su) = (test(&a).result.is_satisfied(), test(&b).result.is_satisfied(), test(&u).result.is_satisfied());
        ensure(sa == ia && sb == ib, format!("variants misclassified: {sa} {sb}"))?;
        ensure(su == (sa && sb), format!("union {su} for parts {sa}, {sb}"))?;
        lines.push(format!("{}{}->{}", sa as u8, sb as u8, su as u8));
    }
    Ok(format!("SSP(A u B) = SSP(A) and SSP(B): {}", lines.join(" ")))
}

// 12 ------------------------------------------------------------------------

fn files(root: &Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if matches!(p.file_name().and_then(|n| n.to_str()), Some("report.json" | "evidence.csv")) {
                out.push(p.strip_prefix(root).unwrap().to_path_buf());
            }
        }
    }
    out.sort();
    out
}

fn determinism() -> Outcome {
    let dir = e(tempfile::tempdir())?;
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let st = e(bin().args(["demo", "all", "--out"]).arg(out).env_remove("GERMLAB_SEED").status())?;
        ensure(st.code() == Some(0), format!("demo all exited {:?}", st.code()))?;
    }
    let (fa, fb) = (files(&a), files(&b));
    ensure(fa == fb && !fa.is_empty(), "different file sets")?;
    for f in &fa {
        let (x, y) = (e(std::fs::read(a.join(f)))?, e(std::fs::read(b.join(f)))?);
        ensure(x == y, format!("{} differs", f.display()))?;
    }
    Ok(format!("{} report files byte-identical across two runs", fa.len()))
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 12] = [
        ("sequence classification matrix", sequence_matrix),
        ("semigroup closure", semigroup),
        ("Whitney extensions", whitney),
        ("doubling identity", doubling),
        ("pseudo-derivative", pseudo_derivative_check),
        ("tangent-cone invariance", cone_invariance),
        ("zigzag obstruction", zigzag_obstruction),
        ("blow-up example", blowup),
        ("dimension equality and transversality", dimension_equality),
        ("weak-transversality preservation", weak_transversality),
        ("union criterion", union_criterion),
        ("determinism", determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let r = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panic".into()))
        });
        let secs = t.elapsed().as_secs_f64();
        match r {
            Ok(msg) => println!("[PASS] {:>2}. {name} ({secs:.1}s): {msg}", i + 1),
            Err(msg) => {
                println!("[FAIL] {:>2}. {name} ({secs:.1}s): {msg}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    if failed.is_empty() {
        println!("acceptance: 12/12 criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
