//! Named end-to-end examples. Each writes a report directory and exits
//! 0 when the documented behavior is reproduced.

use std::sync::Arc;

use anyhow::{bail, Result};
use germlab::direction::{estimate_direction_set, sphere_hausdorff};
use germlab::examples::{
    blowup_region_defect, gen_blowup_image, gen_sequence, gen_zigzag, linear_oracle, shell_sampled_ray,
    transpose_zigzag, union_sampled, zigzag_shear, LinearKind, SequenceFamily,
};
use germlab::lipschitz::{
    default_grid, doubling_composite, doubling_defect, empirical_constant, extend_map, pseudo_derivative,
    whitney_extend, ExtensionSpec,
};
use germlab::map::{Builtin, ExtensionMode};
use germlab::sequence::{seq_product, seq_sum, SequenceGerm, SequenceRule};
use germlab::shapes::ImageGerm;
use germlab::ssp::{polynomial_boundedness_test, ssp_definition_oracle, ssp_distance_test, ssp_ratio_test, Verdict};
use germlab::transversality::{
    check_cone_invariance, check_dimension_equality, check_weak_transversality_preservation, HarnessConfig,
};
use germlab::{DirectionSet, GermOracle, MapDescriptor, ScaleSchedule, UnitVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::commands::{distance_evidence, distance_table, harness_artifacts, Outcome, Run};
use crate::report::{num, Artifacts, Table};
use crate::svg::{direction_plot, line_chart, Series};

pub const DEMOS: [(&str, &str); 13] = [
    ("sequences", "classification of the five null-sequence families"),
    ("semigroup", "sums and products of sequences with the selection property"),
    ("cone-ssp", "linear cones have the selection property"),
    ("manifold-tangent", "the real tangent cone of a smooth curve is its tangent line"),
    ("blowup", "image of a chart curve under (X, Y) -> (XY, Y)"),
    ("union", "a union of two rays has the property iff both parts do"),
    ("zigzag-obstruction", "a Lipschitz zigzag image of a line fails the selection property"),
    ("whitney", "extremal Lipschitz extensions of random anchors"),
    ("doubling", "globalizing a bi-Lipschitz map by two shears"),
    ("pseudo-derivative", "rescaling limit of x + x^2"),
    ("cone-invariance", "tangent cones follow a bi-Lipschitz map"),
    ("dim-equality", "intersection dimensions survive a linear change of coordinates"),
    ("weak-transversality", "disjoint direction sets stay disjoint"),
];

pub fn run(name: &str, seed: u64) -> Result<Run> {
    match name {
        "sequences" => sequences(),
        "semigroup" => semigroup(seed),
        "cone-ssp" => cone_ssp(),
        "manifold-tangent" => manifold_tangent(),
        "blowup" => blowup(),
        "union" => union(),
        "zigzag-obstruction" => zigzag_obstruction(),
        "whitney" => whitney(seed),
        "doubling" => doubling(),
        "pseudo-derivative" => pseudo(),
        "cone-invariance" => cone_invariance(),
        "dim-equality" => dim_equality(),
        "weak-transversality" => weak_transversality(),
        other => bail!("unknown demo '{other}'; try `germlab demo list`"),
    }
}

fn pass_if(ok: bool) -> Outcome {
    if ok {
        Outcome::Pass
    } else {
        Outcome::Fail
    }
}

fn verdict_str(v: Verdict) -> String {
    serde_json::to_value(v).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
}

fn sequences() -> Result<Run> {
    let expect_ssp = [true, true, true, false, false];
    let mut rows = Vec::new();
    let mut t = Table::new(&["family", "ratio_verdict", "ratio_basis", "oracle_verdict", "pb_witness", "expected_ssp"]);
    let mut ok = true;
    let mut curves = Vec::new();
    for ((name, fam), want) in SequenceFamily::all_default().into_iter().zip(expect_ssp) {
        let a = gen_sequence(&fam)?;
        let r = ssp_ratio_test(&a, 10_000, 1e-2, 1000)?;
        let d = ssp_definition_oracle(&a, 10_000, 1e-2)?;
        let pb = polynomial_boundedness_test(&a, 8, 10_000)?;
        let want_v = if want { Verdict::Satisfied } else { Verdict::Violated };
        ok &= r.result.verdict == want_v && d.result.verdict == want_v;
        t.push([
            name.to_string(),
            verdict_str(r.result.verdict),
            serde_json::to_value(r.result.basis)?.as_str().unwrap_or_default().to_string(),
            verdict_str(d.result.verdict),
            pb.witness.map(|k| k.to_string()).unwrap_or_else(|| "none".into()),
            want.to_string(),
        ]);
        let pts: Vec<(f64, f64)> = (1..=10_000u64)
            .step_by(7)
            .map(|m| Ok((m as f64, a.ratio(m)? - 1.0)))
            .collect::<germlab::Result<_>>()?;
        curves.push((name, pts));
        rows.push(json!({ "family": name, "ratio_test": r, "definition_oracle": d, "polynomially_bounded": pb }));
    }
    let mut art = Artifacts::new(&json!({ "demo": "sequences", "families": rows, "pass": ok }))?;
    art.evidence = t;
    let series: Vec<Series> = curves.iter().map(|(n, p)| Series { label: n, points: p.clone() }).collect();
    art.plots.push(("ratios".into(), line_chart("a_m/a_(m+1) - 1", "m", "ratio - 1", &series, true, true)));
    Ok((pass_if(ok), art))
}

fn random_ssp(rng: &mut ChaCha8Rng) -> Result<SequenceGerm> {
    let base = [SequenceRule::Harmonic, SequenceRule::LogRatio, SequenceRule::PowerSqrt];
    let pick = |rng: &mut ChaCha8Rng| SequenceGerm::from_rule(base[rng.gen_range(0..3)].clone());
    Ok(match rng.gen_range(0..3) {
        0 => pick(rng)?,
        1 => seq_sum(&pick(rng)?, &pick(rng)?)?,
        _ => seq_product(&pick(rng)?, &pick(rng)?)?,
    })
}

fn semigroup(seed: u64) -> Result<Run> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Table::new(&["pair", "op", "verdict", "basis"]);
    let mut ok = true;
    for i in 0..10 {
        let a = random_ssp(&mut rng)?;
        let b = random_ssp(&mut rng)?;
        for (op, s) in [("sum", seq_sum(&a, &b)?), ("product", seq_product(&a, &b)?)] {
            let r = ssp_ratio_test(&s, 10_000, 1e-2, 1000)?;
            ok &= r.result.verdict == Verdict::Satisfied;
            t.push([i.to_string(), op.into(), verdict_str(r.result.verdict), serde_json::to_value(r.result.basis)?.as_str().unwrap_or_default().into()]);
        }
    }
    let mut art = Artifacts::new(&json!({ "demo": "semigroup", "seed": seed, "pairs": 10, "pass": ok }))?;
    art.evidence = t;
    Ok((pass_if(ok), art))
}

fn germ_row(label: &str, g: &dyn GermOracle, s: &ScaleSchedule, t: &mut Table) -> Result<(DirectionSet, Value, Verdict)> {
    let d = estimate_direction_set(g, s, 0.05)?;
    let r = ssp_distance_test(g, &d, s, 0.05)?;
    distance_evidence(label, &r, t);
    let v = r.result.verdict;
    Ok((d.clone(), json!({ "germ": label, "directions": d, "distance_test": r }), v))
}

fn cone_ssp() -> Result<Run> {
    let s = ScaleSchedule::default();
    let mut t = distance_table();
    let sector = linear_oracle(&LinearKind::Sector { theta1: 0.3, theta2: 1.2 }, 128)?;
    let rays = linear_oracle(
        &LinearKind::ConeOver {
            directions: DirectionSet::new(
                2,
                0.05,
                vec![UnitVector::new(&[1.0, 0.0])?, UnitVector::new(&[-0.6, 0.8])?],
                vec![1, 1],
            )?,
        },
        16,
    )?;
    let (d1, r1, v1) = germ_row("sector", sector.as_ref(), &s, &mut t)?;
    let (d2, r2, v2) = germ_row("two_rays", rays.as_ref(), &s, &mut t)?;
    let ok = v1 == Verdict::Satisfied && v2 == Verdict::Satisfied;
    let mut art = Artifacts::new(&json!({ "demo": "cone-ssp", "germs": [r1, r2], "pass": ok }))?;
    art.evidence = t;
    let (a, b) = (reps(&d1), reps(&d2));
    art.plots.push(("directions".into(), direction_plot("direction sets of two cones", &[("sector", &a), ("two rays", &b)])));
    Ok((pass_if(ok), art))
}

fn reps(d: &DirectionSet) -> Vec<Vec<f64>> {
    d.reps().iter().map(|r| r.as_slice().to_vec()).collect()
}

fn manifold_tangent() -> Result<Run> {
    let s = ScaleSchedule::default();
    let line = linear_oracle(&LinearKind::Line { dir: vec![1.0, 0.0] }, 16)?;
    let bend = MapDescriptor::shear_plus(MapDescriptor::from_expr("x^2 - x^3", 1)?)?;
    let curve: Arc<dyn GermOracle> = Arc::new(ImageGerm::new(line, bend)?);
    let mut t = distance_table();
    let (d, row, v) = germ_row("curve", curve.as_ref(), &s, &mut t)?;
    let tangent = DirectionSet::new(2, 0.05, vec![UnitVector::new(&[1.0, 0.0])?, UnitVector::new(&[-1.0, 0.0])?], vec![1, 1])?;
    let h = sphere_hausdorff(&d, &tangent)?;
    let ok = v == Verdict::Satisfied && h <= 0.1;
    let mut art = Artifacts::new(&json!({ "demo": "manifold-tangent", "curve": "y = x^2 - x^3", "germ": row, "hausdorff_to_tangent": h, "pass": ok }))?;
    art.evidence = t;
    let (a, b) = (reps(&d), reps(&tangent));
    art.plots.push(("directions".into(), direction_plot("curve directions vs tangent line", &[("D(A)", &a), ("tangent", &b)])));
    Ok((pass_if(ok), art))
}

fn blowup() -> Result<Run> {
    let z = gen_zigzag(1.0, 0.25, false, 30)?;
    let img = gen_blowup_image(&transpose_zigzag(&z)?)?;
    let defect = blowup_region_defect(&img, 1.0);
    let d = estimate_direction_set(&img, &ScaleSchedule::default(), 0.05)?;
    let vertical = DirectionSet::new(2, 0.05, vec![UnitVector::new(&[0.0, 1.0])?], vec![1])?;
    let h = sphere_hausdorff(&d, &vertical)?;
    let ok = defect <= 0.0 && h <= 0.05;
    let mut art = Artifacts::new(&json!({
        "demo": "blowup", "c": 1.0, "region_defect": defect, "directions": d, "hausdorff_to_vertical": h, "pass": ok
    }))?;
    let mut t = Table::new(&["x", "y"]);
    for p in img.points() {
        t.push([num(p[0]), num(p[1])]);
    }
    art.evidence = t;
    let dr = reps(&d);
    art.plots.push(("directions".into(), direction_plot("direction set of the blow-up image", &[("D", &dr)])));
    Ok((pass_if(ok), art))
}

fn union() -> Result<Run> {
    let s = ScaleSchedule::default();
    let good = |dir: &[f64]| -> Result<germlab::SampledGerm> {
        Ok(germlab::SampledGerm::from_oracle(linear_oracle(&LinearKind::Ray { dir: dir.to_vec() }, 16)?.as_ref(), &s)?)
    };
    let bad = |dir: &[f64]| shell_sampled_ray(dir, 0.125, 1, s.min_radius());
    let (e1, e2) = ([1.0, 0.0], [0.0, 1.0]);
    let mut t = distance_table();
    let mut rows = Vec::new();
    let mut ok = true;
    for (ia, ib) in [(true, true), (true, false), (false, true), (false, false)] {
        let a = if ia { good(&e1)? } else { bad(&e1)? };
        let b = if ib { good(&e2)? } else { bad(&e2)? };
        let u = union_sampled(&[&a, &b])?;
        let label = format!("{}{}", if ia { "S" } else { "N" }, if ib { "S" } else { "N" });
        let (_, _, va) = germ_row(&format!("{label}_A"), &a, &s, &mut t)?;
        let (_, _, vb) = germ_row(&format!("{label}_B"), &b, &s, &mut t)?;
        let (_, row, vu) = germ_row(&format!("{label}_union"), &u, &s, &mut t)?;
        let expect = va == Verdict::Satisfied && vb == Verdict::Satisfied;
        ok &= (vu == Verdict::Satisfied) == expect && va == pass_verdict(ia) && vb == pass_verdict(ib);
        rows.push(json!({ "combo": label, "verdict_a": va, "verdict_b": vb, "union": row }));
    }
    let mut art = Artifacts::new(&json!({ "demo": "union", "combinations": rows, "pass": ok }))?;
    art.evidence = t;
    Ok((pass_if(ok), art))
}

fn pass_verdict(ssp: bool) -> Verdict {
    if ssp {
        Verdict::Satisfied
    } else {
        Verdict::Violated
    }
}

fn zigzag_obstruction() -> Result<Run> {
    let s = ScaleSchedule::default();
    let lip = gen_zigzag(1.0, 0.25, false, 30)?;
    let ssp = gen_zigzag(1.0, 0.25, true, 30)?;
    // φ(ℓ) for φ = Y₊(f): the image of the positive axis.
    let phi = zigzag_shear(&lip)?;
    let axis = linear_oracle(&LinearKind::Ray { dir: vec![1.0, 0.0] }, 16)?;
    let image: Arc<dyn GermOracle> = Arc::new(ImageGerm::new(axis, phi)?);
    let mut t = distance_table();
    let (d_img, r_img, v_img) = germ_row("phi_of_line", image.as_ref(), &s, &mut t)?;
    let (d_ssp, r_ssp, v_ssp) = germ_row("ssp_zigzag", ssp.germ.as_ref(), &s, &mut t)?;
    let ok = v_img == Verdict::Violated && v_ssp == Verdict::Satisfied;
    let mut art = Artifacts::new(&json!({
        "demo": "zigzag-obstruction",
        "profile_lipschitz": lip.lip,
        "corner_ratio": 0.25,
        "phi_of_line": r_img,
        "ssp_zigzag": r_ssp,
        "pass": ok,
    }))?;
    art.evidence = t;
    let zz: Vec<(f64, f64)> = lip.corners.iter().take(12).map(|p| (p[0], p[1])).collect();
    let sz: Vec<(f64, f64)> = ssp.corners.iter().take(60).map(|p| (p[0], p[1])).collect();
    art.plots.push((
        "zigzags".into(),
        line_chart("zigzag curves (outer corners)", "x", "y", &[Series { label: "Lipschitz profile", points: zz }, Series { label: "SSP zigzag", points: sz }], false, false),
    ));
    let (a, b) = (reps(&d_img), reps(&d_ssp));
    art.plots.push(("directions".into(), direction_plot("estimated directions", &[("phi(l)", &a), ("SSP zigzag", &b)])));
    Ok((pass_if(ok), art))
}

fn whitney(seed: u64) -> Result<Run> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let anchors: Vec<(Vec<f64>, f64)> = (0..12).map(|_| (vec![rng.gen_range(-1.0..1.0)], rng.gen_range(-1.0..1.0))).collect();
    let pts: Vec<Vec<f64>> = anchors.iter().map(|a| a.0.clone()).collect();
    let vals: Vec<Vec<f64>> = anchors.iter().map(|a| vec![a.1]).collect();
    let lip = empirical_constant(&pts, &vals, true);
    let alpha = whitney_extend(&ExtensionSpec { anchors: anchors.clone(), lip, mode: ExtensionMode::Inf })?;
    let beta = whitney_extend(&ExtensionSpec { anchors: anchors.clone(), lip, mode: ExtensionMode::Sup })?;
    let mut t = Table::new(&["x", "alpha", "beta"]);
    let (mut ca, mut cb) = (Vec::new(), Vec::new());
    let mut ok = true;
    for i in 0..=400 {
        let x = -1.0 + i as f64 / 200.0;
        let (a, b) = (alpha.eval(&[x])?[0], beta.eval(&[x])?[0]);
        ok &= b <= a + 1e-12;
        t.push([num(x), num(a), num(b)]);
        ca.push((x, a));
        cb.push((x, b));
    }
    for (p, v) in &anchors {
        ok &= alpha.eval(p)?[0] == *v && beta.eval(p)?[0] == *v;
    }
    let mut art = Artifacts::new(&json!({ "demo": "whitney", "seed": seed, "L": lip, "anchors": anchors, "pass": ok }))?;
    art.evidence = t;
    art.plots.push(("extensions".into(), line_chart("inf and sup extensions", "x", "value", &[Series { label: "alpha (inf)", points: ca }, Series { label: "beta (sup)", points: cb }], false, false)));
    Ok((pass_if(ok), art))
}

fn doubling() -> Result<Run> {
    let z = gen_zigzag(1.0, 0.25, false, 12)?;
    let shear = zigzag_shear(&z)?;
    let maps: Vec<(&str, MapDescriptor)> = vec![
        ("identity", MapDescriptor::identity(2)),
        ("scale_2", MapDescriptor::scale(2, 2.0)),
        ("rotation", MapDescriptor::rotation2(0.7)),
        ("zigzag_shear", shear),
    ];
    let pts: Vec<Vec<f64>> = default_grid(2, 0.2, 100).into_iter().take(100).collect();
    let mut t = Table::new(&["map", "anchors", "defect"]);
    let mut rows = Vec::new();
    let mut ok = true;
    for (name, phi) in maps {
        let vals: Vec<Vec<f64>> = pts.iter().map(|p| phi.eval(p)).collect::<germlab::Result<_>>()?;
        let fwd = extend_map(pts.clone(), vals.clone(), empirical_constant(&pts, &vals, true), ExtensionMode::Inf)?;
        let inv = extend_map(vals.clone(), pts.clone(), empirical_constant(&vals, &pts, true), ExtensionMode::Inf)?;
        let defect = doubling_defect(&doubling_composite(&fwd, &inv)?, &pts, &vals)?;
        ok &= defect <= 1e-9;
        t.push([name.into(), pts.len().to_string(), num(defect)]);
        rows.push(json!({ "map": name, "defect": defect }));
    }
    let mut art = Artifacts::new(&json!({ "demo": "doubling", "maps": rows, "pass": ok }))?;
    art.evidence = t;
    Ok((pass_if(ok), art))
}

fn pseudo() -> Result<Run> {
    let f = MapDescriptor::builtin(Builtin::SquarePlus { dim: 1 })?;
    let grid = default_grid(1, 0.05, 100);
    let (_, rep) = pseudo_derivative(&f, &grid, 1e-3, 20)?;
    let dev = rep.limit_grid.iter().map(|(x, y)| (x[0] - y[0]).abs()).fold(0.0, f64::max);
    let ok = rep.converged && dev <= 1e-3;
    let rows = rep.rows.clone();
    let mut art = Artifacts::new(&json!({ "demo": "pseudo-derivative", "map": "x + x^2", "rescaling": rep, "distance_to_identity": dev, "pass": ok }))?;
    let mut t = Table::new(&["j", "n", "sup_deviation", "accepted"]);
    for r in &rows {
        t.push([r.j.to_string(), r.n.to_string(), num(r.sup_deviation), r.accepted.to_string()]);
    }
    art.evidence = t;
    let pts = rows.iter().skip(1).map(|r| (r.n as f64, r.sup_deviation)).collect();
    art.plots.push(("rescaling".into(), line_chart("sup-deviation of successive rescalings", "n", "deviation", &[Series { label: "x + x^2", points: pts }], true, true)));
    Ok((pass_if(ok), art))
}

fn with_demo(mut art: Artifacts, name: &str) -> Artifacts {
    if let Value::Object(m) = &mut art.report {
        m.insert("demo".into(), json!(name));
    }
    art
}

fn cone_invariance() -> Result<Run> {
    let a = linear_oracle(&LinearKind::Sector { theta1: 0.0, theta2: 0.8 }, 128)?;
    let phi = MapDescriptor::builtin(Builtin::RadialShift { w: vec![0.2, 0.1], delta: 0.5 })?;
    let b: Arc<dyn GermOracle> = Arc::new(ImageGerm::new(a.clone(), phi.clone())?);
    let r = check_cone_invariance(a.as_ref(), b.as_ref(), &phi, &HarnessConfig::default())?;
    let mut art = with_demo(harness_artifacts(&r)?, "cone-invariance");
    if let (Some(da), Some(db)) = (r.measured.get("directions_a"), r.measured.get("directions_b")) {
        let da: DirectionSet = serde_json::from_value(da.clone())?;
        let db: DirectionSet = serde_json::from_value(db.clone())?;
        let (x, y) = (reps(&da), reps(&db));
        art.plots.push(("directions".into(), direction_plot("D(A) and D(B)", &[("D(A)", &x), ("D(B)", &y)])));
    }
    Ok((Outcome::from_pass(r.pass), art))
}

fn dim_equality() -> Result<Run> {
    let a = linear_oracle(&LinearKind::Plane { basis: vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]] }, 128)?;
    let b = linear_oracle(&LinearKind::Plane { basis: vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]] }, 128)?;
    let h = MapDescriptor::linear(vec![vec![1.0, 0.3, 0.0], vec![0.0, 1.2, -0.2], vec![0.1, 0.0, 0.9]])?;
    let r = check_dimension_equality(a, b, &h, &HarnessConfig::default())?;
    Ok((Outcome::from_pass(r.pass), with_demo(harness_artifacts(&r)?, "dim-equality")))
}

fn weak_transversality() -> Result<Run> {
    let a = linear_oracle(&LinearKind::Ray { dir: vec![1.0, 0.0, 0.0] }, 16)?;
    let b = linear_oracle(&LinearKind::Plane { basis: vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]] }, 128)?;
    let h = MapDescriptor::linear(vec![vec![1.0, 0.3, 0.0], vec![0.0, 1.2, -0.2], vec![0.1, 0.0, 0.9]])?;
    let r = check_weak_transversality_preservation(a, b, &h, &HarnessConfig::default())?;
    Ok((Outcome::from_pass(r.pass), with_demo(harness_artifacts(&r)?, "weak-transversality")))
}

/// Outcome of each demo in `all`, in listing order.
pub fn summary(results: &[(&str, Outcome)]) -> Artifacts {
    let rows: Vec<Value> = results.iter().map(|(n, o)| json!({ "demo": n, "outcome": o.name() })).collect();
    let mut t = Table::new(&["demo", "outcome"]);
    for (n, o) in results {
        t.push([n.to_string(), o.name().to_string()]);
    }
    let mut art = Artifacts { report: json!({ "demos": rows }), ..Artifacts::default() };
    art.evidence = t;
    art
}
