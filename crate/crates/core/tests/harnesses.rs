use std::sync::Arc;
use std::time::Instant;

use germlab::examples::{gen_blowup_image, gen_zigzag, linear_oracle, transpose_zigzag, LinearKind};
use germlab::map::Builtin;
use germlab::shapes::ImageGerm;
use germlab::transversality::{
    check_cone_invariance, check_dimension_equality, check_weak_transversality_preservation, HarnessConfig,
};
use germlab::{direction::estimate_direction_set, GermOracle, MapDescriptor, ScaleSchedule};

fn cone_case(kind: LinearKind, per_shell: usize, phi: MapDescriptor) -> f64 {
    let a = linear_oracle(&kind, per_shell).unwrap();
    let b: Arc<dyn GermOracle> = Arc::new(ImageGerm::new(a.clone(), phi.clone()).unwrap());
    let t = Instant::now();
    let r = check_cone_invariance(a.as_ref(), b.as_ref(), &phi, &HarnessConfig::default()).unwrap();
    eprintln!("{kind:?}: {:?} {:?} in {:?}", r.pass, r.measured.get("hausdorff"), t.elapsed());
    assert_eq!(r.pass, Some(true), "{}", r.note);
    r.measured["hausdorff"].as_f64().unwrap()
}

#[test]
fn cone_invariance_linear_and_perturbed() {
    let lin = MapDescriptor::linear(vec![vec![2.0, 1.0], vec![0.0, 1.0]]).unwrap();
    cone_case(LinearKind::Ray { dir: vec![1.0, 1.0] }, 16, lin.clone());
    cone_case(LinearKind::Sector { theta1: 0.2, theta2: 1.0 }, 128, lin);
    let radial = MapDescriptor::builtin(Builtin::RadialShift { w: vec![0.2, 0.1], delta: 0.5 }).unwrap();
    cone_case(LinearKind::Sector { theta1: 0.0, theta2: 0.8 }, 128, radial);
    let bump = MapDescriptor::builtin(Builtin::BumpShift { w: vec![0.0, 0.0, 1.0], delta: 0.3 }).unwrap();
    cone_case(LinearKind::Plane { basis: vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]] }, 128, bump);
}

#[test]
fn blowup_directions_collapse_to_vertical() {
    let z = gen_zigzag(1.0, 0.25, false, 30).unwrap();
    let img = gen_blowup_image(&transpose_zigzag(&z).unwrap()).unwrap();
    let d = estimate_direction_set(&img, &ScaleSchedule::default(), 0.05).unwrap();
    for r in d.reps() {
        assert!(r.as_slice()[0].abs() < 0.05, "{:?}", r.as_slice());
    }
}

#[test]
fn dimension_and_weak_transversality_under_linear_maps() {
    let cfg = HarnessConfig::default();
    let a = linear_oracle(&LinearKind::Plane { basis: vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]] }, 128).unwrap();
    let b = linear_oracle(&LinearKind::Plane { basis: vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]] }, 128).unwrap();
    let h = MapDescriptor::linear(vec![vec![1.0, 0.3, 0.0], vec![0.0, 1.2, -0.2], vec![0.1, 0.0, 0.9]]).unwrap();
    let t = Instant::now();
    let r = check_dimension_equality(a.clone(), b.clone(), &h, &cfg).unwrap();
    eprintln!("dim eq {:?} {:?} in {:?}", r.pass, r.measured, t.elapsed());
    assert_eq!(r.pass, Some(true));

    let ra = linear_oracle(&LinearKind::Ray { dir: vec![1.0, 0.0, 0.0] }, 16).unwrap();
    let rb = linear_oracle(&LinearKind::Ray { dir: vec![0.0, 1.0, 0.0] }, 16).unwrap();
    let w = check_weak_transversality_preservation(ra, rb, &h, &cfg).unwrap();
    assert_eq!(w.pass, Some(true));
    assert_eq!(w.measured["weakly_transverse_src"], serde_json::json!(true));
}
