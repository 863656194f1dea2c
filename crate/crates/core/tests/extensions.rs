use germlab::linalg::{dist, Point};
use germlab::lipschitz::{empirical_constant, whitney_extend, ExtensionSpec};
use germlab::map::{ExtensionMode, MapDescriptor};
use germlab::shapes::SegmentGerm;
use germlab::GermOracle;
use proptest::prelude::*;

fn anchors() -> impl Strategy<Value = (usize, Vec<(Point, f64)>)> {
    (1usize..=3).prop_flat_map(|n| {
        let pt = prop::collection::vec(-1.0f64..1.0, n);
        (Just(n), prop::collection::vec((pt, -1.0f64..1.0), 2..=50))
    })
}

/// Brute-force `inf_a f(a) + L|x − a|` and `sup_a f(a) − L|x − a|`.
fn alpha_beta(anchors: &[(Point, f64)], lip: f64, x: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (a, v) in anchors {
        let d: f64 = a.iter().zip(x).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
        lo = lo.min(v + lip * d);
        hi = hi.max(v - lip * d);
    }
    (lo, hi)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn extremal_extensions((n, raw) in anchors(), probes in prop::collection::vec(prop::collection::vec(-1.5f64..1.5, 3), 200)) {
        let mut anchors: Vec<(Point, f64)> = Vec::new();
        for (p, v) in raw {
            if anchors.iter().all(|(q, _)| dist(q, &p) > 1e-6) {
                anchors.push((p, v));
            }
        }
        let pts: Vec<Point> = anchors.iter().map(|a| a.0.clone()).collect();
        let vals: Vec<Point> = anchors.iter().map(|a| vec![a.1]).collect();
        let lip = empirical_constant(&pts, &vals, true);
        let spec = |mode| ExtensionSpec { anchors: anchors.clone(), lip, mode };
        let alpha = whitney_extend(&spec(ExtensionMode::Inf)).unwrap();
        let beta = whitney_extend(&spec(ExtensionMode::Sup)).unwrap();
        for (p, v) in &anchors {
            prop_assert_eq!(alpha.eval(p).unwrap()[0], *v);
            prop_assert_eq!(beta.eval(p).unwrap()[0], *v);
        }
        let xs: Vec<Point> = probes.iter().map(|p| p[..n].to_vec()).collect();
        for x in &xs {
            let (a, b) = (alpha.eval(x).unwrap()[0], beta.eval(x).unwrap()[0]);
            let (wa, wb) = alpha_beta(&anchors, lip, x);
            prop_assert!((a - wa).abs() <= 1e-12 && (b - wb).abs() <= 1e-12);
            prop_assert!(b <= a + 1e-12);
        }
        for w in xs.windows(2) {
            let d = dist(&w[0], &w[1]);
            for f in [&alpha, &beta] {
                let dv = (f.eval(&w[0]).unwrap()[0] - f.eval(&w[1]).unwrap()[0]).abs();
                prop_assert!(dv <= lip * d + 1e-9);
            }
        }
    }

    #[test]
    fn shear_inverses_roundtrip(x in -2.0f64..2.0, y in -2.0f64..2.0, k in 0.1f64..3.0) {
        let f = MapDescriptor::from_expr(&format!("{k} * sin(x) + abs(x)"), 1).unwrap();
        for sh in [MapDescriptor::shear_plus(f.clone()).unwrap(), MapDescriptor::shear_minus(f.clone()).unwrap()] {
            let inv = sh.inverse().unwrap();
            let back = inv.eval(&sh.eval(&[x, y]).unwrap()).unwrap();
            prop_assert!(dist(&back, &[x, y]) <= 1e-12);
        }
    }

    #[test]
    fn oracle_distance_is_one_lipschitz(p in prop::array::uniform2(-1.0f64..1.0), q in prop::array::uniform2(-1.0f64..1.0)) {
        let g = SegmentGerm::polyline(&[vec![1.0, 0.0], vec![0.5, 0.4], vec![0.25, 0.0], vec![0.0, 0.0]], 8).unwrap();
        let dp = g.distance(&p);
        let dq = g.distance(&q);
        prop_assert!((dp - dq).abs() <= dist(&p, &q) + 1e-12);
    }
}
