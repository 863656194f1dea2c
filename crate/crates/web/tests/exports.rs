use germlab_web::{sequence_curve, whitney_bounds, zigzag_directions};

#[test]
fn harmonic_curve_tends_to_one() {
    let v = sequence_curve("harmonic", 2000, 1e-2).unwrap();
    assert_eq!(v["ratio_test"], "satisfied");
    let last = v["curve"].as_array().unwrap().last().unwrap();
    assert!((last[1].as_f64().unwrap() - 1.0).abs() < 1e-2);
    assert!(sequence_curve("nope", 100, 1e-2).is_err());
}

#[test]
fn zigzag_verdicts() {
    assert_eq!(zigzag_directions(1.0, 0.25, true, 0.05).unwrap()["verdict"], "satisfied");
    assert_eq!(zigzag_directions(1.0, 0.25, false, 0.05).unwrap()["verdict"], "violated");
}

#[test]
fn whitney_brackets_anchors() {
    let v = whitney_bounds("[[-0.5, 0.2], [0.0, 0.0], [0.5, 0.4]]", 0.0, -1.0, 1.0, 41).unwrap();
    assert!((v["lip"].as_f64().unwrap() - 0.8).abs() < 1e-12);
    for r in v["rows"].as_array().unwrap() {
        let (x, lo, hi) = (r[0].as_f64().unwrap(), r[1].as_f64().unwrap(), r[2].as_f64().unwrap());
        assert!(lo <= hi + 1e-12, "at {x}");
        if x == 0.0 {
            assert_eq!((lo, hi), (0.0, 0.0));
        }
    }
    assert!(whitney_bounds("[]", 1.0, 0.0, 1.0, 10).is_err());
}
