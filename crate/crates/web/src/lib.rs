//! wasm-bindgen surface for the static page in `www/`.
//!
//! Every export takes plain numbers or a JSON string and returns a JSON
//! string, so the page needs no generated bindings beyond the glue file.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use germlab::direction::estimate_direction_set;
use germlab::examples::{gen_sequence, gen_zigzag, SequenceFamily};
use germlab::lipschitz::{empirical_constant, whitney_extend, ExtensionSpec};
use germlab::map::ExtensionMode;
use germlab::ssp::{ssp_definition_oracle, ssp_distance_test, ssp_ratio_test};
use germlab::ScaleSchedule;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn fail(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

/// Ratio curve `a_m / a_{m+1}` of a named family on a log-spaced index
/// grid, with both sequence verdicts.
pub fn sequence_curve(name: &str, horizon: u64, tol: f64) -> Result<Value, String> {
    let family = SequenceFamily::from_name(name).map_err(|e| e.to_string())?;
    let a = gen_sequence(&family).map_err(|e| e.to_string())?;
    let window = (horizon / 10).max(1);
    let ratio = ssp_ratio_test(&a, horizon, tol, window).map_err(|e| e.to_string())?;
    let oracle = ssp_definition_oracle(&a, horizon, tol).map_err(|e| e.to_string())?;
    let mut m = 1u64;
    let mut curve = Vec::new();
    while m <= horizon {
        curve.push(json!([m, a.ratio(m).map_err(|e| e.to_string())?]));
        m = (m + 1).max((m as f64 * 1.05) as u64);
    }
    Ok(json!({
        "family": name,
        "curve": curve,
        "ratio_test": ratio.result.verdict,
        "definition_oracle": oracle.result.verdict,
    }))
}

/// Zigzag graph with its estimated direction set and distance-test verdict.
pub fn zigzag_directions(c: f64, ratio: f64, ssp: bool, eps: f64) -> Result<Value, String> {
    let depth = 30;
    let z = gen_zigzag(c, ratio, ssp, depth).map_err(|e| e.to_string())?;
    let s = ScaleSchedule::new(1.0, 0.5, depth).map_err(|e| e.to_string())?;
    let d = estimate_direction_set(&z.sample, &s, eps).map_err(|e| e.to_string())?;
    let t = ssp_distance_test(&z.sample, &d, &s, eps).map_err(|e| e.to_string())?;
    let dirs: Vec<&[f64]> = d.reps().iter().map(|u| u.as_slice()).collect();
    let max_q = t.per_rep.iter().map(|r| r.max_q).fold(0.0, f64::max);
    Ok(json!({
        "corners": z.corners,
        "directions": dirs,
        "verdict": t.result.verdict,
        "max_q": max_q,
    }))
}

/// Lower and upper extremal extensions of 1-D anchors `[[x, v], ...]`
/// sampled on `[lo, hi]`; `lip <= 0` uses the empirical constant.
pub fn whitney_bounds(anchors: &str, lip: f64, lo: f64, hi: f64, samples: usize) -> Result<Value, String> {
    let raw: Vec<(f64, f64)> = serde_json::from_str(anchors).map_err(|e| e.to_string())?;
    if raw.is_empty() || samples < 2 || !(hi > lo) {
        return Err("need anchors, samples >= 2 and hi > lo".into());
    }
    let anchors: Vec<(Vec<f64>, f64)> = raw.iter().map(|&(x, v)| (vec![x], v)).collect();
    let lip = if lip > 0.0 {
        lip
    } else {
        let p: Vec<Vec<f64>> = raw.iter().map(|a| vec![a.0]).collect();
        let v: Vec<Vec<f64>> = raw.iter().map(|a| vec![a.1]).collect();
        empirical_constant(&p, &v, true)
    };
    let ext = |mode| whitney_extend(&ExtensionSpec { anchors: anchors.clone(), lip, mode }).map_err(|e| e.to_string());
    let (alpha, beta) = (ext(ExtensionMode::Inf)?, ext(ExtensionMode::Sup)?);
    let mut rows = Vec::with_capacity(samples);
    for i in 0..samples {
        let x = lo + (hi - lo) * i as f64 / (samples - 1) as f64;
        let a = alpha.eval(&[x]).map_err(|e| e.to_string())?[0];
        let b = beta.eval(&[x]).map_err(|e| e.to_string())?[0];
        rows.push(json!([x, b, a]));
    }
    Ok(json!({ "lip": lip, "rows": rows }))
}

#[wasm_bindgen(js_name = sequenceCurve)]
pub fn sequence_curve_js(name: &str, horizon: u32, tol: f64) -> Result<String, JsError> {
    sequence_curve(name, horizon as u64, tol).map(|v| v.to_string()).map_err(fail)
}

#[wasm_bindgen(js_name = zigzagDirections)]
pub fn zigzag_directions_js(c: f64, ratio: f64, ssp: bool, eps: f64) -> Result<String, JsError> {
    zigzag_directions(c, ratio, ssp, eps).map(|v| v.to_string()).map_err(fail)
}

#[wasm_bindgen(js_name = whitneyBounds)]
pub fn whitney_bounds_js(anchors: &str, lip: f64, lo: f64, hi: f64, samples: u32) -> Result<String, JsError> {
    whitney_bounds(anchors, lip, lo, hi, samples as usize).map(|v| v.to_string()).map_err(fail)
}
