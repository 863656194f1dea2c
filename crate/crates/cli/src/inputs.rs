//! JSON inputs: germ descriptions, schedules, maps, direction sets.

use std::path::Path;
use std::sync::Arc;

use anyhow::{Context, Result};
use germlab::examples::{gen_blowup_image, gen_zigzag_with, linear_oracle, transpose_zigzag, LinearKind, DEFAULT_PER_SHELL};
use germlab::shapes::{ImageGerm, UnionGerm};
use germlab::{GermOracle, MapDescriptor, SampledGerm};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Reads JSON, reporting the path inside the document on schema errors.
pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_json(&text).with_context(|| format!("in {}", path.display()))
}

pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let at = e.path().to_string();
        anyhow::anyhow!("schema error at '{at}': {}", e.into_inner())
    })
}

/// Germ files nest through tagged enums, which hide inner paths from
/// `serde_path_to_error`. On failure each level is re-read into an untagged
/// mirror of its variant so the error names the innermost bad field.
pub fn load_germ(path: &Path) -> Result<GermSpec> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_germ(&text).with_context(|| format!("in {}", path.display()))
}

pub fn parse_germ(text: &str) -> Result<GermSpec> {
    let v: Value = parse_json(text)?;
    serde_json::from_value(v.clone()).or_else(|e| {
        locate_germ(&v, "")?;
        Err(anyhow::anyhow!("schema error at '.': {e}"))
    })
}

// Fields exist only to be type-checked.
#[allow(dead_code)]
mod mirror {
    use germlab::DirectionSet;
    use serde::Deserialize;
    use serde_json::Value;

    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct Sampled {
        pub dim: usize,
        pub points: Vec<Vec<f64>>,
        pub min_scale: Option<f64>,
        pub max_scale: Option<f64>,
    }

    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct Linear {
        pub shape: Value,
        pub per_shell: Option<usize>,
    }

    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct Zigzag {
        pub c: f64,
        pub ratio: f64,
        pub ssp: bool,
        pub depth: Option<usize>,
    }

    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct Blowup {
        pub c: f64,
        pub ratio: f64,
        pub depth: Option<usize>,
    }

    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct Image {
        pub base: Value,
        pub map: Value,
    }

    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct Parts {
        pub parts: Vec<Value>,
    }

    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct Dir {
        pub dir: Vec<f64>,
    }

    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct Plane {
        pub basis: Vec<Vec<f64>>,
    }

    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct Sector {
        pub theta1: f64,
        pub theta2: f64,
    }

    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct ConeOver {
        pub directions: DirectionSet,
    }
}

fn field(at: &str, name: &str) -> String {
    match (at.is_empty(), name.starts_with('[')) {
        (true, _) => name.to_string(),
        (false, true) => format!("{at}{name}"),
        (false, false) => format!("{at}.{name}"),
    }
}

/// Prefix the path of a `parse_json` error with `at`.
fn relabel(e: anyhow::Error, at: &str) -> anyhow::Error {
    if at.is_empty() {
        return e;
    }
    let msg = e.to_string();
    // Positions refer to the re-serialized fragment, not the file.
    let msg = match msg.rsplit_once(" at line ") {
        Some((head, tail)) if tail.contains(" column ") => head.to_string(),
        _ => msg,
    };
    match msg.strip_prefix("schema error at '").and_then(|r| r.split_once("': ")) {
        Some((".", rest)) => anyhow::anyhow!("schema error at '{at}': {rest}"),
        Some((inner, rest)) => anyhow::anyhow!("schema error at '{}': {rest}", field(at, inner)),
        None => e,
    }
}

fn check<T: DeserializeOwned>(v: &Value, at: &str) -> Result<T> {
    parse_json(&v.to_string()).map_err(|e| relabel(e, at))
}

/// Splits `{"kind": k, ...}` into `k` and the remaining fields.
fn untag(v: &Value, at: &str) -> Result<(String, Value)> {
    let Value::Object(m) = v else {
        anyhow::bail!("schema error at '{}': expected an object", if at.is_empty() { "." } else { at });
    };
    let mut m = m.clone();
    match m.remove("kind") {
        Some(Value::String(k)) => Ok((k, Value::Object(m))),
        _ => anyhow::bail!("schema error at '{}': missing or non-string `kind`", field(at, "kind")),
    }
}

fn locate_germ(v: &Value, at: &str) -> Result<()> {
    let (kind, rest) = untag(v, at)?;
    match kind.as_str() {
        "sampled" => check::<mirror::Sampled>(&rest, at).map(drop),
        "linear" => locate_shape(&check::<mirror::Linear>(&rest, at)?.shape, &field(at, "shape")),
        "zigzag" => check::<mirror::Zigzag>(&rest, at).map(drop),
        "blowup" => check::<mirror::Blowup>(&rest, at).map(drop),
        "image" => {
            let m: mirror::Image = check(&rest, at)?;
            locate_germ(&m.base, &field(at, "base"))?;
            check::<MapDescriptor>(&m.map, &field(at, "map")).map(drop)
        }
        "union" => {
            let m: mirror::Parts = check(&rest, at)?;
            m.parts.iter().enumerate().try_for_each(|(i, p)| locate_germ(p, &field(at, &format!("parts[{i}]"))))
        }
        other => anyhow::bail!("schema error at '{}': unknown germ kind '{other}'", field(at, "kind")),
    }
}

fn locate_shape(v: &Value, at: &str) -> Result<()> {
    let (kind, rest) = untag(v, at)?;
    match kind.as_str() {
        "ray" | "line" => check::<mirror::Dir>(&rest, at).map(drop),
        "plane" => check::<mirror::Plane>(&rest, at).map(drop),
        "sector" => check::<mirror::Sector>(&rest, at).map(drop),
        "cone_over" => check::<mirror::ConeOver>(&rest, at).map(drop),
        "union" => {
            let m: mirror::Parts = check(&rest, at)?;
            m.parts.iter().enumerate().try_for_each(|(i, p)| locate_shape(p, &field(at, &format!("parts[{i}]"))))
        }
        other => anyhow::bail!("schema error at '{}': unknown shape kind '{other}'", field(at, "kind")),
    }
}

fn default_depth() -> usize {
    30
}

/// A germ given either by explicit samples or by one of the generators.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GermSpec {
    Sampled {
        dim: usize,
        points: Vec<Vec<f64>>,
        #[serde(default)]
        min_scale: Option<f64>,
        #[serde(default)]
        max_scale: Option<f64>,
    },
    Linear {
        shape: LinearKind,
        #[serde(default)]
        per_shell: Option<usize>,
    },
    Zigzag {
        c: f64,
        ratio: f64,
        ssp: bool,
        #[serde(default = "default_depth")]
        depth: usize,
    },
    /// Chart image of the transposed zigzag.
    Blowup {
        c: f64,
        ratio: f64,
        #[serde(default = "default_depth")]
        depth: usize,
    },
    Image {
        base: Box<GermSpec>,
        map: MapDescriptor,
    },
    Union {
        parts: Vec<GermSpec>,
    },
}

impl GermSpec {
    pub fn build(&self) -> Result<Arc<dyn GermOracle>> {
        Ok(match self {
            GermSpec::Sampled { dim, points, min_scale, max_scale } => {
                let g = match (min_scale, max_scale) {
                    (Some(lo), Some(hi)) => SampledGerm::with_scales(*dim, points.clone(), *lo, *hi)?,
                    (None, None) => SampledGerm::new(*dim, points.clone())?,
                    _ => anyhow::bail!("give both min_scale and max_scale or neither"),
                };
                Arc::new(g)
            }
            GermSpec::Linear { shape, per_shell } => linear_oracle(shape, per_shell.unwrap_or(DEFAULT_PER_SHELL))?,
            GermSpec::Zigzag { c, ratio, ssp, depth } => gen_zigzag_with(*c, *ratio, *ssp, *depth, DEFAULT_PER_SHELL)?.germ,
            GermSpec::Blowup { c, ratio, depth } => {
                let z = gen_zigzag_with(*c, *ratio, false, *depth, DEFAULT_PER_SHELL)?;
                Arc::new(gen_blowup_image(&transpose_zigzag(&z)?)?)
            }
            GermSpec::Image { base, map } => Arc::new(ImageGerm::new(base.build()?, map.clone())?),
            GermSpec::Union { parts } => {
                let parts = parts.iter().map(GermSpec::build).collect::<Result<Vec<_>>>()?;
                Arc::new(UnionGerm::new(parts)?)
            }
        })
    }
}
