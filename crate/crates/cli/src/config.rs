//! `--config run.json`: a JSON object whose keys are the long flag names of
//! a subcommand. Flags given on the command line win.

use std::path::Path;

use anyhow::{bail, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::inputs::{load_json, parse_json};

pub fn merge<T: Serialize + DeserializeOwned>(flags: &T, config: Option<&Path>) -> Result<T> {
    let Some(path) = config else {
        return Ok(serde_json::from_value(serde_json::to_value(flags)?)?);
    };
    let mut base: Map<String, Value> = match load_json::<Value>(path)? {
        Value::Object(m) => m,
        _ => bail!("{}: config must be a JSON object", path.display()),
    };
    if base.contains_key("config") {
        bail!("{}: config files cannot nest 'config'", path.display());
    }
    let Value::Object(given) = serde_json::to_value(flags)? else {
        unreachable!("argument structs serialize to objects")
    };
    if let Some(k) = base.keys().find(|k| !given.contains_key(*k)) {
        bail!("{}: unknown key '{k}'", path.display());
    }
    for (k, v) in given {
        if !v.is_null() {
            base.insert(k, v);
        }
    }
    parse_json(&Value::Object(base).to_string())
        .map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
}
