//! JSON configuration with flag overrides.

use std::fmt;
use std::path::Path;

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;
use serde_json::{Map, Value};

/// A configuration problem; maps to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "configuration error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn config_err(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

/// Reads a config file. A manifest written by a previous run is accepted
/// and its `params` are used.
pub fn load(path: &Path) -> Result<Map<String, Value>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    let v = match v {
        Value::Object(mut m) if m.get("tool").and_then(Value::as_str) == Some(crate::output::TOOL) => {
            m.remove("params").unwrap_or(Value::Object(Map::new()))
        }
        other => other,
    };
    match v {
        Value::Object(m) => Ok(m),
        _ => Err(config_err(format!("{}: expected a JSON object", path.display()))),
    }
}

/// Overlays `top` on `base`, merging nested objects key by key.
pub fn merge(base: &mut Map<String, Value>, top: Map<String, Value>) {
    for (k, v) in top {
        match (base.get_mut(&k), v) {
            (Some(Value::Object(b)), Value::Object(t)) => merge(b, t),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// Merges file and flags and deserializes with unknown keys rejected.
pub fn resolve<P: DeserializeOwned>(file: Option<&Path>, flags: Map<String, Value>) -> Result<(P, Value)> {
    let mut base = match file {
        Some(p) => load(p)?,
        None => Map::new(),
    };
    merge(&mut base, flags);
    let v = Value::Object(base);
    let params = serde_json::from_value(v.clone()).map_err(|e| config_err(e.to_string()))?;
    Ok((params, v))
}

/// Object of the flags that were given.
pub fn flags(value: impl serde::Serialize) -> Map<String, Value> {
    match serde_json::to_value(value) {
        Ok(Value::Object(m)) => m.into_iter().filter(|(_, v)| !v.is_null()).collect(),
        _ => Map::new(),
    }
}

/// Maps generic system flags onto the fields of the named family.
pub fn system_overlay(
    family: Option<&str>,
    n: Option<usize>,
    k: Option<usize>,
    m: Option<usize>,
    p: Option<f64>,
) -> Result<Map<String, Value>> {
    let mut out = Map::new();
    let Some(family) = family else {
        if n.is_some() || k.is_some() || m.is_some() || p.is_some() {
            return Err(config_err("--n/--k/--m/--p need a family (flag or config)"));
        }
        return Ok(out);
    };
    out.insert("family".into(), family.into());
    let keys: [Option<&str>; 4] = match family {
        "fep-seg" | "fep-circle" => [Some("n"), Some("k"), None, Some("p")],
        "sep" => [Some("n"), None, Some("m"), Some("right")],
        "zrp-seg" | "zrp-circle" => [Some("sites"), Some("particles"), Some("particles"), Some("p")],
        "zrp-constant-rate" => [Some("n"), None, Some("m"), Some("p")],
        "obep" => [Some("n"), None, None, None],
        other => return Err(config_err(format!("unknown family {other:?}"))),
    };
    let vals = [n.map(Value::from), k.map(Value::from), m.map(Value::from), p.map(Value::from)];
    for (key, val) in keys.iter().zip(vals) {
        if let Some(val) = val {
            let key = key.ok_or_else(|| config_err(format!("flag not used by family {family}")))?;
            out.insert(key.into(), val);
        }
    }
    Ok(out)
}

/// Family name from the flag, else from the config file's `system`.
pub fn family_name(flag: Option<&str>, file: Option<&Path>) -> Result<Option<String>> {
    if let Some(f) = flag {
        return Ok(Some(f.to_string()));
    }
    let Some(path) = file else { return Ok(None) };
    Ok(load(path)?
        .get("system")
        .and_then(|s| s.get("family"))
        .and_then(Value::as_str)
        .map(str::to_string))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;
    use serde_json::json;

    #[derive(Debug, Deserialize)]
    #[serde(deny_unknown_fields)]
    struct P {
        #[serde(default)]
        a: u32,
    }

    #[test]
    fn unknown_keys_are_config_errors() {
        let flags = json!({"b": 1}).as_object().unwrap().clone();
        let err = resolve::<P>(None, flags).unwrap_err();
        assert!(err.downcast_ref::<ConfigError>().is_some());
        let (p, _) = resolve::<P>(None, json!({"a": 3}).as_object().unwrap().clone()).unwrap();
        assert_eq!(p.a, 3);
    }

    #[test]
    fn nested_merge_keeps_other_keys() {
        let mut base = json!({"system": {"family": "fep-seg", "n": 4, "k": 3}}).as_object().unwrap().clone();
        merge(&mut base, json!({"system": {"n": 6}}).as_object().unwrap().clone());
        assert_eq!(Value::Object(base), json!({"system": {"family": "fep-seg", "n": 6, "k": 3}}));
    }

    #[test]
    fn sep_maps_p_to_right() {
        let o = system_overlay(Some("sep"), Some(5), None, Some(2), Some(0.3)).unwrap();
        assert_eq!(Value::Object(o), json!({"family": "sep", "n": 5, "m": 2, "right": 0.3}));
        assert!(system_overlay(Some("sep"), None, Some(2), None, None).is_err());
    }
}
