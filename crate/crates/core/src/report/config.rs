use std::collections::BTreeMap;

use crate::error::{Error, Result};

pub type ConfigMap = BTreeMap<String, String>;

/// Reads `key=value` lines; blank lines and `#` comments are ignored.
/// Keys are normalised so that `lp_grid` and `lp-grid` coincide.
pub fn parse_config(text: &str) -> Result<ConfigMap> {
    let mut out = ConfigMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("config line {}: expected key=value", i + 1)))?;
        out.insert(k.trim().replace('_', "-"), v.trim().to_string());
    }
    Ok(out)
}
