//! `--override key.path=value` handling on the JSON form of a config.

use serde_json::Value;

/// Sets `path` (dot-separated object keys) in `doc` to `raw`, parsed as JSON
/// when possible and as a plain string otherwise. The key must already exist,
/// so a typo is reported instead of silently ignored.
pub fn apply(doc: &mut Value, assignment: &str) -> Result<(), String> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| format!("override {assignment:?}: expected KEY=VALUE"))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut slot = &mut *doc;
    for key in path.split('.') {
        slot = match slot {
            Value::Object(map) => map.get_mut(key),
            Value::Array(items) => key.parse::<usize>().ok().and_then(|i| items.get_mut(i)),
            _ => None,
        }
        .ok_or_else(|| format!("override {assignment:?}: no field {key:?} at {path:?}"))?;
    }
    *slot = value;
    Ok(())
}
