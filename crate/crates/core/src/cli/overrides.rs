//! `--set key=value` overrides applied to the JSON config tree.

use serde_json::{Map, Value};

/// Keys whose value is always a list.
const LIST_PREFIX: &str = "axes.";

fn parse_scalar(text: &str) -> Value {
    serde_json::from_str(text).unwrap_or_else(|_| Value::String(text.to_string()))
}

fn parse_value(key: &str, text: &str) -> Value {
    if key.starts_with(LIST_PREFIX) {
        if text.is_empty() {
            return Value::Array(Vec::new());
        }
        if let Ok(v @ Value::Array(_)) = serde_json::from_str(text) {
            return v;
        }
        return Value::Array(text.split(',').map(|s| parse_scalar(s.trim())).collect());
    }
    parse_scalar(text)
}

/// Sets the dotted `key` inside `root`, creating objects along the way.
pub fn apply(root: &mut Value, assignment: &str) -> Result<(), String> {
    let (key, text) = assignment
        .split_once('=')
        .ok_or_else(|| format!("--set expects key=value, got `{assignment}`"))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(format!("--set has an empty key in `{assignment}`"));
    }
    let value = parse_value(key, text.trim());
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = match node {
            Value::Object(map) => map,
            other => {
                if other.is_null() {
                    *other = Value::Object(Map::new());
                    other.as_object_mut().expect("object")
                } else {
                    return Err(format!("--set {key}: `{}` is not an object", parts[..i].join(".")));
                }
            }
        };
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        node = obj.entry(part.to_string()).or_insert(Value::Null);
    }
    unreachable!("split always yields one part")
}
