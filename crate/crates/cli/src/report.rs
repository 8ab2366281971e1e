//! Report serialization: JSON with a schema version, or CSV.

use serde::Serialize;
use serde_json::{Map, Value};

pub const SCHEMA_VERSION: u32 = 1;

/// The report as a JSON object with `schema_version` and `command` added.
pub fn envelope<T: Serialize>(command: &str, report: &T) -> Value {
    let mut obj = Map::new();
    obj.insert("schema_version".into(), Value::from(SCHEMA_VERSION));
    obj.insert("command".into(), Value::from(command));
    match serde_json::to_value(report).expect("reports serialize") {
        Value::Object(fields) => obj.extend(fields),
        other => {
            obj.insert("report".into(), other);
        }
    }
    Value::Object(obj)
}

pub fn to_json(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("values serialize")
}

fn cell(v: &Value) -> String {
    let s = match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    };
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s
    }
}

/// CSV of the first array of objects found under `rows_key`, or a
/// two-column `key,value` listing of the top-level fields.
pub fn to_csv(v: &Value, rows_key: &str) -> String {
    let mut out = String::new();
    if let Some(Value::Array(rows)) = v.get(rows_key) {
        let header: Vec<String> = match rows.first() {
            Some(Value::Object(o)) => o.keys().cloned().collect(),
            _ => vec![rows_key.to_string()],
        };
        out.push_str(&header.join(","));
        out.push('\n');
        for r in rows {
            let line: Vec<String> = match r {
                Value::Object(o) => header.iter().map(|k| cell(o.get(k).unwrap_or(&Value::Null))).collect(),
                other => vec![cell(other)],
            };
            out.push_str(&line.join(","));
            out.push('\n');
        }
        return out;
    }
    out.push_str("key,value\n");
    if let Value::Object(o) = v {
        for (k, x) in o {
            out.push_str(&format!("{},{}\n", k, cell(x)));
        }
    }
    out
}

/// True if a float appears anywhere in the value.
pub fn contains_float(v: &Value) -> bool {
    match v {
        Value::Number(n) => n.is_f64(),
        Value::Array(a) => a.iter().any(contains_float),
        Value::Object(o) => o.values().any(contains_float),
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn envelope_puts_version_first() {
        let v = envelope("tau", &json!({"a": 1}));
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["command"], "tau");
        assert_eq!(v["a"], 1);
        let v = envelope("x", &vec![1, 2]);
        assert_eq!(v["report"], json!([1, 2]));
    }

    #[test]
    fn csv_rows_and_fallback() {
        let v = json!({"rows": [{"g": 0, "tau": "-1/1"}, {"g": 1, "tau": "1/3"}]});
        assert_eq!(to_csv(&v, "rows"), "g,tau\n0,-1/1\n1,1/3\n");
        let v = json!({"k": 3, "value": "1/60"});
        assert_eq!(to_csv(&v, "rows"), "key,value\nk,3\nvalue,1/60\n");
        let v = json!({"rows": [{"a": "x,y"}]});
        assert_eq!(to_csv(&v, "rows"), "a\n\"x,y\"\n");
    }

    #[test]
    fn float_detection() {
        assert!(contains_float(&json!({"a": [1, {"b": 0.5}]})));
        assert!(!contains_float(&json!({"a": [1, {"b": "0.5"}], "c": -3})));
    }
}
