//! Text rendering: JSON and CSV with every float at 17 significant digits.

use pabi_core::numeric::format_g17;
use serde::Serialize;
use serde_json::Value;

/// Serializes `value` to compact JSON, printing floats with [`format_g17`]
/// and non-finite floats as `null`.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let value = serde_json::to_value(value).expect("serializable value");
    let mut out = String::new();
    write_value(&value, &mut out);
    out
}

pub fn write_value(value: &Value, out: &mut String) {
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => out.push_str(&number_text(n)),
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("string")),
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(item, out);
            }
            out.push(']');
        }
        Value::Object(map) => {
            out.push('{');
            for (i, (key, item)) in map.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(key).expect("key"));
                out.push(':');
                write_value(item, out);
            }
            out.push('}');
        }
    }
}

/// Integers verbatim, floats at 17 significant digits.
pub fn number_text(n: &serde_json::Number) -> String {
    if let Some(u) = n.as_u64() {
        u.to_string()
    } else if let Some(i) = n.as_i64() {
        i.to_string()
    } else {
        let x = n.as_f64().unwrap_or(f64::NAN);
        if x.is_finite() {
            format_g17(x)
        } else {
            "null".into()
        }
    }
}

/// One CSV cell for a scalar JSON value; nested values are written as JSON.
fn csv_cell(value: &Value) -> String {
    match value {
        Value::Null => String::new(),
        Value::Number(n) => number_text(n),
        Value::String(s) => quote_csv(s),
        Value::Bool(b) => b.to_string(),
        other => {
            let mut text = String::new();
            write_value(other, &mut text);
            quote_csv(&text)
        }
    }
}

fn quote_csv(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// A header line and one data line from the fields of a flat record.
pub fn record_csv<T: Serialize>(record: &T) -> String {
    let value = serde_json::to_value(record).expect("serializable record");
    let Value::Object(map) = value else {
        return format!("value\n{}\n", csv_cell(&value));
    };
    let header: Vec<&str> = map.keys().map(String::as_str).collect();
    let row: Vec<String> = map.values().map(csv_cell).collect();
    format!("{}\n{}\n", header.join(","), row.join(","))
}
