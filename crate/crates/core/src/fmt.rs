//! Fixed float formatting shared by every emitted artifact.

use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::error::Result;

/// Formats `x` rounded to 6 significant digits, in the shortest form that
/// reads back to the rounded value (`0.3`, `1.23457e+20`, `-0.000125`).
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "NaN".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let rounded: f64 = format!("{x:.5e}").parse().expect("float literal");
    let exp = rounded.abs().log10().floor() as i32;
    if (-5..16).contains(&exp) {
        format!("{rounded}")
    } else {
        let s = format!("{rounded:e}");
        // Rust prints `1e20`; add an explicit sign for readability
        match s.split_once('e') {
            Some((m, e)) if !e.starts_with('-') => format!("{m}e+{e}"),
            _ => s,
        }
    }
}

/// Rounds to the value [`sig6`] would print.
pub fn round_sig6(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.5e}").parse().expect("float literal")
}

/// Serializes `value` with every floating-point number rounded as by
/// [`round_sig6`]. Non-finite numbers become `null`.
pub fn to_json_sig6<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<Value> {
    fn walk(v: Value) -> Value {
        match v {
            Value::Number(n) if n.is_f64() => n
                .as_f64()
                .and_then(|x| serde_json::Number::from_f64(round_sig6(x)))
                .map_or(Value::Null, Value::Number),
            Value::Array(a) => Value::Array(a.into_iter().map(walk).collect()),
            Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, walk(v))).collect()),
            other => other,
        }
    }
    serde_json::to_value(value).map(walk)
}

/// Pretty JSON with [`to_json_sig6`] rounding and a trailing newline.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<String> {
    let mut s = serde_json::to_string_pretty(&to_json_sig6(value)?)?;
    s.push('\n');
    Ok(s)
}

pub fn save_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_json_string(value)?)?;
    Ok(())
}
