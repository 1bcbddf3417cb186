//! Fixed six-significant-digit number formatting for byte-stable exports.

use serde::Serialize;
use serde_json::Value;

/// Round to six significant digits.
pub fn round_sig6(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{x:.5e}").parse().expect("formatted float parses")
}

pub fn fmt_sig6(x: f64) -> String {
    round_sig6(x).to_string()
}

pub fn fmt_opt_sig6(x: Option<f64>) -> String {
    x.map(fmt_sig6).unwrap_or_default()
}

fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let rounded = round_sig6(n.as_f64().expect("f64 number"));
            *n = serde_json::Number::from_f64(rounded).expect("finite");
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

/// Pretty JSON with every float rounded to six significant digits.
pub fn to_stable_json<T: Serialize>(value: &T) -> serde_json::Result<String> {
    let mut v = serde_json::to_value(value)?;
    round_floats(&mut v);
    let mut text = serde_json::to_string_pretty(&v)?;
    text.push('\n');
    Ok(text)
}
