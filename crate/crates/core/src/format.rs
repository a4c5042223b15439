//! Number rendering for CSV and JSON output: 15 significant digits, plain
//! decimal notation.

/// Rounds to 15 significant digits. The result's shortest round-trip
/// representation never needs more than 15 digits.
pub fn round15(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.14e}").parse().unwrap_or(x)
}

/// `round15` rendered as a plain decimal string.
pub fn sig15(x: f64) -> String {
    format!("{}", round15(x))
}

/// Serializer for `#[serde(serialize_with = "...")]` on `f64` fields.
pub fn serialize_sig15<S: serde::Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(round15(*x))
}

/// Serializes `value` to pretty JSON with every float rounded by [`round15`].
pub fn to_json<T: serde::Serialize>(value: &T) -> serde_json::Result<String> {
    let mut tree = serde_json::to_value(value)?;
    round_tree(&mut tree);
    serde_json::to_string_pretty(&tree)
}

fn round_tree(v: &mut serde_json::Value) {
    use serde_json::Value;
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64().and_then(|x| serde_json::Number::from_f64(round15(x))) {
                *n = x;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_tree),
        Value::Object(map) => map.values_mut().for_each(round_tree),
        _ => {}
    }
}
