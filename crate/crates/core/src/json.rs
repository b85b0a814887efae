//! Canonical JSON output and file loaders.
//!
//! Canonical form: object keys sorted, two-space indentation, integers
//! printed as integers and every float in scientific notation with 17
//! significant digits, so equal values always give identical bytes and
//! every float round-trips exactly. Non-finite floats must be routed
//! through [`f64_or_inf`] or [`vec_f64_or_inf`], which write them as the
//! strings `"inf"`, `"-inf"` and `"nan"`.

use std::fmt::Write as _;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::measure::MeasureVec;
use crate::metric::{FiniteMetricSpace, MetricSpaceJson};
use crate::tree::UltrametricTree;

pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "\"nan\"".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "\"inf\"".into()
        } else {
            "\"-inf\"".into()
        }
    } else {
        format!("{x:.16e}")
    }
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = |out: &mut String, k: usize| out.extend(std::iter::repeat_n(' ', 2 * k));
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                write!(out, "{i}").unwrap();
            } else if let Some(u) = n.as_u64() {
                write!(out, "{u}").unwrap();
            } else {
                out.push_str(&format_float(n.as_f64().unwrap_or(f64::NAN)));
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).unwrap()),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                out.push_str(if i == 0 { "\n" } else { ",\n" });
                pad(out, indent + 1);
                write_value(out, item, indent + 1);
            }
            out.push('\n');
            pad(out, indent);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.into_iter().enumerate() {
                out.push_str(if i == 0 { "\n" } else { ",\n" });
                pad(out, indent + 1);
                out.push_str(&serde_json::to_string(k).unwrap());
                out.push_str(": ");
                write_value(out, &map[k], indent + 1);
            }
            out.push('\n');
            pad(out, indent);
            out.push('}');
        }
    }
}

/// Canonical rendering of a JSON value, with a trailing newline.
pub fn canonical_value(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, 0);
    out.push('\n');
    out
}

pub fn to_canonical<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    Ok(canonical_value(&serde_json::to_value(value)?))
}

pub fn write_canonical<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_canonical(value)?)?;
    Ok(())
}

pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn load_space(path: &Path, tol: f64) -> Result<FiniteMetricSpace> {
    let json: MetricSpaceJson = load_json(path)?;
    FiniteMetricSpace::from_json(&json).map(|s| s.retolerance(tol))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum MeasureFile {
    Plain(Vec<f64>),
    Wrapped { mu: Vec<f64> },
}

/// A measure given either as a bare array or as `{"mu": [...]}`.
pub fn load_measure(path: &Path) -> Result<MeasureVec> {
    let file: MeasureFile = load_json(path)?;
    let weights = match file {
        MeasureFile::Plain(w) | MeasureFile::Wrapped { mu: w } => w,
    };
    MeasureVec::new(weights)
}

pub fn load_tree(path: &Path) -> Result<UltrametricTree> {
    load_json(path)
}

fn encode(x: f64) -> Value {
    if x.is_finite() {
        Value::from(x)
    } else {
        Value::String(
            if x.is_nan() {
                "nan"
            } else if x > 0.0 {
                "inf"
            } else {
                "-inf"
            }
            .into(),
        )
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum FloatRepr {
    Num(f64),
    Text(String),
}

fn decode(r: FloatRepr) -> std::result::Result<f64, String> {
    match r {
        FloatRepr::Num(x) => Ok(x),
        FloatRepr::Text(s) => match s.as_str() {
            "inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            "nan" => Ok(f64::NAN),
            _ => Err(format!("expected a number or inf/-inf/nan, got {s:?}")),
        },
    }
}

/// Serde adapter for a float that may be infinite.
pub mod f64_or_inf {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        encode(*x).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        decode(FloatRepr::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for a vector of floats that may be infinite.
pub mod vec_f64_or_inf {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(xs: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
        xs.iter().map(|&x| encode(x)).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<f64>, D::Error> {
        Vec::<FloatRepr>::deserialize(d)?
            .into_iter()
            .map(decode)
            .collect::<std::result::Result<_, _>>()
            .map_err(serde::de::Error::custom)
    }
}

/// Parse a comma-separated list of point indices such as `"0,1,3"`.
pub fn parse_index_list(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| Error::Argument(format!("bad index {t:?}"))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn sorted_keys_and_float_format() {
        let v = json!({"b": 1.5, "a": [1, 0.1], "c": {"z": null, "y": true}});
        let text = canonical_value(&v);
        assert_eq!(
            text,
            "{\n  \"a\": [\n    1,\n    1.0000000000000001e-1\n  ],\n  \"b\": 1.5000000000000000e0,\n  \"c\": {\n    \"y\": true,\n    \"z\": null\n  }\n}\n"
        );
        let back: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 2.0f64.sqrt(), 1e-300, 123456789.123456789, -0.0, 5e-324] {
            let s = format_float(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
    }

    #[test]
    fn infinite_floats() {
        #[derive(Serialize, Deserialize, PartialEq, Debug)]
        struct S {
            #[serde(with = "f64_or_inf")]
            c: f64,
            #[serde(with = "vec_f64_or_inf")]
            v: Vec<f64>,
        }
        let s = S { c: f64::INFINITY, v: vec![1.0, f64::NEG_INFINITY] };
        let text = to_canonical(&s).unwrap();
        assert!(text.contains("\"inf\"") && text.contains("\"-inf\""));
        let back: S = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn index_lists() {
        assert_eq!(parse_index_list("0, 1,3").unwrap(), vec![0, 1, 3]);
        assert!(parse_index_list("0,x").is_err());
    }
}
