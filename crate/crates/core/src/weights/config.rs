//! TOML / JSON weight-sequence configs.
//!
//! ```toml
//! family = "polylog"
//! c = "1/10"
//! r = 1
//! beta = 3.5
//! b0 = "normalize"
//! ```
//!
//! Numbers may be integers, decimals (read through their decimal text, so
//! `0.1` is exactly `1/10`) or strings such as `"1/3"`.

use rug::Rational;
use serde_json::Value;
use thiserror::Error;

use super::{WeightSequence, B0};
use crate::scalar::parse_rational;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot parse config: {0}")]
    Syntax(String),
    #[error("missing field `{0}`")]
    Missing(String),
    #[error("field `{field}`: {msg}")]
    Invalid { field: String, msg: String },
}

/// Parses a config, trying TOML first and then JSON.
pub fn parse(text: &str) -> Result<WeightSequence, ConfigError> {
    let value: Value = match toml::from_str::<Value>(text) {
        Ok(v) => v,
        Err(toml_err) => serde_json::from_str(text)
            .map_err(|json_err| ConfigError::Syntax(format!("toml: {toml_err}; json: {json_err}")))?,
    };
    from_value(&value)
}

fn number(v: &Value, field: &str) -> Result<Rational, ConfigError> {
    let text = match v {
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        _ => {
            return Err(ConfigError::Invalid { field: field.into(), msg: "expected a number".into() });
        }
    };
    parse_rational(&text).ok_or_else(|| ConfigError::Invalid { field: field.into(), msg: format!("bad number {text:?}") })
}

fn field<'a>(obj: &'a Value, name: &str) -> Result<&'a Value, ConfigError> {
    obj.get(name).ok_or_else(|| ConfigError::Missing(name.into()))
}

pub fn from_value(v: &Value) -> Result<WeightSequence, ConfigError> {
    let family = field(v, "family")?
        .as_str()
        .ok_or_else(|| ConfigError::Invalid { field: "family".into(), msg: "expected a string".into() })?;
    match family {
        "polynomial" => {
            let arr = field(v, "coeffs")?
                .as_array()
                .ok_or_else(|| ConfigError::Invalid { field: "coeffs".into(), msg: "expected an array".into() })?;
            let coeffs = arr.iter().map(|x| number(x, "coeffs")).collect::<Result<Vec<_>, _>>()?;
            Ok(WeightSequence::Polynomial(coeffs))
        }
        "geometric" => Ok(WeightSequence::Geometric { c: number(field(v, "c")?, "c")?, p: number(field(v, "p")?, "p")? }),
        "polylog" => {
            let b0 = match v.get("b0") {
                None => B0::Normalize,
                Some(Value::String(s)) if s == "normalize" => B0::Normalize,
                Some(x) => B0::Value(number(x, "b0")?),
            };
            Ok(WeightSequence::Polylog {
                c: number(field(v, "c")?, "c")?,
                r: v.get("r").map(|x| number(x, "r")).transpose()?.unwrap_or_else(|| Rational::from(1)),
                beta: number(field(v, "beta")?, "beta")?,
                b0,
            })
        }
        "mixture" => {
            let comps = field(v, "components")?
                .as_array()
                .ok_or_else(|| ConfigError::Invalid { field: "components".into(), msg: "expected an array".into() })?;
            let parts = comps
                .iter()
                .map(|c| Ok((number(field(c, "weight")?, "weight")?, from_value(c)?)))
                .collect::<Result<Vec<_>, ConfigError>>()?;
            Ok(WeightSequence::Mixture(parts))
        }
        "scaled" => Ok(WeightSequence::Scaled {
            lambda: number(field(v, "lambda")?, "lambda")?,
            r: number(field(v, "r")?, "r")?,
            inner: Box::new(from_value(field(v, "inner")?)?),
        }),
        other => Err(ConfigError::Invalid { field: "family".into(), msg: format!("unknown family {other:?}") }),
    }
}

/// Config text for `ws` in TOML form (inverse of [`parse`] on supported families).
pub fn to_value(ws: &WeightSequence) -> Value {
    let s = |q: &Rational| Value::String(q.to_string());
    match ws {
        WeightSequence::Polynomial(c) => serde_json::json!({"family": "polynomial", "coeffs": c.iter().map(s).collect::<Vec<_>>()}),
        WeightSequence::Geometric { c, p } => serde_json::json!({"family": "geometric", "c": s(c), "p": s(p)}),
        WeightSequence::Polylog { c, r, beta, b0 } => serde_json::json!({
            "family": "polylog", "c": s(c), "r": s(r), "beta": s(beta),
            "b0": match b0 { B0::Value(v) => s(v), B0::Normalize => Value::String("normalize".into()) },
        }),
        WeightSequence::Mixture(parts) => serde_json::json!({
            "family": "mixture",
            "components": parts.iter().map(|(w, ws)| {
                let mut v = to_value(ws);
                v["weight"] = s(w);
                v
            }).collect::<Vec<_>>(),
        }),
        WeightSequence::Scaled { lambda, r, inner } => serde_json::json!({
            "family": "scaled", "lambda": s(lambda), "r": s(r), "inner": to_value(inner),
        }),
    }
}
