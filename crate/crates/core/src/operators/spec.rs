//! JSON operator specifications.
//!
//! ```json
//! { "kind": "diagonal", "symbol": "one_minus_inv_j" }
//! { "kind": "dense", "matrix": [[[0, 0], [1, 0]], [[0, 0], [0, 0]]] }
//! { "kind": "weighted_shift", "weights": "const:1", "space": "c0" }
//! { "kind": "rank_one_functional", "weights": "inv_j_pow:1" }
//! { "kind": "composite", "factors": [ ... ] }
//! ```
//!
//! Matrix entries and affine coefficients are either plain numbers or
//! `[re, im]` pairs.

use serde_json::Value;

use super::symbol::DiagonalSymbol;
use super::{LinearOperator, SequenceSpace};
use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, C64, ONE};

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSpec {
    pub label: Option<String>,
    pub operator: LinearOperator,
}

fn parse_err(field: &str, reason: impl Into<String>) -> Error {
    Error::Parse {
        field: field.to_string(),
        reason: reason.into(),
    }
}

fn complex(v: &Value, field: &str) -> Result<C64> {
    match v {
        Value::Number(n) => Ok(C64::new(n.as_f64().unwrap_or(f64::NAN), 0.0)),
        Value::Array(pair) if pair.len() == 2 => {
            let re = pair[0].as_f64().ok_or_else(|| parse_err(field, "real part is not a number"))?;
            let im = pair[1].as_f64().ok_or_else(|| parse_err(field, "imaginary part is not a number"))?;
            Ok(C64::new(re, im))
        }
        _ => Err(parse_err(field, "expected a number or a [re, im] pair")),
    }
}

fn numbers(s: &str, field: &str, count: usize) -> Result<Vec<f64>> {
    let out: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| parse_err(field, format!("bad number in `{s}`: {e}")))?;
    if out.len() != count {
        return Err(parse_err(field, format!("expected {count} parameters in `{s}`")));
    }
    Ok(out)
}

/// Parses a symbol string such as `one_minus_inv_j`, `inv_j_pow:0.5`,
/// `const:1`, `log_weight:1,0`, `inv_pow_log:0.5,1`, `rotated:1,1,0.5`,
/// `one_minus_inv_j_pow:2`, `complement:<symbol>` or `explicit:[...]`.
pub fn parse_symbol(s: &str) -> Result<DiagonalSymbol> {
    let field = "symbol";
    let s = s.trim();
    let (name, arg) = match s.split_once(':') {
        Some((n, a)) => (n.trim(), Some(a.trim())),
        None => (s, None),
    };
    fn need<'a>(a: Option<&'a str>, name: &str) -> Result<&'a str> {
        a.ok_or_else(|| parse_err("symbol", format!("`{name}` needs parameters")))
    }
    let sym = match name {
        "one_minus_inv_j" => DiagonalSymbol::one_minus_inv_j(),
        "one_minus_inv_sqrt_j" => DiagonalSymbol::one_minus_inv_sqrt_j(),
        "one_minus_inv_j_pow" => DiagonalSymbol::one_minus_inv_pow(numbers(need(arg, name)?, field, 1)?[0]),
        "inv_j_pow" => DiagonalSymbol::inv_pow(numbers(need(arg, name)?, field, 1)?[0], 1.0),
        "const" => DiagonalSymbol::constant(C64::new(numbers(need(arg, name)?, field, 1)?[0], 0.0)),
        "log_weight" => {
            let p = numbers(need(arg, name)?, field, 2)?;
            DiagonalSymbol::LogWeight {
                exponent: p[0],
                log_power: p[1],
                offset: 1.0,
            }
        }
        "inv_pow_log" => {
            let p = numbers(need(arg, name)?, field, 2)?;
            DiagonalSymbol::LogWeight {
                exponent: p[0],
                log_power: p[1],
                offset: std::f64::consts::E,
            }
        }
        "rotated" => {
            let p = numbers(need(arg, name)?, field, 3)?;
            DiagonalSymbol::Rotated {
                exponent: p[0],
                twist: p[1],
                twist_exponent: p[2],
            }
        }
        "complement" => parse_symbol(need(arg, name)?)?.complement(),
        "explicit" => {
            let v: Value = serde_json::from_str(need(arg, name)?)
                .map_err(|e| parse_err(field, format!("explicit values: {e}")))?;
            let arr = v.as_array().ok_or_else(|| parse_err(field, "explicit values must be a list"))?;
            let values = arr.iter().map(|x| complex(x, field)).collect::<Result<Vec<_>>>()?;
            DiagonalSymbol::explicit(values)?
        }
        other => return Err(parse_err(field, format!("unknown symbol `{other}`"))),
    };
    sym.validate()?;
    Ok(sym)
}

fn symbol_field(obj: &serde_json::Map<String, Value>, key: &str) -> Result<DiagonalSymbol> {
    let v = obj.get(key).ok_or_else(|| parse_err(key, "missing"))?;
    let s = v.as_str().ok_or_else(|| parse_err(key, "expected a symbol string"))?;
    let mut sym = parse_symbol(s).map_err(|e| match e {
        Error::Parse { reason, .. } => parse_err(key, reason),
        other => other,
    })?;
    if let Some(aff) = obj.get("affine") {
        let shift = aff.get("shift").map(|v| complex(v, "affine.shift")).transpose()?.unwrap_or_default();
        let scale = aff.get("scale").map(|v| complex(v, "affine.scale")).transpose()?.unwrap_or(ONE);
        sym = sym.affine(shift, scale);
    }
    Ok(sym)
}

fn parse_value(v: &Value) -> Result<LinearOperator> {
    let obj = v.as_object().ok_or_else(|| parse_err("kind", "operator spec must be a JSON object"))?;
    let kind = obj
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| parse_err("kind", "missing or not a string"))?;
    let space = match obj.get("space").map(|s| s.as_str()) {
        None => SequenceSpace::L2,
        Some(Some("l2")) => SequenceSpace::L2,
        Some(Some("c0")) => SequenceSpace::C0,
        Some(other) => return Err(parse_err("space", format!("expected \"l2\" or \"c0\", got {other:?}"))),
    };
    let mut op = match kind {
        "dense" => {
            let rows = obj
                .get("matrix")
                .and_then(Value::as_array)
                .ok_or_else(|| parse_err("matrix", "missing or not an array of rows"))?;
            let parsed = rows
                .iter()
                .map(|r| {
                    r.as_array()
                        .ok_or_else(|| parse_err("matrix", "row is not an array"))?
                        .iter()
                        .map(|x| complex(x, "matrix"))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            let m = DenseMatrix::from_rows(parsed).map_err(|e| parse_err("matrix", e.to_string()))?;
            if m.is_square() {
                LinearOperator::dense(m)?
            } else {
                LinearOperator::dense_map(m)
            }
        }
        "diagonal" => LinearOperator::diagonal(symbol_field(obj, "symbol")?)?,
        "weighted_shift" => LinearOperator::shift(symbol_field(obj, "weights")?, space)?,
        "rank_one_functional" => LinearOperator::functional(symbol_field(obj, "weights")?)?,
        "composite" => {
            let factors = obj
                .get("factors")
                .and_then(Value::as_array)
                .ok_or_else(|| parse_err("factors", "missing or not an array"))?;
            LinearOperator::composite(factors.iter().map(parse_value).collect::<Result<Vec<_>>>()?)?
        }
        other => return Err(parse_err("kind", format!("unknown operator kind `{other}`"))),
    };
    op.space = space;
    if let Some(t) = obj.get("truncation") {
        let t = t.as_u64().ok_or_else(|| parse_err("truncation", "expected a positive integer"))?;
        op = op.with_truncation(t as usize);
    }
    Ok(op)
}

pub fn parse_operator_spec(text: &str) -> Result<OperatorSpec> {
    let v: Value = serde_json::from_str(text).map_err(|e| parse_err("<document>", e.to_string()))?;
    let label = v.get("label").and_then(Value::as_str).map(str::to_string);
    Ok(OperatorSpec {
        label,
        operator: parse_value(&v)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_catalog() {
        let d = parse_operator_spec(r#"{"kind":"diagonal","symbol":"one_minus_inv_j"}"#).unwrap();
        assert_eq!(d.operator.as_diagonal(), Some(&DiagonalSymbol::one_minus_inv_j()));
        let s = parse_symbol("inv_j_pow:0.5").unwrap();
        assert!((s.value_at(4).re - 0.5).abs() < 1e-15);
        let e = parse_symbol("explicit:[0.5, [0, 1]]").unwrap();
        assert_eq!(e.value_at(2), C64::new(0.0, 1.0));
        let m = parse_operator_spec(r#"{"kind":"dense","matrix":[[0,[1,0]],[0,0]]}"#).unwrap();
        assert_eq!(m.operator.to_dense().unwrap()[(0, 1)], ONE);
        let sh = parse_operator_spec(r#"{"kind":"weighted_shift","weights":"const:1","space":"c0"}"#).unwrap();
        assert_eq!(sh.operator.space, SequenceSpace::C0);
        let c = parse_symbol("complement:one_minus_inv_j").unwrap();
        assert!((c.value_at(4).re - 0.25).abs() < 1e-15);
    }

    #[test]
    fn errors_name_the_field() {
        let e = parse_operator_spec(r#"{"kind":"diagonal","symbol":"nope"}"#).unwrap_err();
        assert!(matches!(e, Error::Parse { ref field, .. } if field == "symbol"), "{e}");
        let e = parse_operator_spec(r#"{"kind":"dense","matrix":[[1,"x"]]}"#).unwrap_err();
        assert!(matches!(e, Error::Parse { ref field, .. } if field == "matrix"));
        let e = parse_operator_spec(r#"{"symbol":"one_minus_inv_j"}"#).unwrap_err();
        assert!(matches!(e, Error::Parse { ref field, .. } if field == "kind"));
    }
}
