//! JSON encodings.
//!
//! Univariate: `{"coeffs":[[re,im],...]}`, ascending degree.
//! Bivariate: `{"monomials":[{"i":..,"j":..,"re":..,"im":..},...]}`.
//! Exact mode writes every real as `{"num":..,"den":..}`; integers that do
//! not fit in an `i64` are written as decimal strings.

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use super::{BiPoly, UniPoly};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("malformed polynomial JSON: {0}")]
pub struct JsonError(pub String);

fn bad<T>(msg: impl Into<String>) -> Result<T, JsonError> {
    Err(JsonError(msg.into()))
}

/// Scalars with a JSON encoding.
pub trait JsonScalar: Real {
    fn to_json(&self) -> Value;
    fn from_json(v: &Value) -> Result<Self, JsonError>;
}

fn big_to_json(b: &BigInt) -> Value {
    match b.to_i64() {
        Some(i) => json!(i),
        None => json!(b.to_string()),
    }
}

fn big_from_json(v: &Value) -> Result<BigInt, JsonError> {
    match v {
        Value::Number(n) => match n.as_i64() {
            Some(i) => Ok(BigInt::from(i)),
            None => bad(format!("non-integer {n}")),
        },
        Value::String(s) => s.parse().map_err(|_| JsonError(format!("bad integer {s}"))),
        _ => bad("expected integer"),
    }
}

fn ratio_from_json(v: &Value) -> Result<BigRational, JsonError> {
    match v {
        Value::Object(m) => {
            let n = big_from_json(m.get("num").ok_or(JsonError("missing num".into()))?)?;
            let d = match m.get("den") {
                Some(d) => big_from_json(d)?,
                None => BigInt::from(1),
            };
            if d.is_zero() {
                return bad("zero denominator");
            }
            Ok(BigRational::new(n, d))
        }
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(BigRational::from_integer(i.into()))
            } else {
                let f = n.as_f64().ok_or(JsonError("bad number".into()))?;
                BigRational::from_float(f).ok_or(JsonError("non-finite".into()))
            }
        }
        _ => bad("expected number or {num,den}"),
    }
}

impl JsonScalar for f64 {
    fn to_json(&self) -> Value {
        json!(self)
    }
    fn from_json(v: &Value) -> Result<Self, JsonError> {
        match v {
            Value::Number(n) => n.as_f64().ok_or(JsonError("bad number".into())),
            Value::Object(_) => Ok(crate::scalar::ratio_to_f64(&ratio_from_json(v)?)),
            _ => bad("expected number"),
        }
    }
}

impl JsonScalar for BigRational {
    fn to_json(&self) -> Value {
        json!({"num": big_to_json(self.numer()), "den": big_to_json(self.denom())})
    }
    fn from_json(v: &Value) -> Result<Self, JsonError> {
        ratio_from_json(v)
    }
}

fn complex_from_pair<T: JsonScalar>(v: &Value) -> Result<Complex<T>, JsonError> {
    match v {
        Value::Array(a) if a.len() == 2 => Ok(Complex::new(T::from_json(&a[0])?, T::from_json(&a[1])?)),
        Value::Array(a) if a.len() == 1 => Ok(Complex::new(T::from_json(&a[0])?, T::zero())),
        Value::Number(_) | Value::Object(_) => Ok(Complex::new(T::from_json(v)?, T::zero())),
        _ => bad("coefficient must be [re,im]"),
    }
}

pub fn uni_to_json<T: JsonScalar>(p: &UniPoly<T>) -> Value {
    let c: Vec<Value> = p
        .coeffs()
        .iter()
        .map(|c| json!([c.re.to_json(), c.im.to_json()]))
        .collect();
    json!({ "coeffs": c })
}

/// Also accepts a bare coefficient array.
pub fn uni_from_json<T: JsonScalar>(v: &Value) -> Result<UniPoly<T>, JsonError> {
    let arr = match v {
        Value::Object(m) => m.get("coeffs").ok_or(JsonError("missing coeffs".into()))?,
        other => other,
    };
    let Value::Array(a) = arr else {
        return bad("coeffs must be an array");
    };
    Ok(UniPoly::new(
        a.iter().map(complex_from_pair).collect::<Result<Vec<_>, _>>()?,
    ))
}

pub fn bi_to_json<T: JsonScalar>(p: &BiPoly<T>) -> Value {
    let m: Vec<Value> = p
        .terms()
        .iter()
        .map(|(&(i, j), c)| json!({"i": i, "j": j, "re": c.re.to_json(), "im": c.im.to_json()}))
        .collect();
    json!({ "monomials": m })
}

pub fn bi_from_json<T: JsonScalar>(v: &Value) -> Result<BiPoly<T>, JsonError> {
    let Some(Value::Array(a)) = v.get("monomials") else {
        return bad("missing monomials array");
    };
    let mut terms = Vec::new();
    for m in a {
        let idx = |k: &str| -> Result<u32, JsonError> {
            m.get(k)
                .and_then(Value::as_u64)
                .and_then(|x| u32::try_from(x).ok())
                .ok_or(JsonError(format!("monomial needs non-negative integer {k}")))
        };
        let re = T::from_json(m.get("re").ok_or(JsonError("monomial needs re".into()))?)?;
        let im = match m.get("im") {
            Some(v) => T::from_json(v)?,
            None => T::zero(),
        };
        terms.push(((idx("i")?, idx("j")?), Complex::new(re, im)));
    }
    Ok(BiPoly::from_terms(terms))
}

/// A triple (P, Q, R) as `{"P":poly,"Q":poly,"R":poly}`.
pub fn triple_from_json<T: JsonScalar>(v: &Value) -> Result<[UniPoly<T>; 3], JsonError> {
    let get = |k: &str| -> Result<UniPoly<T>, JsonError> {
        let x = v
            .get(k)
            .or_else(|| v.get(k.to_lowercase()))
            .ok_or(JsonError(format!("triple needs {k}")))?;
        uni_from_json(x)
    };
    Ok([get("P")?, get("Q")?, get("R")?])
}

pub fn triple_to_json<T: JsonScalar>(t: &[UniPoly<T>; 3]) -> Value {
    json!({"P": uni_to_json(&t[0]), "Q": uni_to_json(&t[1]), "R": uni_to_json(&t[2])})
}

impl<T: JsonScalar> serde::Serialize for UniPoly<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        uni_to_json(self).serialize(s)
    }
}

impl<'de, T: JsonScalar> serde::Deserialize<'de> for UniPoly<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        uni_from_json(&v).map_err(serde::de::Error::custom)
    }
}

impl<T: JsonScalar> serde::Serialize for BiPoly<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        bi_to_json(self).serialize(s)
    }
}

impl<'de, T: JsonScalar> serde::Deserialize<'de> for BiPoly<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        bi_from_json(&v).map_err(serde::de::Error::custom)
    }
}
