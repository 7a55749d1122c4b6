//! Text and JSON forms shared by the CLI and its consumers.
//!
//! Rationals are reduced `p/q` strings and integers are decimal strings,
//! so nothing passes through a JSON float. Matrices carry their index
//! offset: row/column `t` is carry state `t - offset`.

use std::fmt::Display;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::chain::CarriesMatrix;
use crate::error::{invalid, Error, Result};
use crate::linalg::ZMatrix;
use crate::rational::{parse_pq, to_pq};

fn ser_display<T: Display, S: Serializer>(v: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

/// Accepts either a JSON string or a JSON number.
fn de_from_text<'de, T, D>(d: D) -> std::result::Result<T, D::Error>
where
    T: FromStr,
    T::Err: Display,
    D: Deserializer<'de>,
{
    let v = serde_json::Value::deserialize(d)?;
    let text = match v {
        serde_json::Value::String(s) => s,
        serde_json::Value::Number(n) => n.to_string(),
        other => return Err(D::Error::custom(format!("expected integer, found {other}"))),
    };
    text.parse().map_err(D::Error::custom)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixWire {
    #[serde(serialize_with = "ser_display", deserialize_with = "de_from_text")]
    pub n: usize,
    #[serde(serialize_with = "ser_display", deserialize_with = "de_from_text")]
    pub base: BigUint,
    #[serde(serialize_with = "ser_display", deserialize_with = "de_from_text")]
    pub offset: i64,
    pub rows: Vec<Vec<String>>,
}

impl From<&CarriesMatrix> for MatrixWire {
    fn from(k: &CarriesMatrix) -> Self {
        Self {
            n: k.n(),
            base: k.base().clone(),
            offset: k.offset(),
            rows: k
                .entries()
                .iter()
                .map(|r| r.iter().map(to_pq).collect())
                .collect(),
        }
    }
}

impl TryFrom<MatrixWire> for CarriesMatrix {
    type Error = Error;

    fn try_from(w: MatrixWire) -> Result<Self> {
        let entries = w
            .rows
            .iter()
            .map(|r| r.iter().map(|s| parse_pq(s)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        CarriesMatrix::from_parts(w.n, w.base, w.offset, entries)
    }
}

pub fn matrix_csv(k: &CarriesMatrix) -> String {
    k.entries()
        .iter()
        .map(|r| r.iter().map(to_pq).collect::<Vec<_>>().join(","))
        .map(|line| line + "\n")
        .collect()
}

pub fn int_matrix_strings(m: &ZMatrix) -> Vec<Vec<String>> {
    m.iter().map(|r| r.iter().map(BigInt::to_string).collect()).collect()
}

pub fn parse_int_matrix(rows: &[Vec<String>]) -> Result<ZMatrix> {
    rows.iter()
        .map(|r| {
            r.iter()
                .map(|s| {
                    s.trim()
                        .parse::<BigInt>()
                        .map_err(|_| Error::InvalidArgument(format!("not an integer: {s:?}")))
                })
                .collect()
        })
        .collect()
}

pub fn int_matrix_csv(m: &ZMatrix) -> String {
    m.iter()
        .map(|r| r.iter().map(BigInt::to_string).collect::<Vec<_>>().join(",") + "\n")
        .collect()
}

/// Parses the CSV form written by [`matrix_csv`].
pub fn parse_matrix_csv(text: &str, n: usize, base: BigUint, offset: i64) -> Result<CarriesMatrix> {
    let entries = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split(',').map(parse_pq).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    if entries.is_empty() {
        return invalid("empty matrix");
    }
    CarriesMatrix::from_parts(n, base, offset, entries)
}

/// Replaces every JSON number with its decimal string.
pub fn stringify_numbers(v: serde_json::Value) -> serde_json::Value {
    use serde_json::Value;
    match v {
        Value::Number(n) => Value::String(n.to_string()),
        Value::Array(a) => Value::Array(a.into_iter().map(stringify_numbers).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, stringify_numbers(v))).collect()),
        other => other,
    }
}
