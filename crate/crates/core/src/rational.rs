//! Text and JSON forms of exact rationals.
//!
//! Rationals print as `"num/den"` (or just `"num"` when the denominator is
//! 1). In JSON reports they appear as `{"num": "..", "den": "..", "value": f64}`
//! where `value` is a convenience approximation only.

use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::combinatorics::ExactRational;
use crate::error::{Error, Result};

/// Parses `"a/b"`, `"a"`, or a finite decimal such as `"0.52"`, exactly.
pub fn parse_rational(s: &str) -> Result<ExactRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    if let Some((num, den)) = s.split_once('/') {
        let num = BigInt::from_str(num.trim()).map_err(|_| bad())?;
        let den = BigInt::from_str(den.trim()).map_err(|_| bad())?;
        if den.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(BigRational::new(num, den));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = int.starts_with('-');
        let int = if int.is_empty() || int == "-" { "0" } else { int };
        let whole = BigInt::from_str(int).map_err(|_| bad())?;
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let frac = BigInt::from_str(frac).map_err(|_| bad())?;
        let magnitude = whole.abs() * &scale + frac;
        let num = if negative { -magnitude } else { magnitude };
        return Ok(BigRational::new(num, scale));
    }
    BigInt::from_str(s)
        .map(BigRational::from_integer)
        .map_err(|_| bad())
}

pub fn format_rational(r: &ExactRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn to_f64(r: &ExactRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// JSON object form used in reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalJson {
    pub num: String,
    pub den: String,
    /// `None` when the value is outside the `f64` range.
    pub value: Option<f64>,
}

impl From<&ExactRational> for RationalJson {
    fn from(r: &ExactRational) -> Self {
        RationalJson {
            num: r.numer().to_string(),
            den: r.denom().to_string(),
            value: Some(to_f64(r)).filter(|v| v.is_finite()),
        }
    }
}

impl TryFrom<&RationalJson> for ExactRational {
    type Error = Error;

    fn try_from(j: &RationalJson) -> Result<Self> {
        parse_rational(&format!("{}/{}", j.num, j.den))
    }
}

/// `serde(with = ...)` helper storing a rational as its `"num/den"` string.
pub mod as_string {
    use super::*;

    pub fn serialize<S: Serializer>(r: &ExactRational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<ExactRational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}
