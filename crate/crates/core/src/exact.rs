//! JSON encodings for exact integers and rationals.
//!
//! Integers are written as JSON numbers when they fit in an `i64` and as
//! decimal strings otherwise. Rationals are always written as
//! `{"num": …, "den": …}` with a positive denominator. On input a rational
//! may also be given as a bare integer, a `[num, den]` pair or an `"a/b"`
//! string.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::de::{self, Deserializer, MapAccess, SeqAccess, Visitor};
use serde::ser::{SerializeMap, SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

/// Serialize wrapper for a big integer.
pub struct IntRef<'a>(pub &'a BigInt);

impl Serialize for IntRef<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self.0.to_i64() {
            Some(v) => serializer.serialize_i64(v),
            None => serializer.serialize_str(&self.0.to_string()),
        }
    }
}

/// Serialize wrapper for a big rational.
pub struct RatRef<'a>(pub &'a BigRational);

impl Serialize for RatRef<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(2))?;
        map.serialize_entry("num", &IntRef(self.0.numer()))?;
        map.serialize_entry("den", &IntRef(self.0.denom()))?;
        map.end()
    }
}

/// Serialize wrapper for a slice of rationals.
pub struct RatSlice<'a>(pub &'a [BigRational]);

impl Serialize for RatSlice<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.0.len()))?;
        for q in self.0 {
            seq.serialize_element(&RatRef(q))?;
        }
        seq.end()
    }
}

/// Serialize wrapper for a slice of big integers.
pub struct IntSlice<'a>(pub &'a [BigInt]);

impl Serialize for IntSlice<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.0.len()))?;
        for v in self.0 {
            seq.serialize_element(&IntRef(v))?;
        }
        seq.end()
    }
}

/// An exact integer read from JSON (number or decimal string).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactInt(pub BigInt);

impl<'de> Deserialize<'de> for ExactInt {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = ExactInt;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an integer or a decimal integer string")
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<ExactInt, E> {
                Ok(ExactInt(BigInt::from(v)))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<ExactInt, E> {
                Ok(ExactInt(BigInt::from(v)))
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<ExactInt, E> {
                Err(E::custom(format!(
                    "expected an exact integer, found floating point value {v}"
                )))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<ExactInt, E> {
                v.trim()
                    .parse::<BigInt>()
                    .map(ExactInt)
                    .map_err(|_| E::custom(format!("invalid integer string {v:?}")))
            }
        }
        deserializer.deserialize_any(V)
    }
}

/// An exact rational read from JSON.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactRational(pub BigRational);

fn make_ratio<E: de::Error>(num: BigInt, den: BigInt) -> Result<BigRational, E> {
    if den.is_zero() {
        return Err(E::custom("rational with zero denominator"));
    }
    Ok(BigRational::new(num, den))
}

impl<'de> Deserialize<'de> for ExactRational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = ExactRational;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an integer, a [num, den] pair, {\"num\", \"den\"} or \"a/b\"")
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<ExactRational, E> {
                Ok(ExactRational(BigRational::from_integer(v.into())))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<ExactRational, E> {
                Ok(ExactRational(BigRational::from_integer(v.into())))
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<ExactRational, E> {
                Err(E::custom(format!(
                    "floating point value {v} where an exact rational is required; \
                     write it as [num, den]"
                )))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<ExactRational, E> {
                let bad = || E::custom(format!("invalid rational string {v:?}"));
                match v.split_once('/') {
                    Some((n, d)) => {
                        let n = n.trim().parse::<BigInt>().map_err(|_| bad())?;
                        let d = d.trim().parse::<BigInt>().map_err(|_| bad())?;
                        make_ratio(n, d).map(ExactRational)
                    }
                    None => v
                        .trim()
                        .parse::<BigInt>()
                        .map(|n| ExactRational(BigRational::from_integer(n)))
                        .map_err(|_| bad()),
                }
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<ExactRational, A::Error> {
                let num: ExactInt = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(0, &self))?;
                let den: ExactInt = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(1, &self))?;
                if seq.next_element::<de::IgnoredAny>()?.is_some() {
                    return Err(de::Error::invalid_length(3, &self));
                }
                make_ratio(num.0, den.0).map(ExactRational)
            }
            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<ExactRational, A::Error> {
                let mut num = None;
                let mut den = None;
                while let Some(key) = map.next_key::<String>()? {
                    match key.as_str() {
                        "num" => num = Some(map.next_value::<ExactInt>()?.0),
                        "den" => den = Some(map.next_value::<ExactInt>()?.0),
                        other => return Err(de::Error::unknown_field(other, &["num", "den"])),
                    }
                }
                let num = num.ok_or_else(|| de::Error::missing_field("num"))?;
                let den = den.unwrap_or_else(|| BigInt::from(1));
                make_ratio(num, den).map(ExactRational)
            }
        }
        deserializer.deserialize_any(V)
    }
}

/// A real number given either as a JSON float or in any exact rational form.
pub fn deserialize_real<'de, D: Deserializer<'de>>(deserializer: D) -> Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Real {
        Float(f64),
        Exact(ExactRational),
    }
    match Real::deserialize(deserializer) {
        Ok(Real::Float(x)) => Ok(x),
        Ok(Real::Exact(q)) => Ok(rational_to_f64(&q.0)),
        Err(_) => Err(de::Error::custom(
            "expected a number, a [num, den] pair, {\"num\", \"den\"} or \"a/b\"",
        )),
    }
}

/// Formats a rational as `a/b`, or `a` when integral.
pub fn format_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Nearest `f64` to a big rational.
pub fn rational_to_f64(q: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (q.numer().to_i64(), q.denom().to_i64()) {
        if n.unsigned_abs() < (1u64 << 53) && d < (1i64 << 53) {
            return n as f64 / d as f64;
        }
    }
    q.to_f64().unwrap_or(f64::NAN)
}
