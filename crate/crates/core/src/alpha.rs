//! Extended-real dB values, where `-inf` is a legal value.

use std::fmt;
use std::str::FromStr;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A dB quantity that may be `-inf`. Serialized as a number, or as the
/// string `"-inf"` where the format has no infinity literal (JSON).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct AlphaDb(pub f64);

impl AlphaDb {
    pub const NEG_INF: AlphaDb = AlphaDb(f64::NEG_INFINITY);

    pub fn is_neg_inf(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    pub fn linear(self) -> f64 {
        crate::numerics::from_db(self.0)
    }
}

impl fmt::Display for AlphaDb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_neg_inf() {
            f.write_str("-inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl FromStr for AlphaDb {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("-inf") {
            return Ok(AlphaDb::NEG_INF);
        }
        let v: f64 = t
            .parse()
            .map_err(|_| format!("`{s}` is not a dB value or -inf"))?;
        if !v.is_finite() {
            return Err(format!("`{s}`: only finite values or -inf are allowed"));
        }
        Ok(AlphaDb(v))
    }
}

impl Serialize for AlphaDb {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else {
            s.serialize_str(&self.to_string())
        }
    }
}

impl<'de> Deserialize<'de> for AlphaDb {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = AlphaDb;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a dB number or \"-inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<AlphaDb, E> {
                if v.is_nan() || v == f64::INFINITY {
                    return Err(E::custom("alpha must be finite or -inf"));
                }
                Ok(AlphaDb(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<AlphaDb, E> {
                Ok(AlphaDb(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<AlphaDb, E> {
                Ok(AlphaDb(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<AlphaDb, E> {
                v.parse().map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}
