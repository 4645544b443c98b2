//! Numbers carried as decimal strings in config and report files.

use std::fmt;
use std::str::FromStr;

use d22_core::{c, C64};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A real number written as a decimal string, e.g. `"0.37"` or `"1e-10"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decimal(pub f64);

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // shortest representation that parses back to the same f64
        write!(f, "{:?}", self.0)
    }
}

impl FromStr for Decimal {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        s.trim()
            .parse::<f64>()
            .map(Decimal)
            .map_err(|_| format!("not a decimal number: {s:?}"))
    }
}

impl Serialize for Decimal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Decimal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl From<f64> for Decimal {
    fn from(x: f64) -> Self {
        Decimal(x)
    }
}

/// A complex number with explicit real and imaginary decimal strings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecimalComplex {
    pub re: Decimal,
    pub im: Decimal,
}

impl DecimalComplex {
    pub fn value(self) -> C64 {
        c(self.re.0, self.im.0)
    }
}

impl From<C64> for DecimalComplex {
    fn from(z: C64) -> Self {
        Self {
            re: Decimal(z.re),
            im: Decimal(z.im),
        }
    }
}

impl From<f64> for DecimalComplex {
    fn from(x: f64) -> Self {
        Self {
            re: Decimal(x),
            im: Decimal(0.0),
        }
    }
}

/// Parses `"re,im"` or a bare real.
impl FromStr for DecimalComplex {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.split_once(',') {
            Some((re, im)) => Ok(Self {
                re: re.parse()?,
                im: im.parse()?,
            }),
            None => Ok(Self {
                re: s.parse()?,
                im: Decimal(0.0),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_exactly() {
        for x in [0.1, -0.29, 1e-30, 20240101.0, f64::INFINITY, 0.1 + 0.2] {
            let s = serde_json::to_string(&Decimal(x)).unwrap();
            let back: Decimal = serde_json::from_str(&s).unwrap();
            assert_eq!(back.0.to_bits(), x.to_bits(), "{s}");
        }
        let z: DecimalComplex = "0.21,-0.33".parse().unwrap();
        assert_eq!(z.value(), c(0.21, -0.33));
        assert!("abc".parse::<Decimal>().is_err());
        assert!(serde_json::from_str::<Decimal>("0.5").is_err());
    }
}
