//! Unit handling.
//!
//! Internally every rate is in bits/second, every size in bits and every
//! duration in seconds. Sizes use decimal SI prefixes: `1 KB = 8e3` bits,
//! `1 MB = 8e6` bits, `1 Mbps = 1e6` bits/second.
//!
//! Human-entered quantities may be written as plain numbers (already in base
//! units) or as strings with a suffix, e.g. `"300Mbps"`, `"3.2MB"`, `"100ms"`.

use std::fmt;

use serde::{de, Deserializer};

pub const KBPS: f64 = 1e3;
pub const MBPS: f64 = 1e6;
pub const GBPS: f64 = 1e9;

pub const BYTE: f64 = 8.0;
pub const KB: f64 = 8e3;
pub const MB: f64 = 8e6;
pub const GB: f64 = 8e9;

pub const MS: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Rate,
    Size,
    Time,
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dimension::Rate => "rate",
            Dimension::Size => "size",
            Dimension::Time => "time",
        })
    }
}

fn suffix_scale(dim: Dimension, suffix: &str) -> Option<f64> {
    let scale = match dim {
        Dimension::Rate => match suffix {
            "" | "bps" | "b/s" => 1.0,
            "kbps" | "Kbps" | "kb/s" => KBPS,
            "Mbps" | "mbps" | "Mb/s" => MBPS,
            "Gbps" | "gbps" | "Gb/s" => GBPS,
            _ => return None,
        },
        Dimension::Size => match suffix {
            "" | "b" | "bit" | "bits" => 1.0,
            "B" => BYTE,
            "KB" | "kB" => KB,
            "MB" => MB,
            "GB" => GB,
            _ => return None,
        },
        Dimension::Time => match suffix {
            "" | "s" => 1.0,
            "ms" => MS,
            "us" => 1e-6,
            "min" => 60.0,
            _ => return None,
        },
    };
    Some(scale)
}

/// Parses `"<number><suffix>"` into base units for the given dimension.
pub fn parse_quantity(text: &str, dim: Dimension) -> Result<f64, String> {
    let text = text.trim();
    let split = text
        .find(|c: char| !(c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E')))
        .unwrap_or(text.len());
    // An exponent marker directly followed by a letter belongs to the suffix.
    let split = if split > 0 && text[..split].ends_with(['e', 'E']) {
        split - 1
    } else {
        split
    };
    let (num, suffix) = text.split_at(split);
    let value: f64 = num
        .parse()
        .map_err(|_| format!("cannot parse `{text}` as a {dim}"))?;
    let scale = suffix_scale(dim, suffix.trim())
        .ok_or_else(|| format!("unknown {dim} unit `{}` in `{text}`", suffix.trim()))?;
    Ok(value * scale)
}

fn quantity<'de, D: Deserializer<'de>>(d: D, dim: Dimension) -> Result<f64, D::Error> {
    struct Visitor(Dimension);

    impl<'de> de::Visitor<'de> for Visitor {
        type Value = f64;

        fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            write!(f, "a {} as a number in base units or a string with a unit suffix", self.0)
        }

        fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
            Ok(v)
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
            Ok(v as f64)
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
            Ok(v as f64)
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
            parse_quantity(v, self.0).map_err(E::custom)
        }
    }

    d.deserialize_any(Visitor(dim))
}

/// Serde helpers for unit-bearing fields. Serialization always writes base units.
pub mod serde_rate {
    use super::*;
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        quantity(d, Dimension::Rate)
    }
    pub fn serialize<S: serde::Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(*v)
    }
}

pub mod serde_size {
    use super::*;
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        quantity(d, Dimension::Size)
    }
    pub fn serialize<S: serde::Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(*v)
    }
}

pub mod serde_time {
    use super::*;
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        quantity(d, Dimension::Time)
    }
    pub fn serialize<S: serde::Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(*v)
    }
}

macro_rules! vec_quantity {
    ($name:ident, $dim:expr) => {
        pub mod $name {
            use super::*;
            use serde::Deserialize;

            #[derive(Deserialize)]
            struct Item(#[serde(deserialize_with = "item")] f64);

            fn item<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
                quantity(d, $dim)
            }

            pub fn deserialize<'de, D: Deserializer<'de>>(
                d: D,
            ) -> Result<Option<Vec<f64>>, D::Error> {
                let items: Option<Vec<Item>> = Option::deserialize(d)?;
                Ok(items.map(|v| v.into_iter().map(|i| i.0).collect()))
            }

            pub fn serialize<S: serde::Serializer>(
                v: &Option<Vec<f64>>,
                s: S,
            ) -> Result<S::Ok, S::Error> {
                serde::Serialize::serialize(v, s)
            }
        }
    };
}

vec_quantity!(serde_rate_vec, Dimension::Rate);
vec_quantity!(serde_time_vec, Dimension::Time);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_suffixes() {
        assert_eq!(parse_quantity("300Mbps", Dimension::Rate).unwrap(), 3e8);
        assert_eq!(parse_quantity("0.5 Mbps", Dimension::Rate).unwrap(), 5e5);
        assert_eq!(parse_quantity("8KB", Dimension::Size).unwrap(), 64_000.0);
        assert_eq!(parse_quantity("1000B", Dimension::Size).unwrap(), 8000.0);
        assert_eq!(parse_quantity("20MB", Dimension::Size).unwrap(), 1.6e8);
        assert_eq!(parse_quantity("100ms", Dimension::Time).unwrap(), 0.1);
        assert_eq!(parse_quantity("1e3", Dimension::Time).unwrap(), 1000.0);
        assert_eq!(parse_quantity("2.5e6bps", Dimension::Rate).unwrap(), 2.5e6);
    }

    #[test]
    fn rejects_wrong_dimension() {
        assert!(parse_quantity("3MB", Dimension::Rate).is_err());
        assert!(parse_quantity("Mbps", Dimension::Rate).is_err());
        assert!(parse_quantity("10 furlongs", Dimension::Time).is_err());
    }
}
