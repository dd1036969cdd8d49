//! Angles written either as multiples of π or as radians.

use std::f64::consts::PI;

use serde::{Deserialize, Deserializer};

use crate::error::{Error, Result};

/// Parses `"0.5pi"`, `"3π/4"`, `"-pi/2"`, `"3*pi/4"`, `"pi"` or plain radians.
pub fn parse_angle(text: &str) -> Result<f64> {
    let s: String = text.trim().chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Angle(format!("cannot parse angle `{text}`"));
    if s.is_empty() {
        return Err(bad());
    }
    let lower = s.to_lowercase().replace('π', "pi");
    let Some(pos) = lower.find("pi") else {
        return lower.parse::<f64>().map_err(|_| bad()).and_then(|v| finite(v, text));
    };
    let (head, tail) = (&lower[..pos], &lower[pos + 2..]);
    let head = head.strip_suffix('*').unwrap_or(head);
    let coeff = match head {
        "" | "+" => 1.0,
        "-" => -1.0,
        h => h.parse::<f64>().map_err(|_| bad())?,
    };
    let denom = match tail {
        "" => 1.0,
        t => t.strip_prefix('/').ok_or_else(bad)?.parse::<f64>().map_err(|_| bad())?,
    };
    if denom == 0.0 {
        return Err(bad());
    }
    finite(coeff * PI / denom, text)
}

fn finite(v: f64, text: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Angle(format!("angle `{text}` is not finite")))
    }
}

/// Writes `x` as a reduced multiple of π when one with denominator at most
/// 64 matches to 1e-9; otherwise as radians.
pub fn format_angle(x: f64) -> String {
    if x.abs() < 1e-12 {
        return "0".into();
    }
    let r = x / PI;
    for d in 1..=64i64 {
        let k = (r * d as f64).round();
        if (r * d as f64 - k).abs() < 1e-9 * d as f64 {
            let k = k as i64;
            let g = gcd(k.unsigned_abs(), d as u64) as i64;
            let (k, d) = (k / g, d / g);
            let num = match k {
                1 => "π".to_string(),
                -1 => "-π".to_string(),
                k => format!("{k}π"),
            };
            return if d == 1 { num } else { format!("{num}/{d}") };
        }
    }
    format!("{x}")
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a.max(1)
    } else {
        gcd(b, a % b)
    }
}

/// Config value accepting a JSON number (radians) or an angle string.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Angle(pub f64);

impl<'de> Deserialize<'de> for Angle {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Angle(v)),
            Raw::Text(t) => parse_angle(&t).map(Angle).map_err(serde::de::Error::custom),
        }
    }
}
