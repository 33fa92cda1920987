use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Sub};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

const TICKS_PER_SECOND: i64 = 1_000_000;
const FRACTION_DIGITS: usize = 6;

/// A duration or instant in seconds, stored as an integer count of
/// microseconds so that translations and sums are exact.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Seconds(i64);

impl Seconds {
    pub const ZERO: Seconds = Seconds(0);

    pub const fn from_micros(micros: i64) -> Self {
        Seconds(micros)
    }

    pub const fn from_secs(secs: i64) -> Self {
        Seconds(secs * TICKS_PER_SECOND)
    }

    pub fn from_millis(millis: i64) -> Self {
        Seconds(millis * 1_000)
    }

    pub const fn as_micros(self) -> i64 {
        self.0
    }

    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 / TICKS_PER_SECOND as f64
    }

    pub fn is_negative(self) -> bool {
        self.0 < 0
    }

    /// `self - rhs`, clamped at zero.
    pub fn saturating_sub(self, rhs: Seconds) -> Seconds {
        Seconds((self.0 - rhs.0).max(0))
    }
}

impl Add for Seconds {
    type Output = Seconds;
    fn add(self, rhs: Seconds) -> Seconds {
        Seconds(self.0 + rhs.0)
    }
}

impl AddAssign for Seconds {
    fn add_assign(&mut self, rhs: Seconds) {
        self.0 += rhs.0;
    }
}

impl Sub for Seconds {
    type Output = Seconds;
    fn sub(self, rhs: Seconds) -> Seconds {
        Seconds(self.0 - rhs.0)
    }
}

impl Sum for Seconds {
    fn sum<I: Iterator<Item = Seconds>>(iter: I) -> Seconds {
        iter.fold(Seconds::ZERO, Add::add)
    }
}

impl fmt::Display for Seconds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        let whole = abs / TICKS_PER_SECOND as u64;
        let frac = abs % TICKS_PER_SECOND as u64;
        if frac == 0 {
            write!(f, "{sign}{whole}")
        } else {
            let digits = format!("{frac:06}");
            write!(f, "{sign}{whole}.{}", digits.trim_end_matches('0'))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseSecondsError(String);

impl fmt::Display for ParseSecondsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{}` is not a decimal number", self.0)
    }
}

impl std::error::Error for ParseSecondsError {}

impl FromStr for Seconds {
    type Err = ParseSecondsError;

    /// Parses plain decimals exactly. Inputs with an exponent or more than
    /// six fractional digits go through `f64` and are rounded to the
    /// nearest microsecond.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseSecondsError(s.to_string());
        let text = s.trim();
        let (negative, body) = match text.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, text.strip_prefix('+').unwrap_or(text)),
        };
        let (whole, frac) = body.split_once('.').unwrap_or((body, ""));
        let plain = !(whole.is_empty() && frac.is_empty())
            && whole.bytes().all(|b| b.is_ascii_digit())
            && frac.bytes().all(|b| b.is_ascii_digit());
        if plain && frac.len() <= FRACTION_DIGITS && whole.len() <= 12 {
            let whole: i64 = if whole.is_empty() {
                0
            } else {
                whole.parse().map_err(|_| err())?
            };
            let frac_ticks: i64 = if frac.is_empty() {
                0
            } else {
                format!("{frac:0<6}").parse().map_err(|_| err())?
            };
            let ticks = whole * TICKS_PER_SECOND + frac_ticks;
            return Ok(Seconds(if negative { -ticks } else { ticks }));
        }
        let value: f64 = text.parse().map_err(|_| err())?;
        if !value.is_finite() || value.abs() > 9.0e12 {
            return Err(err());
        }
        Ok(Seconds((value * TICKS_PER_SECOND as f64).round() as i64))
    }
}

impl Serialize for Seconds {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Seconds {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}
