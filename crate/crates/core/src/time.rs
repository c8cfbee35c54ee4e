//! Exact rational time.
//!
//! Every instant, duration and cost in the simulator is an exact rational.
//! Adversarial constructions mix huge setup times with half-unit offsets,
//! and event ties must resolve identically on every run, so nothing here
//! ever rounds.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Sub};
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Signed exact rational used for ratios, bounds and intermediate algebra.
pub type Rational = Ratio<i128>;

/// Builds a rational from an integer pair. Panics on a zero denominator.
pub fn rational(num: i128, den: i128) -> Rational {
    Ratio::new(num, den)
}

/// Integer as a rational.
pub fn int(n: i128) -> Rational {
    Ratio::from_integer(n)
}

/// Parses `"num/den"` or a bare integer.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("invalid rational {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: i128 = n.trim().parse().map_err(|_| bad())?;
            let d: i128 = d.trim().parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(bad());
            }
            Ok(Ratio::new(n, d))
        }
        None => s.parse::<i128>().map(Ratio::from_integer).map_err(|_| bad()),
    }
}

/// Canonical `"num/den"` rendering (denominator always present).
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Lossy conversion for decimal convenience columns.
pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// A non-negative exact rational instant or duration.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Time(Rational);

impl Time {
    pub const ZERO: Time = Time(Ratio::new_raw(0, 1));

    /// Rejects negative values.
    pub fn new(value: Rational) -> Result<Self> {
        if value.is_negative() {
            Err(Error::NegativeValue(format_rational(&value)))
        } else {
            Ok(Time(value))
        }
    }

    pub fn from_int(n: u64) -> Self {
        Time(Ratio::from_integer(n as i128))
    }

    pub fn from_ratio(num: u64, den: u64) -> Self {
        Time(Ratio::new(num as i128, den as i128))
    }

    pub fn value(&self) -> Rational {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// `self - other`, or `None` when the result would be negative.
    pub fn checked_sub(self, other: Time) -> Option<Time> {
        let d = self.0 - other.0;
        (!d.is_negative()).then_some(Time(d))
    }

    /// `max(self - other, 0)`.
    pub fn saturating_sub(self, other: Time) -> Time {
        self.checked_sub(other).unwrap_or(Time::ZERO)
    }

    /// Scales by a non-negative rational factor.
    pub fn scale(self, factor: Rational) -> Result<Time> {
        Time::new(self.0 * factor)
    }

    pub fn to_f64(&self) -> f64 {
        to_f64(&self.0)
    }
}

impl Default for Time {
    fn default() -> Self {
        Time::ZERO
    }
}

impl fmt::Display for Time {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl fmt::Debug for Time {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Time {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Time::new(parse_rational(s)?)
    }
}

impl From<u64> for Time {
    fn from(n: u64) -> Self {
        Time::from_int(n)
    }
}

impl From<Time> for Rational {
    fn from(t: Time) -> Self {
        t.0
    }
}

impl Add for Time {
    type Output = Time;

    fn add(self, rhs: Time) -> Time {
        Time(self.0 + rhs.0)
    }
}

impl AddAssign for Time {
    fn add_assign(&mut self, rhs: Time) {
        self.0 += rhs.0;
    }
}

/// Panics if the difference is negative; use [`Time::checked_sub`] when
/// that can legitimately happen.
impl Sub for Time {
    type Output = Time;

    fn sub(self, rhs: Time) -> Time {
        self.checked_sub(rhs)
            .unwrap_or_else(|| panic!("negative time: {self} - {rhs}"))
    }
}

impl Mul<u64> for Time {
    type Output = Time;

    fn mul(self, rhs: u64) -> Time {
        Time(self.0 * Ratio::from_integer(rhs as i128))
    }
}

impl Sum for Time {
    fn sum<I: Iterator<Item = Time>>(iter: I) -> Time {
        iter.fold(Time::ZERO, Add::add)
    }
}

impl<'a> Sum<&'a Time> for Time {
    fn sum<I: Iterator<Item = &'a Time>>(iter: I) -> Time {
        iter.copied().sum()
    }
}

impl Serialize for Time {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Time {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = serde_rational::deserialize(d)?;
        Time::new(r).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for [`Rational`] fields: writes `"num/den"`, accepts a
/// string or a bare JSON integer.
pub mod serde_rational {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(n) => Ok(Ratio::from_integer(n as i128)),
            Raw::Str(s) => parse_rational(&s).map_err(serde::de::Error::custom),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_both_forms() {
        assert_eq!("5/2".parse::<Time>().unwrap(), Time::from_ratio(5, 2));
        assert_eq!("7".parse::<Time>().unwrap(), Time::from_int(7));
        assert_eq!("4/2".parse::<Time>().unwrap().to_string(), "2/1");
        assert!("-1/2".parse::<Time>().is_err());
        assert!("1/0".parse::<Time>().is_err());
        assert!("abc".parse::<Time>().is_err());
    }

    #[test]
    fn json_accepts_integer_shorthand() {
        let t: Time = serde_json::from_str("3").unwrap();
        assert_eq!(t, Time::from_int(3));
        let t: Time = serde_json::from_str("\"6/4\"").unwrap();
        assert_eq!(serde_json::to_string(&t).unwrap(), "\"3/2\"");
    }

    #[test]
    fn subtraction_guards_sign() {
        let a = Time::from_int(1);
        let b = Time::from_int(2);
        assert_eq!(a.checked_sub(b), None);
        assert_eq!(a.saturating_sub(b), Time::ZERO);
        assert_eq!(b - a, a);
    }

    fn time_strategy() -> impl Strategy<Value = Time> {
        (0u64..10_000, 1u64..500).prop_map(|(n, d)| Time::from_ratio(n, d))
    }

    proptest! {
        #[test]
        fn addition_is_associative_and_commutative(a in time_strategy(), b in time_strategy(), c in time_strategy()) {
            prop_assert_eq!((a + b) + c, a + (b + c));
            prop_assert_eq!(a + b, b + a);
        }

        #[test]
        fn order_is_total_and_consistent_with_addition(a in time_strategy(), b in time_strategy()) {
            prop_assert!(a <= b || b <= a);
            prop_assert!(a + b >= a);
            if a <= b {
                prop_assert_eq!(a + (b - a), b);
            }
        }

        #[test]
        fn display_round_trips(a in time_strategy()) {
            prop_assert_eq!(a.to_string().parse::<Time>().unwrap(), a);
        }
    }
}
