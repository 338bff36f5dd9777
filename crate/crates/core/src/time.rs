//! Times measured in units of the revival time `t_R = 2π/α²`.
//!
//! Rational fractions are kept as numerator/denominator so that spectral
//! phases at the revival points can be reduced with integer arithmetic.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::Error;

/// A point in time expressed as a fraction of `t_R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimePoint {
    /// `num/den · t_R` with `den > 0`, stored in lowest terms.
    Ratio { num: i64, den: i64 },
    /// Arbitrary real fraction of `t_R`.
    Real(f64),
}

fn gcd(mut a: i64, mut b: i64) -> i64 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl TimePoint {
    pub const ZERO: TimePoint = TimePoint::Ratio { num: 0, den: 1 };
    pub const QUARTER: TimePoint = TimePoint::Ratio { num: 1, den: 4 };
    pub const HALF: TimePoint = TimePoint::Ratio { num: 1, den: 2 };
    pub const THREE_QUARTERS: TimePoint = TimePoint::Ratio { num: 3, den: 4 };
    pub const FULL: TimePoint = TimePoint::Ratio { num: 1, den: 1 };

    pub fn ratio(num: i64, den: i64) -> TimePoint {
        assert!(den != 0, "zero denominator");
        let g = gcd(num, den).max(1);
        let s = if den < 0 { -1 } else { 1 };
        TimePoint::Ratio { num: s * num / g, den: s * den / g }
    }

    pub fn real(fraction: f64) -> TimePoint {
        TimePoint::Real(fraction)
    }

    /// Fraction of `t_R` as a float.
    pub fn fraction(&self) -> f64 {
        match *self {
            TimePoint::Ratio { num, den } => num as f64 / den as f64,
            TimePoint::Real(f) => f,
        }
    }

    /// Absolute time for a spectrum with scale `alpha`.
    pub fn absolute(&self, alpha: f64) -> f64 {
        self.fraction() * revival_time(alpha)
    }

    /// `E·t mod 2π` for a level whose reduced energy is `eps = E/α²`.
    ///
    /// With `t = f·t_R` the phase is `2π·eps·f`. Integral `eps` at a rational
    /// time is reduced exactly before the trigonometric call.
    pub fn phase(&self, eps: f64) -> f64 {
        match *self {
            TimePoint::Ratio { num, den } if eps.fract() == 0.0 && eps.abs() < 9.0e15 => {
                let k = (eps as i128 * num as i128).rem_euclid(den as i128);
                TAU * (k as f64) / (den as f64)
            }
            TimePoint::Ratio { num, den } => {
                // Split eps into integer and fractional parts so only the
                // fractional part meets the float division.
                let whole = eps.trunc();
                let k = if whole.abs() < 9.0e15 {
                    (whole as i128 * num as i128).rem_euclid(den as i128) as f64 / den as f64
                } else {
                    (whole * num as f64 / den as f64).rem_euclid(1.0)
                };
                let rest = eps.fract() * num as f64 / den as f64;
                TAU * (k + rest).rem_euclid(1.0)
            }
            TimePoint::Real(f) => TAU * (eps * f).rem_euclid(1.0),
        }
    }
}

/// `t_R = 2π/α²`.
pub fn revival_time(alpha: f64) -> f64 {
    TAU / (alpha * alpha)
}

impl fmt::Display for TimePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            TimePoint::Ratio { num, den: 1 } => write!(f, "{num}"),
            TimePoint::Ratio { num, den } => write!(f, "{num}/{den}"),
            TimePoint::Real(x) => write!(f, "{x}"),
        }
    }
}

impl Serialize for TimePoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.fraction())
    }
}

impl FromStr for TimePoint {
    type Err = Error;

    /// Accepts `p/q`, an integer, or a decimal literal.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || Error::config("time", format!("cannot parse `{s}` as a fraction of t_R"));
        if let Some((p, q)) = s.split_once('/') {
            let num: i64 = p.trim().parse().map_err(|_| bad())?;
            let den: i64 = q.trim().parse().map_err(|_| bad())?;
            if den == 0 {
                return Err(bad());
            }
            return Ok(TimePoint::ratio(num, den));
        }
        if let Ok(n) = s.parse::<i64>() {
            return Ok(TimePoint::ratio(n, 1));
        }
        let x: f64 = s.parse().map_err(|_| bad())?;
        if !x.is_finite() {
            return Err(bad());
        }
        Ok(TimePoint::Real(x))
    }
}

/// `count` evenly spaced time points from `start` to `stop` inclusive.
///
/// Rational endpoints yield rational points, so `0..1` with 2001 points hits
/// `1/4` exactly.
pub fn time_range(start: TimePoint, stop: TimePoint, count: usize) -> Vec<TimePoint> {
    if count == 0 {
        return Vec::new();
    }
    if count == 1 {
        return vec![start];
    }
    let steps = (count - 1) as i64;
    match (start, stop) {
        (TimePoint::Ratio { num: a, den: b }, TimePoint::Ratio { num: c, den: d }) => (0..count as i64)
            .map(|j| {
                // start + j (stop − start)/steps = (a d steps + j (c b − a d)) / (b d steps)
                let num = a * d * steps + j * (c * b - a * d);
                TimePoint::ratio(num, b * d * steps)
            })
            .collect(),
        _ => {
            let (a, b) = (start.fraction(), stop.fraction());
            (0..count)
                .map(|j| TimePoint::Real(a + (b - a) * j as f64 / steps as f64))
                .collect()
        }
    }
}
