//! Points of `[0, 1]` in the log-domain coordinate `t = -ln x`.
//!
//! Spikes built from exponents near `10^12` peak at `x = 1 - 7e-13`, which
//! is barely representable as an `f64` close to one. In `t` the same point is
//! `6.9e-13`, a perfectly ordinary double, so every computation in this crate
//! works with `t` and converts to `x` only for display.

use std::cmp::Ordering;
use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{MuntzError, Result};

/// A point `x = e^{-t}` of `[0, 1]`; `t = 0` is `x = 1`, `t = +inf` is `x = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointT {
    t: f64,
}

impl PointT {
    /// `x = 1`.
    pub const ONE: PointT = PointT { t: 0.0 };
    /// `x = 0`.
    pub const ZERO: PointT = PointT { t: f64::INFINITY };

    pub fn new(t: f64) -> Result<Self> {
        if t.is_nan() || t < 0.0 {
            return Err(MuntzError::invalid(format!("t must be a non-negative number, got {t}")));
        }
        // normalise -0.0
        Ok(PointT { t: t + 0.0 })
    }

    pub fn from_x(x: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&x) {
            return Err(MuntzError::invalid(format!("x must lie in [0, 1], got {x}")));
        }
        PointT::new(-x.ln())
    }

    pub(crate) fn from_t_unchecked(t: f64) -> Self {
        debug_assert!(t >= 0.0);
        PointT { t }
    }

    pub fn t(self) -> f64 {
        self.t
    }

    pub fn x(self) -> f64 {
        (-self.t).exp()
    }

    /// `1 - x`, accurate when `x` is close to one.
    pub fn one_minus_x(self) -> f64 {
        -(-self.t).exp_m1()
    }

    pub fn is_zero_x(self) -> bool {
        self.t == f64::INFINITY
    }
}

impl PartialOrd for PointT {
    /// Orders by `x`, i.e. by decreasing `t`.
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        other.t.partial_cmp(&self.t)
    }
}

impl fmt::Display for PointT {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x={} (t={:e})", self.x(), self.t)
    }
}

#[derive(Serialize, Deserialize)]
struct PointRepr {
    #[serde(default)]
    x: Option<f64>,
    #[serde(default)]
    t: Option<f64>,
}

impl Serialize for PointT {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        // t = +inf has no JSON number; it is written as null next to x = 0.
        let t = self.t.is_finite().then_some(self.t);
        PointRepr { x: Some(self.x()), t }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PointT {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = PointRepr::deserialize(d)?;
        match (repr.t, repr.x) {
            (Some(t), _) => PointT::new(t).map_err(D::Error::custom),
            (None, Some(x)) => PointT::from_x(x).map_err(D::Error::custom),
            (None, None) => Err(D::Error::custom("point needs an \"x\" or \"t\" field")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints() {
        assert_eq!(PointT::ONE.x(), 1.0);
        assert_eq!(PointT::ZERO.x(), 0.0);
        assert_eq!(PointT::from_x(0.0).unwrap(), PointT::ZERO);
        assert_eq!(PointT::from_x(1.0).unwrap(), PointT::ONE);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(PointT::new(-1.0).is_err());
        assert!(PointT::new(f64::NAN).is_err());
        assert!(PointT::from_x(1.5).is_err());
        assert!(PointT::from_x(-0.1).is_err());
    }

    #[test]
    fn ordering_follows_x() {
        let a = PointT::from_x(0.2).unwrap();
        let b = PointT::from_x(0.7).unwrap();
        assert!(a < b);
        assert!(a.t() > b.t());
    }

    #[test]
    fn json_t_is_canonical() {
        let p: PointT = serde_json::from_str(r#"{"x": 0.9, "t": 0.5}"#).unwrap();
        assert_eq!(p.t(), 0.5);
        let q: PointT = serde_json::from_str(r#"{"x": 0.5}"#).unwrap();
        assert!((q.t() - std::f64::consts::LN_2).abs() < 1e-16);
        let z: PointT = serde_json::from_str(&serde_json::to_string(&PointT::ZERO).unwrap()).unwrap();
        assert!(z.is_zero_x());
    }

    #[test]
    fn near_one_is_representable() {
        let p = PointT::new(6.9e-13).unwrap();
        assert!((p.one_minus_x() - 6.9e-13).abs() < 1e-24);
    }
}
