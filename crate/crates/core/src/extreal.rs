//! Extended real values: finite `f64` or `+∞`.
//!
//! Regularizers and objectives may take the value `+∞` (hard constraints,
//! indicator profiles). Encoding that case as a dedicated variant rather than
//! a floating sentinel keeps the arithmetic total and the comparisons explicit:
//! `finite + ∞ = ∞`, `max(∞, a) = ∞`, and ordering against `+∞` is exact.

use serde::ser::Serializer;
use serde::Serialize;
use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

/// A value in `ℝ ∪ {+∞}`. The finite payload is always a finite `f64`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    PosInf,
}

impl ExtReal {
    /// Wraps an `f64`, mapping IEEE `+∞` to [`ExtReal::PosInf`].
    ///
    /// Panics on NaN or `-∞`: neither has a meaning in this codebase, so an
    /// occurrence is a bug upstream, not a value to propagate.
    pub fn from_f64(v: f64) -> Self {
        assert!(!v.is_nan(), "ExtReal does not represent NaN");
        if v == f64::INFINITY {
            ExtReal::PosInf
        } else {
            assert!(v.is_finite(), "ExtReal does not represent -inf");
            ExtReal::Finite(v)
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    /// The finite payload, or `None` for `+∞`.
    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            ExtReal::PosInf => None,
        }
    }

    /// Collapses to `f64`, with `+∞` becoming IEEE infinity.
    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::Finite(v) => v,
            ExtReal::PosInf => f64::INFINITY,
        }
    }

    pub fn max(self, other: ExtReal) -> ExtReal {
        match (self, other) {
            (ExtReal::PosInf, _) | (_, ExtReal::PosInf) => ExtReal::PosInf,
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a.max(b)),
        }
    }

    pub fn min(self, other: ExtReal) -> ExtReal {
        match (self, other) {
            (ExtReal::PosInf, b) => b,
            (a, ExtReal::PosInf) => a,
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a.min(b)),
        }
    }

    /// `self ≥ other − tol`, the one-sided comparison used by the condition
    /// checkers. `tol` only pads finite-vs-finite comparisons; any comparison
    /// involving `+∞` is exact.
    pub fn ge_within(self, other: ExtReal, tol: f64) -> bool {
        match (self, other) {
            (ExtReal::PosInf, _) => true,
            (ExtReal::Finite(_), ExtReal::PosInf) => false,
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a >= b - tol,
        }
    }

    /// `|self − other| ≤ tol` with exact treatment of `+∞ = +∞`.
    pub fn approx_eq(self, other: ExtReal, tol: f64) -> bool {
        match (self, other) {
            (ExtReal::PosInf, ExtReal::PosInf) => true,
            (ExtReal::Finite(a), ExtReal::Finite(b)) => (a - b).abs() <= tol,
            _ => false,
        }
    }
}

impl Add for ExtReal {
    type Output = ExtReal;

    fn add(self, rhs: ExtReal) -> ExtReal {
        match (self, rhs) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a + b),
            _ => ExtReal::PosInf,
        }
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &ExtReal) -> Option<Ordering> {
        match (self, other) {
            (ExtReal::PosInf, ExtReal::PosInf) => Some(Ordering::Equal),
            (ExtReal::PosInf, ExtReal::Finite(_)) => Some(Ordering::Greater),
            (ExtReal::Finite(_), ExtReal::PosInf) => Some(Ordering::Less),
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a.partial_cmp(b),
        }
    }
}

impl From<f64> for ExtReal {
    fn from(v: f64) -> Self {
        ExtReal::from_f64(v)
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(v) => write!(f, "{v}"),
            ExtReal::PosInf => write!(f, "inf"),
        }
    }
}

// JSON has no infinity literal; finite values serialize as numbers and +∞ as
// the string "inf".
impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(v) => serializer.serialize_f64(*v),
            ExtReal::PosInf => serializer.serialize_str("inf"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_is_total() {
        let a = ExtReal::Finite(2.0);
        let inf = ExtReal::PosInf;
        assert_eq!(a + inf, ExtReal::PosInf);
        assert_eq!(inf + inf, ExtReal::PosInf);
        assert_eq!(a + a, ExtReal::Finite(4.0));
        assert_eq!(inf.max(a), ExtReal::PosInf);
        assert_eq!(inf.min(a), a);
    }

    #[test]
    fn ordering_against_infinity_is_exact() {
        assert!(ExtReal::PosInf > ExtReal::Finite(1e300));
        assert!(ExtReal::PosInf.ge_within(ExtReal::PosInf, 0.0));
        assert!(!ExtReal::Finite(1e300).ge_within(ExtReal::PosInf, 1e301));
        assert!(ExtReal::Finite(1.0).ge_within(ExtReal::Finite(1.0 + 1e-10), 1e-9));
    }

    #[test]
    fn from_f64_maps_ieee_infinity() {
        assert_eq!(ExtReal::from_f64(f64::INFINITY), ExtReal::PosInf);
        assert_eq!(ExtReal::from_f64(0.5), ExtReal::Finite(0.5));
    }

    #[test]
    fn json_form() {
        assert_eq!(serde_json::to_string(&ExtReal::Finite(1.5)).unwrap(), "1.5");
        assert_eq!(serde_json::to_string(&ExtReal::PosInf).unwrap(), "\"inf\"");
    }
}
