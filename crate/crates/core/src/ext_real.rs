//! Extended reals `(-inf, +inf]`.
//!
//! Every convex function in this crate is proper, so `-inf` never occurs and
//! only `+inf` needs a representation. It is a dedicated variant rather than
//! `f64::INFINITY` so that absorption (`a + inf = inf`) is exact and a finite
//! overflow can never be mistaken for it.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    Infinity,
}

pub use ExtReal::Infinity as INF;

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal::Finite(0.0);

    /// Builds from an `f64`, mapping `+inf` to [`ExtReal::Infinity`].
    ///
    /// Panics on NaN or `-inf`: neither belongs to the codomain of a proper
    /// convex function and both indicate a bug upstream.
    pub fn from_f64(v: f64) -> Self {
        assert!(!v.is_nan(), "NaN is not an extended real");
        assert!(v != f64::NEG_INFINITY, "-inf is not representable");
        if v == f64::INFINITY {
            ExtReal::Infinity
        } else {
            ExtReal::Finite(v)
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, ExtReal::Infinity)
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            ExtReal::Infinity => None,
        }
    }

    /// Lossy view as `f64` (`Infinity` becomes `f64::INFINITY`).
    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::Finite(v) => v,
            ExtReal::Infinity => f64::INFINITY,
        }
    }

    pub fn max(self, other: ExtReal) -> ExtReal {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn min(self, other: ExtReal) -> ExtReal {
        if self <= other {
            self
        } else {
            other
        }
    }

    /// Scales by a nonnegative real; `0 * inf = 0` follows the convex-analysis convention
    /// used when a weight of an averaged point vanishes.
    pub fn scale(self, w: f64) -> ExtReal {
        debug_assert!(w >= 0.0);
        match self {
            ExtReal::Finite(v) => ExtReal::Finite(w * v),
            ExtReal::Infinity if w == 0.0 => ExtReal::ZERO,
            ExtReal::Infinity => ExtReal::Infinity,
        }
    }
}

impl From<f64> for ExtReal {
    fn from(v: f64) -> Self {
        ExtReal::from_f64(v)
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a.partial_cmp(b),
            (ExtReal::Finite(_), ExtReal::Infinity) => Some(Ordering::Less),
            (ExtReal::Infinity, ExtReal::Finite(_)) => Some(Ordering::Greater),
            (ExtReal::Infinity, ExtReal::Infinity) => Some(Ordering::Equal),
        }
    }
}

impl Add for ExtReal {
    type Output = ExtReal;
    fn add(self, rhs: ExtReal) -> ExtReal {
        match (self, rhs) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a + b),
            _ => ExtReal::Infinity,
        }
    }
}

impl Add<f64> for ExtReal {
    type Output = ExtReal;
    fn add(self, rhs: f64) -> ExtReal {
        debug_assert!(rhs.is_finite());
        match self {
            ExtReal::Finite(a) => ExtReal::Finite(a + rhs),
            ExtReal::Infinity => ExtReal::Infinity,
        }
    }
}

impl Mul<f64> for ExtReal {
    type Output = ExtReal;
    fn mul(self, rhs: f64) -> ExtReal {
        self.scale(rhs)
    }
}

impl fmt::Display for ExtReal {
    /// `inf` for infinity, otherwise 17 significant digits.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(v) => write!(f, "{:.16e}", v),
            ExtReal::Infinity => f.write_str("inf"),
        }
    }
}
