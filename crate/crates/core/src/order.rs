//! Fractional-order bookkeeping: the parameter triple `(s, a, alpha)` and the
//! change of variables between the `y` (divergence form) and `z`
//! (nondivergence form) vertical coordinates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;

/// The parameter triple of a fractional power of the Laplacian.
///
/// `s` is the exponent of the operator, `a = 1 - 2s` the weight exponent of
/// the degenerate extension equation, and `alpha = -2a / (1 - a)` the
/// exponent of the nondivergence form. All three are stored so that
/// conversions never accumulate rounding.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FracOrder<T> {
    s: T,
    a: T,
    alpha: T,
}

impl<T: Real> FracOrder<T> {
    /// Build from the operator exponent `s ∈ (0, 1)`.
    pub fn from_s(s: T) -> Result<Self> {
        if !(s > T::zero() && s < T::one()) || !s.is_finite() {
            return Err(Error::Domain(format!("s must lie in (0, 1), got {s}")));
        }
        let a = T::one() - T::of(2.0) * s;
        Ok(Self::assemble(s, a))
    }

    /// Build from the weight exponent `a ∈ (-1, 1)`.
    pub fn from_a(a: T) -> Result<Self> {
        if !(a > -T::one() && a < T::one()) || !a.is_finite() {
            return Err(Error::Domain(format!("a must lie in (-1, 1), got {a}")));
        }
        let s = (T::one() - a) / T::of(2.0);
        Ok(Self::assemble(s, a))
    }

    fn assemble(s: T, a: T) -> Self {
        let alpha = if a == T::zero() {
            T::zero()
        } else {
            -T::of(2.0) * a / (T::one() - a)
        };
        Self { s, a, alpha }
    }

    pub fn s(&self) -> T {
        self.s
    }

    pub fn a(&self) -> T {
        self.a
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    /// `z = (y / (1 - a))^{1 - a}`, mapping the divergence-form vertical
    /// coordinate to the nondivergence one.
    pub fn y_to_z(&self, y: T) -> Result<T> {
        if y < T::zero() {
            return Err(Error::Domain(format!("y must be nonnegative, got {y}")));
        }
        if self.a == T::zero() {
            return Ok(y); // exponent 1, divisor 1
        }
        let c = T::one() - self.a;
        Ok((y / c).powf(c))
    }

    /// Inverse of [`FracOrder::y_to_z`]: `y = (1 - a) z^{1/(1 - a)}`.
    pub fn z_to_y(&self, z: T) -> Result<T> {
        if z < T::zero() {
            return Err(Error::Domain(format!("z must be nonnegative, got {z}")));
        }
        if self.a == T::zero() {
            return Ok(z);
        }
        let c = T::one() - self.a;
        Ok(c * z.powf(c.recip()))
    }
}
