//! Dual numbers `a + bε` with `ε² = 0`.
//!
//! The value part carries a real quantity and the `ε` part its first-order
//! variation, so arithmetic on dual scalars is forward-mode differentiation.

use core::ops::{Add, AddAssign, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Default threshold below which a value part counts as zero when inverting.
pub const ZERO_DIVISOR_TOLERANCE: f64 = 1e-300;

/// An element `re + inf·ε` of `R[ε]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DualScalar {
    pub re: f64,
    pub inf: f64,
}

impl DualScalar {
    pub const ZERO: DualScalar = DualScalar { re: 0.0, inf: 0.0 };
    pub const ONE: DualScalar = DualScalar { re: 1.0, inf: 0.0 };
    pub const EPSILON: DualScalar = DualScalar { re: 0.0, inf: 1.0 };

    pub const fn new(re: f64, inf: f64) -> Self {
        DualScalar { re, inf }
    }

    /// A real number with no infinitesimal part.
    pub const fn real(re: f64) -> Self {
        DualScalar { re, inf: 0.0 }
    }

    pub fn scale(self, k: f64) -> Self {
        DualScalar::new(self.re * k, self.inf * k)
    }

    /// Inverse with the default zero-divisor threshold.
    pub fn inv(self) -> Result<Self> {
        self.inv_with_tolerance(ZERO_DIVISOR_TOLERANCE)
    }

    /// `(a + bε)⁻¹ = a⁻¹ − b a⁻² ε`; fails when `|a| < tol`.
    pub fn inv_with_tolerance(self, tol: f64) -> Result<Self> {
        if !(self.re.abs() >= tol) {
            return Err(Error::ZeroDivisor { re: self.re });
        }
        let r = 1.0 / self.re;
        Ok(DualScalar::new(r, -self.inf * r * r))
    }

    /// Square root of a dual number with positive value part.
    pub fn sqrt(self) -> Self {
        let s = crate::math::sqrt(self.re);
        DualScalar::new(s, self.inf / (2.0 * s))
    }
}

/// The ring product; the `ε²` term is dropped.
pub fn dual_mul(x: DualScalar, y: DualScalar) -> DualScalar {
    DualScalar::new(x.re * y.re, x.re * y.inf + x.inf * y.re)
}

/// Inverse with the default threshold.
pub fn dual_inv(x: DualScalar) -> Result<DualScalar> {
    x.inv()
}

impl Add for DualScalar {
    type Output = DualScalar;
    fn add(self, rhs: DualScalar) -> DualScalar {
        DualScalar::new(self.re + rhs.re, self.inf + rhs.inf)
    }
}

impl AddAssign for DualScalar {
    fn add_assign(&mut self, rhs: DualScalar) {
        *self = *self + rhs;
    }
}

impl Sub for DualScalar {
    type Output = DualScalar;
    fn sub(self, rhs: DualScalar) -> DualScalar {
        DualScalar::new(self.re - rhs.re, self.inf - rhs.inf)
    }
}

impl Neg for DualScalar {
    type Output = DualScalar;
    fn neg(self) -> DualScalar {
        DualScalar::new(-self.re, -self.inf)
    }
}

impl Mul for DualScalar {
    type Output = DualScalar;
    fn mul(self, rhs: DualScalar) -> DualScalar {
        dual_mul(self, rhs)
    }
}

impl Mul<f64> for DualScalar {
    type Output = DualScalar;
    fn mul(self, rhs: f64) -> DualScalar {
        self.scale(rhs)
    }
}

impl From<f64> for DualScalar {
    fn from(re: f64) -> Self {
        DualScalar::real(re)
    }
}
