//! The tangent group `SL(2, R[ε])`.
//!
//! A matrix `M = M₀ + εM₁` over dual numbers with `det M = 1 + 0ε` is a point
//! `M₀ ∈ SL(2, R)` together with a tangent vector `M₁` at that point, i.e. the
//! condition `tr(M₀⁻¹M₁) = 0`. Products follow the semidirect rule
//! `(M₀ + εM₁)(N₀ + εN₁) = M₀N₀ + ε(M₀N₁ + M₁N₀)`.

use core::ops::Mul;

use crate::dualnum::DualScalar;
use crate::error::{Error, Result};
use crate::math;

/// Tolerance on each part of `det − 1` for group membership.
pub const GROUP_TOLERANCE: f64 = 1e-10;

/// Trace slack used to reject elliptic and parabolic elements.
pub const HYPERBOLIC_TOLERANCE: f64 = 1e-12;

/// A real 2×2 matrix, row major.
pub type Mat2 = [[f64; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualMatrix2 {
    pub entries: [[DualScalar; 2]; 2],
}

impl DualMatrix2 {
    pub const IDENTITY: DualMatrix2 = DualMatrix2 {
        entries: [
            [DualScalar::ONE, DualScalar::ZERO],
            [DualScalar::ZERO, DualScalar::ONE],
        ],
    };

    /// Builds a matrix and checks `det = 1 + 0ε` to [`GROUP_TOLERANCE`].
    pub fn new(entries: [[DualScalar; 2]; 2]) -> Result<Self> {
        let m = DualMatrix2 { entries };
        m.check_group(GROUP_TOLERANCE)?;
        Ok(m)
    }

    pub const fn new_unchecked(entries: [[DualScalar; 2]; 2]) -> Self {
        DualMatrix2 { entries }
    }

    /// `M₀ + εM₁` from its value and `ε` matrices, unchecked.
    pub fn from_parts(value: Mat2, eps: Mat2) -> Self {
        let e = |i: usize, j: usize| DualScalar::new(value[i][j], eps[i][j]);
        DualMatrix2::new_unchecked([[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]])
    }

    /// An undeformed element of `SL(2, R)`.
    pub fn from_real(value: Mat2) -> Self {
        DualMatrix2::from_parts(value, [[0.0; 2]; 2])
    }

    pub fn value(&self) -> Mat2 {
        let e = &self.entries;
        [[e[0][0].re, e[0][1].re], [e[1][0].re, e[1][1].re]]
    }

    pub fn eps(&self) -> Mat2 {
        let e = &self.entries;
        [[e[0][0].inf, e[0][1].inf], [e[1][0].inf, e[1][1].inf]]
    }

    pub fn det(&self) -> DualScalar {
        let e = &self.entries;
        e[0][0] * e[1][1] - e[0][1] * e[1][0]
    }

    pub fn check_group(&self, tol: f64) -> Result<()> {
        let d = self.det();
        if (d.re - 1.0).abs() > tol || d.inf.abs() > tol || !d.re.is_finite() {
            return Err(Error::NotInGroup {
                det_re: d.re,
                det_inf: d.inf,
            });
        }
        Ok(())
    }

    /// Divides by the dual square root of the determinant, restoring
    /// `det = 1 + 0ε` after rounding drift. The value part is rescaled and the
    /// `ε` part projected back onto `tr(M₀⁻¹M₁) = 0`.
    pub fn normalized(&self) -> Result<Self> {
        let d = self.det();
        if !(d.re > 0.0) {
            return Err(Error::NotInGroup {
                det_re: d.re,
                det_inf: d.inf,
            });
        }
        let s = d.sqrt().inv()?;
        Ok(self.scale(s))
    }

    pub fn scale(&self, s: DualScalar) -> Self {
        let e = &self.entries;
        DualMatrix2::new_unchecked([[e[0][0] * s, e[0][1] * s], [e[1][0] * s, e[1][1] * s]])
    }

    pub fn compose(&self, rhs: &DualMatrix2) -> DualMatrix2 {
        let a = &self.entries;
        let b = &rhs.entries;
        let mut out = [[DualScalar::ZERO; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        DualMatrix2::new_unchecked(out)
    }

    /// Adjugate, which is the inverse on the group.
    pub fn inverse(&self) -> DualMatrix2 {
        let e = &self.entries;
        DualMatrix2::new_unchecked([[e[1][1], -e[0][1]], [-e[1][0], e[0][0]]])
    }

    pub fn dual_trace(&self) -> DualScalar {
        self.entries[0][0] + self.entries[1][1]
    }

    /// `A B A⁻¹ B⁻¹`.
    pub fn commutator(&self, b: &DualMatrix2) -> DualMatrix2 {
        self.compose(b)
            .compose(&self.inverse())
            .compose(&b.inverse())
    }

    /// `P M P⁻¹`.
    pub fn conjugate_by(&self, p: &DualMatrix2) -> DualMatrix2 {
        p.compose(self).compose(&p.inverse())
    }

    pub fn pow(&self, n: u32) -> DualMatrix2 {
        let mut acc = DualMatrix2::IDENTITY;
        let mut base = *self;
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.compose(&base);
            }
            base = base.compose(&base);
            k >>= 1;
        }
        acc
    }

    /// Length of the closed geodesic of the value part.
    pub fn length(&self) -> Result<f64> {
        translation_length(self.dual_trace().re)
    }

    /// Margulis invariant of the affine deformation this element encodes.
    pub fn margulis_invariant(&self) -> Result<f64> {
        margulis_invariant_dual(self)
    }
}

impl Mul for DualMatrix2 {
    type Output = DualMatrix2;
    fn mul(self, rhs: DualMatrix2) -> DualMatrix2 {
        self.compose(&rhs)
    }
}

pub fn compose(m: &DualMatrix2, n: &DualMatrix2) -> DualMatrix2 {
    m.compose(n)
}

pub fn inverse(m: &DualMatrix2) -> DualMatrix2 {
    m.inverse()
}

pub fn dual_trace(m: &DualMatrix2) -> DualScalar {
    m.dual_trace()
}

pub fn commutator(a: &DualMatrix2, b: &DualMatrix2) -> DualMatrix2 {
    a.commutator(b)
}

/// Hyperbolic translation length `2 arccosh(|t|/2)` of an element with trace `t`.
pub fn translation_length(t: f64) -> Result<f64> {
    if !(t.abs() > 2.0 + HYPERBOLIC_TOLERANCE) {
        return Err(Error::NotHyperbolic { trace: t });
    }
    Ok(2.0 * math::acosh(t.abs() / 2.0))
}

/// Length of a dual trace, with its `ε` derivative.
///
/// For `t + εt'` this is `ℓ + εα` where `ℓ = 2 arccosh(|t|/2)` and
/// `α = 2 t' sign(t) / √(t² − 4)`.
pub fn dual_length(t: DualScalar) -> Result<DualScalar> {
    let len = translation_length(t.re)?;
    let sign = if t.re < 0.0 { -1.0 } else { 1.0 };
    let alpha = 2.0 * t.inf * sign / math::sqrt(t.re * t.re - 4.0);
    Ok(DualScalar::new(len, alpha))
}

/// The Margulis invariant as the `ε` derivative of the geodesic length.
pub fn margulis_invariant_dual(m: &DualMatrix2) -> Result<f64> {
    Ok(dual_length(m.dual_trace())?.inf)
}

/// Real 2×2 helpers shared with the Lorentzian model.
pub mod real {
    use super::Mat2;

    pub fn mul(a: &Mat2, b: &Mat2) -> Mat2 {
        let mut out = [[0.0; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        out
    }

    /// Adjugate; the inverse when `det = 1`.
    pub fn adj(a: &Mat2) -> Mat2 {
        [[a[1][1], -a[0][1]], [-a[1][0], a[0][0]]]
    }

    pub fn trace(a: &Mat2) -> f64 {
        a[0][0] + a[1][1]
    }
}
