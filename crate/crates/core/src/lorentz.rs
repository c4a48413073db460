//! The Lorentzian model of the tangent group.
//!
//! `sl(2, R)` with the form `⟨X, Y⟩ = ½ tr(XY)` is Minkowski space `R^{2,1}`.
//! We fix the orthonormal basis
//!
//! ```text
//! e₁ = [[1, 0], [0, -1]]   e₂ = [[0, 1], [1, 0]]   e₃ = [[0, 1], [-1, 0]]
//! ```
//!
//! with `e₃` timelike, so the form is `diag(1, 1, -1)` in coordinates. A dual
//! matrix `M₀ + εM₁` acts on `R^{2,1}` as the affine isometry with linear part
//! `Ad(M₀)` and translation `M₁M₀⁻¹`.
//!
//! The Margulis invariant computed here (neutral vector paired with the
//! translation) is independent of the dual-trace formula in [`crate::sl2`] and
//! serves as its oracle. With the `½ tr` normalization the pairing is half the
//! length derivative, so [`margulis_invariant_lorentz`] doubles it.

use crate::error::{Error, Result};
use crate::math;
use crate::sl2::{real, DualMatrix2, Mat2};

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];

/// Slack on `tr A − 3` below which a linear part is not hyperbolic.
pub const HYPERBOLIC_TOLERANCE: f64 = 1e-10;

/// The Lorentzian form `x₁y₁ + x₂y₂ − x₃y₃`.
pub fn lorentz_dot(x: &Vec3, y: &Vec3) -> f64 {
    x[0] * y[0] + x[1] * y[1] - x[2] * y[2]
}

/// Coordinates of the traceless part of `x` in the basis `e₁, e₂, e₃`.
pub fn sl2_coords(x: &Mat2) -> Vec3 {
    [
        (x[0][0] - x[1][1]) / 2.0,
        (x[0][1] + x[1][0]) / 2.0,
        (x[0][1] - x[1][0]) / 2.0,
    ]
}

/// The traceless matrix with coordinates `w`.
pub fn sl2_matrix(w: &Vec3) -> Mat2 {
    [[w[0], w[1] + w[2]], [w[1] - w[2], -w[0]]]
}

/// Affine isometry of `E^{2,1}`: `x ↦ linear·x + translation`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzIsometry {
    pub linear: Mat3,
    pub translation: Vec3,
}

impl LorentzIsometry {
    /// Checks `Aᵀ J A = J` and `det A = 1` entrywise to `tol`.
    pub fn is_orientation_preserving_isometry(&self, tol: f64) -> bool {
        let a = &self.linear;
        let j = [1.0, 1.0, -1.0];
        for r in 0..3 {
            for c in 0..3 {
                let g: f64 = (0..3).map(|k| a[k][r] * j[k] * a[k][c]).sum();
                let expect = if r == c { j[r] } else { 0.0 };
                if (g - expect).abs() > tol {
                    return false;
                }
            }
        }
        (det3(a) - 1.0).abs() <= tol
    }

    /// `self ∘ rhs`.
    pub fn compose(&self, rhs: &LorentzIsometry) -> LorentzIsometry {
        let linear = mat3_mul(&self.linear, &rhs.linear);
        let moved = mat3_apply(&self.linear, &rhs.translation);
        LorentzIsometry {
            linear,
            translation: [
                moved[0] + self.translation[0],
                moved[1] + self.translation[1],
                moved[2] + self.translation[2],
            ],
        }
    }
}

pub fn mat3_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub fn mat3_apply(a: &Mat3, v: &Vec3) -> Vec3 {
    [
        a[0][0] * v[0] + a[0][1] * v[1] + a[0][2] * v[2],
        a[1][0] * v[0] + a[1][1] * v[1] + a[1][2] * v[2],
        a[2][0] * v[0] + a[2][1] * v[1] + a[2][2] * v[2],
    ]
}

fn det3(a: &Mat3) -> f64 {
    a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
        - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
}

fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm2(v: &Vec3) -> f64 {
    v[0] * v[0] + v[1] * v[1] + v[2] * v[2]
}

/// `Ad(M₀)` in the fixed basis, with translation `M₁M₀⁻¹`.
pub fn adjoint_of(m: &DualMatrix2) -> LorentzIsometry {
    let m0 = m.value();
    let m0_inv = real::adj(&m0);
    let basis: [Vec3; 3] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let mut linear = [[0.0; 3]; 3];
    for (col, e) in basis.iter().enumerate() {
        let image = real::mul(&real::mul(&m0, &sl2_matrix(e)), &m0_inv);
        let w = sl2_coords(&image);
        for row in 0..3 {
            linear[row][col] = w[row];
        }
    }
    let translation = sl2_coords(&real::mul(&m.eps(), &m0_inv));
    LorentzIsometry {
        linear,
        translation,
    }
}

/// The vector `w` whose adjoint action `[w, ·]` equals `S = A − A⁻¹`.
///
/// For hyperbolic `A` this is a positive multiple of the neutral vector,
/// pointing so that `A` is `exp` of a positive multiple of `ad w`.
fn axis_from_skew_part(a: &Mat3) -> Vec3 {
    // A⁻¹ = J Aᵀ J for A ∈ SO(2,1).
    let j = [1.0, 1.0, -1.0];
    let s = |r: usize, c: usize| a[r][c] - j[r] * a[c][r] * j[c];
    // In the fixed basis ad_w has entries (2,1) = 2w₁, (2,0) = −2w₂, (0,1) = 2w₃.
    [
        (s(2, 1) + s(1, 2)) / 4.0,
        -(s(2, 0) + s(0, 2)) / 4.0,
        (s(0, 1) - s(1, 0)) / 4.0,
    ]
}

/// Unit spacelike fixed vector `x⁰` of a hyperbolic linear part.
///
/// The kernel of `A − I` comes from the best-conditioned cross product of its
/// rows; when all rows are nearly parallel the skew-part axis is used instead.
/// The sign is chosen so that `x⁰` points along the skew-part axis, which makes
/// the pairing in [`margulis_invariant_lorentz`] agree with the length
/// derivative.
pub fn neutral_vector(a: &Mat3) -> Result<Vec3> {
    let tr = a[0][0] + a[1][1] + a[2][2];
    if !(tr > 3.0 + HYPERBOLIC_TOLERANCE) {
        return Err(Error::NotHyperbolic { trace: tr });
    }
    let rows: [Vec3; 3] = [
        [a[0][0] - 1.0, a[0][1], a[0][2]],
        [a[1][0], a[1][1] - 1.0, a[1][2]],
        [a[2][0], a[2][1], a[2][2] - 1.0],
    ];
    let scale: f64 = rows.iter().map(norm2).sum();
    let candidates = [
        cross(&rows[0], &rows[1]),
        cross(&rows[0], &rows[2]),
        cross(&rows[1], &rows[2]),
    ];
    let best = candidates
        .iter()
        .copied()
        .max_by(|x, y| norm2(x).total_cmp(&norm2(y)))
        .unwrap_or([0.0; 3]);
    let axis = axis_from_skew_part(a);
    let mut x = if norm2(&best) > 1e-12 * scale * scale {
        best
    } else {
        axis
    };
    let q = lorentz_dot(&x, &x);
    if !(q > 0.0) {
        return Err(Error::NotHyperbolic { trace: tr });
    }
    let k = 1.0 / math::sqrt(q);
    if lorentz_dot(&x, &axis) < 0.0 {
        x = [-x[0], -x[1], -x[2]];
    }
    Ok([x[0] * k, x[1] * k, x[2] * k])
}

/// Margulis invariant `2⟨translation, x⁰⟩` of an affine isometry.
pub fn margulis_invariant_lorentz(g: &LorentzIsometry) -> Result<f64> {
    let x0 = neutral_vector(&g.linear)?;
    Ok(2.0 * lorentz_dot(&g.translation, &x0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::exp;
    use proptest::prelude::*;

    fn near(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn diag_deformed(len: f64, rate: f64) -> DualMatrix2 {
        let l = exp(len / 2.0);
        DualMatrix2::from_parts(
            [[l, 0.0], [0.0, 1.0 / l]],
            [[rate * l / 2.0, 0.0], [0.0, -rate / (2.0 * l)]],
        )
    }

    fn element(th: f64, lam: f64, ph: f64, x: Vec3, flip: bool) -> DualMatrix2 {
        let r = |t: f64| [[libm::cos(t), -libm::sin(t)], [libm::sin(t), libm::cos(t)]];
        let sgn = if flip { -1.0 } else { 1.0 };
        let m0 = real::mul(
            &real::mul(&r(th), &[[sgn * lam, 0.0], [0.0, sgn / lam]]),
            &r(ph),
        );
        DualMatrix2::from_parts(m0, real::mul(&sl2_matrix(&x), &m0))
    }

    #[test]
    fn identity_maps_to_identity() {
        let g = adjoint_of(&DualMatrix2::IDENTITY);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(g.linear[i][j], if i == j { 1.0 } else { 0.0 });
            }
        }
        assert_eq!(g.translation, [0.0; 3]);
    }

    #[test]
    fn rotation_is_an_isometry() {
        for &th in &[0.1, 0.7, 2.0, 3.0] {
            let (s, c) = (libm::sin(th), libm::cos(th));
            let g = adjoint_of(&DualMatrix2::from_real([[c, -s], [s, c]]));
            assert!(g.is_orientation_preserving_isometry(1e-12));
            // rotation by θ in SL(2) rotates the spacelike plane by 2θ
            assert!(near(g.linear[0][0], libm::cos(2.0 * th), 1e-12));
            assert!(near(g.linear[2][2], 1.0, 1e-12));
        }
    }

    #[test]
    fn diagonal_element_eigenvalues() {
        let len = 1.3;
        let g = adjoint_of(&diag_deformed(len, 0.0));
        assert!(near(g.linear[0][0], 1.0, 1e-12));
        // e₂ ± e₃ are the null eigenvectors for e^{±ℓ}
        let plus = mat3_apply(&g.linear, &[0.0, 1.0, 1.0]);
        let minus = mat3_apply(&g.linear, &[0.0, 1.0, -1.0]);
        assert!(near(plus[1], exp(len), 1e-12) && near(plus[2], exp(len), 1e-12));
        assert!(near(minus[1], exp(-len), 1e-12) && near(minus[2], -exp(-len), 1e-12));
    }

    #[test]
    fn neutral_vector_examples() {
        let g = adjoint_of(&diag_deformed(2.0, 0.0));
        let x0 = neutral_vector(&g.linear).unwrap();
        assert!(near(x0[0], 1.0, 1e-12) && near(x0[1], 0.0, 1e-12) && near(x0[2], 0.0, 1e-12));
        let id = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert!(matches!(
            neutral_vector(&id),
            Err(Error::NotHyperbolic { .. })
        ));
        let g = adjoint_of(&element(0.4, 1.8, 2.2, [0.0; 3], false));
        let x0 = neutral_vector(&g.linear).unwrap();
        assert!(near(lorentz_dot(&x0, &x0), 1.0, 1e-12));
    }

    #[test]
    fn calibration_on_diagonal_rate() {
        for &(len, s) in &[(2.0, 1.0), (0.7, -2.5), (3.1, 0.3)] {
            let g = adjoint_of(&diag_deformed(len, s));
            assert!(near(margulis_invariant_lorentz(&g).unwrap(), s, 1e-12));
        }
        let mut g = adjoint_of(&diag_deformed(1.0, 0.0));
        g.translation = [0.0; 3];
        assert_eq!(margulis_invariant_lorentz(&g).unwrap(), 0.0);
    }

    #[test]
    fn skew_axis_fallback_matches_kernel() {
        let g = adjoint_of(&element(0.9, 2.5, -0.3, [0.0; 3], false));
        let x0 = neutral_vector(&g.linear).unwrap();
        let w = axis_from_skew_part(&g.linear);
        let k = 1.0 / libm::sqrt(lorentz_dot(&w, &w));
        for i in 0..3 {
            assert!(near(x0[i], w[i] * k, 1e-10));
        }
    }

    fn elements() -> impl Strategy<Value = DualMatrix2> {
        (
            0.0f64..6.3,
            1.2f64..4.0,
            0.0f64..6.3,
            prop::array::uniform3(-1.0f64..1.0),
            any::<bool>(),
        )
            .prop_map(|(a, l, b, x, f)| element(a, l, b, x, f))
            .prop_filter("hyperbolic", |m| m.dual_trace().re.abs() > 2.1)
    }

    proptest! {
        #[test]
        fn agrees_with_dual_trace(m in elements()) {
            let dual = m.margulis_invariant().unwrap();
            let lor = margulis_invariant_lorentz(&adjoint_of(&m)).unwrap();
            prop_assert!(near(dual, lor, 1e-8), "{} vs {}", dual, lor);
        }

        #[test]
        fn coboundary_invariance(m in elements(), w in prop::array::uniform3(-1.0f64..1.0), shift in prop::array::uniform3(-2.0f64..2.0)) {
            let m0 = m.value();
            let wm = sl2_matrix(&w);
            let a = real::mul(&wm, &m0);
            let b = real::mul(&m0, &wm);
            let mut eps = m.eps();
            for i in 0..2 {
                for j in 0..2 {
                    eps[i][j] += a[i][j] - b[i][j];
                }
            }
            let moved = DualMatrix2::from_parts(m0, eps);
            let before = m.margulis_invariant().unwrap();
            prop_assert!(near(moved.margulis_invariant().unwrap(), before, 1e-9));
            prop_assert!(near(margulis_invariant_lorentz(&adjoint_of(&moved)).unwrap(), before, 1e-9));

            // translation shifted by (A − I)u
            let mut g = adjoint_of(&m);
            let au = mat3_apply(&g.linear, &shift);
            for i in 0..3 {
                g.translation[i] += au[i] - shift[i];
            }
            prop_assert!(near(margulis_invariant_lorentz(&g).unwrap(), before, 1e-9));
        }

        #[test]
        fn adjoint_is_a_homomorphism(m in elements(), n in elements()) {
            let gm = adjoint_of(&m);
            let gn = adjoint_of(&n);
            let gmn = adjoint_of(&(m * n));
            prop_assert!(gm.is_orientation_preserving_isometry(1e-10));
            let composed = gm.compose(&gn);
            for i in 0..3 {
                for j in 0..3 {
                    let scale = 1.0 + gmn.linear[i][j].abs();
                    prop_assert!(near(composed.linear[i][j], gmn.linear[i][j], 1e-10 * scale));
                }
                let scale = 1.0 + gmn.translation[i].abs();
                prop_assert!(near(composed.translation[i], gmn.translation[i], 1e-10 * scale));
            }
        }
    }
}
