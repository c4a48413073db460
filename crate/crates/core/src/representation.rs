//! Marked one-holed torus representations from trace coordinates, and their
//! affine deformations.

use alloc::string::String;
use alloc::vec::Vec;

use crate::curves::{farey_enumerate, Slope, TraceTable};
use crate::dualnum::DualScalar;
use crate::error::{Error, Result};
use crate::lorentz::{sl2_matrix, Vec3};
use crate::math;
use crate::sl2::{real, DualMatrix2, Mat2};

/// Tolerance on `tr(M₀⁻¹M₁)` for a tangent deformation.
pub const TANGENT_TOLERANCE: f64 = 1e-10;

/// Relative slack on the boundary trace when deciding it is a cusp.
pub const CUSP_TOLERANCE: f64 = 1e-9;

/// Default central-difference step for path deformations.
pub const DEFAULT_PATH_STEP: f64 = 1e-4;

/// Traces `(x, y, z)` of `A`, `B` and `AB`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceCoords {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl TraceCoords {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        TraceCoords { x, y, z }
    }

    /// Trace of the commutator, `x² + y² + z² − xyz − 2`.
    pub fn boundary_trace(&self) -> f64 {
        let TraceCoords { x, y, z } = *self;
        x * x + y * y + z * z - x * y * z - 2.0
    }

    pub fn all_above_two(&self) -> bool {
        self.x > 2.0 && self.y > 2.0 && self.z > 2.0
    }

    pub fn is_cusp(&self) -> bool {
        is_cusp_trace(self.boundary_trace())
    }
}

pub(crate) fn is_cusp_trace(t: f64) -> bool {
    (t + 2.0).abs() <= CUSP_TOLERANCE * t.abs().max(1.0)
}

/// `c(t) = base + Σ_k coeffs[k−1] t^k`, a polynomial path through the base point.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PolynomialPath {
    pub coeffs: Vec<[f64; 3]>,
}

impl PolynomialPath {
    pub fn linear(direction: [f64; 3]) -> Self {
        PolynomialPath {
            coeffs: alloc::vec![direction],
        }
    }

    pub fn eval(&self, base: &TraceCoords, t: f64) -> TraceCoords {
        let mut c = [base.x, base.y, base.z];
        let mut tk = 1.0;
        for k in &self.coeffs {
            tk *= t;
            for i in 0..3 {
                c[i] += k[i] * tk;
            }
        }
        TraceCoords::new(c[0], c[1], c[2])
    }
}

/// How the `ε` parts of the generators are produced.
#[derive(Debug, Clone, PartialEq)]
pub enum DeformationSpec {
    Zero,
    /// Central differences of [`build_rep`] along a path of trace coordinates.
    Path {
        path: PolynomialPath,
        h: f64,
    },
    /// Explicit `ε` matrices `A₁`, `B₁`.
    Tangent {
        a_eps: Mat2,
        b_eps: Mat2,
    },
}

impl DeformationSpec {
    /// Tangent deformation `A₁ = X_A A₀`, `B₁ = X_B B₀` from `sl(2)` coordinates.
    pub fn from_algebra(rep: &HoledTorusRep, xa: &Vec3, xb: &Vec3) -> Self {
        DeformationSpec::Tangent {
            a_eps: real::mul(&sl2_matrix(xa), &rep.a.value()),
            b_eps: real::mul(&sl2_matrix(xb), &rep.b.value()),
        }
    }

    fn label(&self) -> String {
        match self {
            DeformationSpec::Zero => String::from("zero"),
            DeformationSpec::Path { .. } => String::from("path"),
            DeformationSpec::Tangent { .. } => String::from("tangent"),
        }
    }
}

/// Generators `A`, `B` of a marked one-holed torus group over `R[ε]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HoledTorusRep {
    pub a: DualMatrix2,
    pub b: DualMatrix2,
    /// `[A, B]`.
    pub boundary: DualMatrix2,
    pub coords: TraceCoords,
    pub deformation_label: String,
}

impl HoledTorusRep {
    pub fn from_generators(
        a: DualMatrix2,
        b: DualMatrix2,
        coords: TraceCoords,
        label: String,
    ) -> Self {
        HoledTorusRep {
            boundary: a.commutator(&b),
            a,
            b,
            coords,
            deformation_label: label,
        }
    }

    pub fn boundary_trace(&self) -> DualScalar {
        self.boundary.dual_trace()
    }

    pub fn is_cusp(&self) -> bool {
        is_cusp_trace(self.boundary_trace().re)
    }

    /// Boundary length and Margulis invariant `(ℓ∂, α∂)`.
    pub fn boundary_length(&self) -> Result<DualScalar> {
        let t = self.boundary_trace();
        if is_cusp_trace(t.re) {
            return Err(Error::BoundaryParabolic {
                boundary_trace: t.re,
            });
        }
        crate::sl2::dual_length(t)
    }

    pub fn is_deformed(&self) -> bool {
        self.a.eps() != [[0.0; 2]; 2] || self.b.eps() != [[0.0; 2]; 2]
    }

    /// Conjugates both generators by `p`.
    pub fn conjugated(&self, p: &DualMatrix2) -> Self {
        HoledTorusRep::from_generators(
            self.a.conjugate_by(p),
            self.b.conjugate_by(p),
            self.coords,
            self.deformation_label.clone(),
        )
    }
}

/// Real generators with `A = diag(λ, λ⁻¹)` and `B = [[p, 1], [pd − 1, d]]`
/// where `p + d = y` and `λp + λ⁻¹d = z`.
fn real_generators(c: &TraceCoords) -> Result<(Mat2, Mat2)> {
    if !(c.x.is_finite() && c.y.is_finite() && c.z.is_finite()) {
        return Err(Error::InvalidCoords("non-finite trace"));
    }
    if !(c.x > 2.0) {
        return Err(Error::InvalidCoords("trace of A must exceed 2"));
    }
    let lam = (c.x + math::sqrt(c.x * c.x - 4.0)) / 2.0;
    let gap = lam - 1.0 / lam;
    if !(gap > 0.0) {
        return Err(Error::InvalidCoords("degenerate solve for B"));
    }
    let p = (c.z - c.y / lam) / gap;
    let d = c.y - p;
    let a = [[lam, 0.0], [0.0, 1.0 / lam]];
    let b = [[p, 1.0], [p * d - 1.0, d]];
    Ok((a, b))
}

/// Undeformed representation realizing the trace coordinates.
///
/// Only `x > 2` is needed by the construction; the remaining Fuchsian
/// conditions are checked by [`validate_fuchsian`].
pub fn build_rep(c: TraceCoords) -> Result<HoledTorusRep> {
    let (a, b) = real_generators(&c)?;
    Ok(HoledTorusRep::from_generators(
        DualMatrix2::from_real(a),
        DualMatrix2::from_real(b),
        c,
        String::from("zero"),
    ))
}

/// Why a representation failed validation.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    CoordsNotAboveTwo,
    /// Boundary trace `-2`: a cusp rather than a geodesic boundary.
    BoundaryParabolic {
        boundary_trace: f64,
    },
    BoundaryNotHyperbolic {
        boundary_trace: f64,
    },
    /// Commutator trace disagrees with the Fricke polynomial.
    FrickeMismatch {
        matrix: f64,
        polynomial: f64,
    },
    NonHyperbolicCurve {
        slope: Slope,
        trace: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FuchsianReport {
    pub passed: bool,
    pub violation: Option<Violation>,
    pub curves_checked: usize,
}

/// Checks the coordinate domain, a hyperbolic boundary and `|tr| > 2` for all
/// slopes with `|p| + q ≤ sample_depth`.
pub fn validate_fuchsian(rep: &HoledTorusRep, sample_depth: u32) -> FuchsianReport {
    let fail = |v: Violation, n: usize| FuchsianReport {
        passed: false,
        violation: Some(v),
        curves_checked: n,
    };
    let c = rep.coords;
    if !c.all_above_two() {
        return fail(Violation::CoordsNotAboveTwo, 0);
    }
    let poly = c.boundary_trace();
    let matrix = rep.boundary_trace().re;
    if (poly - matrix).abs() > 1e-9 * poly.abs().max(1.0) {
        return fail(
            Violation::FrickeMismatch {
                matrix,
                polynomial: poly,
            },
            0,
        );
    }
    if is_cusp_trace(poly) {
        return fail(
            Violation::BoundaryParabolic {
                boundary_trace: poly,
            },
            0,
        );
    }
    if poly > -2.0 {
        return fail(
            Violation::BoundaryNotHyperbolic {
                boundary_trace: poly,
            },
            0,
        );
    }
    let mut table = TraceTable::new(rep);
    let slopes = farey_enumerate(sample_depth.max(1));
    for (i, s) in slopes.iter().enumerate() {
        let t = table.trace(*s).re;
        if !(t.abs() > 2.0 + crate::sl2::HYPERBOLIC_TOLERANCE) {
            return fail(
                Violation::NonHyperbolicCurve {
                    slope: *s,
                    trace: t,
                },
                i + 1,
            );
        }
    }
    FuchsianReport {
        passed: true,
        violation: None,
        curves_checked: slopes.len(),
    }
}

fn project_tangent(value: &Mat2, eps: &Mat2) -> Mat2 {
    let drift = real::trace(&real::mul(&real::adj(value), eps)) / 2.0;
    let mut out = *eps;
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] -= drift * value[i][j];
        }
    }
    out
}

fn tangent_defect(value: &Mat2, eps: &Mat2) -> f64 {
    real::trace(&real::mul(&real::adj(value), eps))
}

/// Attaches `ε` parts to the generators of `rep`, recomputing the boundary
/// over dual numbers.
pub fn attach_deformation(rep: &HoledTorusRep, d: &DeformationSpec) -> Result<HoledTorusRep> {
    let a0 = rep.a.value();
    let b0 = rep.b.value();
    let (a1, b1) = match d {
        DeformationSpec::Zero => ([[0.0; 2]; 2], [[0.0; 2]; 2]),
        DeformationSpec::Tangent { a_eps, b_eps } => {
            if tangent_defect(&a0, a_eps).abs() > TANGENT_TOLERANCE
                || tangent_defect(&b0, b_eps).abs() > TANGENT_TOLERANCE
            {
                return Err(Error::InvalidDeformation(
                    "tangent matrices violate tr(M₀⁻¹M₁) = 0",
                ));
            }
            (*a_eps, *b_eps)
        }
        DeformationSpec::Path { path, h } => {
            let base = rep.coords;
            return attach_path(rep, |t| path.eval(&base, t), *h);
        }
    };
    Ok(HoledTorusRep::from_generators(
        DualMatrix2::from_parts(a0, a1),
        DualMatrix2::from_parts(b0, b1),
        rep.coords,
        d.label(),
    ))
}

/// Deformation tangent to an arbitrary smooth path of trace coordinates with
/// `path(0)` equal to the coordinates of `rep`.
pub fn attach_path<F>(rep: &HoledTorusRep, path: F, h: f64) -> Result<HoledTorusRep>
where
    F: Fn(f64) -> TraceCoords,
{
    if !(h > 0.0) {
        return Err(Error::InvalidDeformation("path step must be positive"));
    }
    let (a0, b0) = real_generators(&rep.coords)?;
    let (ap, bp) = real_generators(&path(h))?;
    let (am, bm) = real_generators(&path(-h))?;
    let diff = |p: &Mat2, m: &Mat2| {
        let mut out = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = (p[i][j] - m[i][j]) / (2.0 * h);
            }
        }
        out
    };
    let a1 = project_tangent(&a0, &diff(&ap, &am));
    let b1 = project_tangent(&b0, &diff(&bp, &bm));
    Ok(HoledTorusRep::from_generators(
        DualMatrix2::from_parts(a0, a1),
        DualMatrix2::from_parts(b0, b1),
        rep.coords,
        String::from("path"),
    ))
}
