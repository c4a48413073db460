//! The generalized McShane sum, its derivative identity for Margulis
//! invariants, and certified truncation tails.
//!
//! For a one-holed torus each simple closed curve `γ` bounds, together with the
//! boundary `∂`, a single pair of pants whose other two cuffs are both `γ`; the
//! identity reads
//!
//! ```text
//! ℓ(∂) = Σ_γ D(ℓ(∂), ℓ(γ), ℓ(γ))
//! ```
//!
//! and differentiating along an affine deformation gives
//!
//! ```text
//! (1 − Σ H(2ℓ(γ), ℓ(∂))) α(∂) = Σ K(2ℓ(γ), ℓ(∂)) · 2α(γ).
//! ```
//!
//! Terms are grouped into bins `N ≤ 2ℓ(γ) < N + 1`. The discarded tail beyond
//! the last bin is bounded using a bin-count constant fitted from the observed
//! bins, so the certificates here are empirical, not proofs.

use alloc::vec::Vec;

use crate::curves::{enumerate_bins, CurveBin};
use crate::dualnum::DualScalar;
use crate::error::{Error, Result};
use crate::math::{self, cosh, exp, log1p, logistic_tail, sinh};
use crate::representation::HoledTorusRep;
use crate::summation::KahanSum;

/// The gap function `D(x, y, z) = 2 log((e^{x/2} + e^{(y+z)/2}) / (e^{−x/2} + e^{(y+z)/2}))`.
///
/// Evaluated as `2 log1p(u)` with `u = (X − X⁻¹)/(X⁻¹ + Y)`, rescaled by `Y⁻¹`,
/// so small gaps at large `y + z` keep full relative precision.
pub fn gap_d(x: f64, y: f64, z: f64) -> f64 {
    let hx = x / 2.0;
    let s = (y + z) / 2.0;
    if hx.abs() < 350.0 && s > -350.0 && s < 700.0 {
        let u = 2.0 * sinh(hx) * exp(-s) / (1.0 + exp(-hx - s));
        2.0 * log1p(u)
    } else {
        2.0 * (math::log_add_exp(hx, s) - math::log_add_exp(-hx, s))
    }
}

/// `H(u, v) = 1/(1 + e^{(u+v)/2}) + 1/(1 + e^{(u−v)/2})`.
pub fn coeff_h(u: f64, v: f64) -> f64 {
    logistic_tail((u + v) / 2.0) + logistic_tail((u - v) / 2.0)
}

/// `K(u, v) = −sinh(v/2) / (cosh(u/2) + cosh(v/2))`.
pub fn coeff_k(u: f64, v: f64) -> f64 {
    let m = u.abs().max(v.abs()) / 2.0;
    if m < 350.0 {
        -sinh(v / 2.0) / (cosh(u / 2.0) + cosh(v / 2.0))
    } else {
        let e = |t: f64| exp(t - m);
        let num = e(v / 2.0) - e(-v / 2.0);
        let den = e(u / 2.0) + e(-u / 2.0) + e(v / 2.0) + e(-v / 2.0);
        -num / den
    }
}

/// `K` as the difference of the two logistic terms in `H`.
pub fn coeff_k_logistic(u: f64, v: f64) -> f64 {
    logistic_tail((u + v) / 2.0) - logistic_tail((u - v) / 2.0)
}

/// `d/dt D(ℓ∂, ℓ₁, ℓ₂) = H(ℓ₁ + ℓ₂, ℓ∂) α∂ + K(ℓ₁ + ℓ₂, ℓ∂)(α₁ + α₂)`.
pub fn term_derivative(l1: f64, l2: f64, lb: f64, a1: f64, a2: f64, ab: f64) -> f64 {
    let u = l1 + l2;
    coeff_h(u, lb) * ab + coeff_k(u, lb) * (a1 + a2)
}

/// `4 sinh(x/2) e^{−(y+z)/2}`, an upper bound for `D(x, y, z)` when `x ≥ 0`.
pub fn gap_bound(x: f64, y: f64, z: f64) -> f64 {
    4.0 * sinh(x / 2.0) * exp(-(y + z) / 2.0)
}

/// `2 cosh(v/2) e^{−u/2}`, a strict bound for `|H(u, v)|` and `|K(u, v)|`.
pub fn coeff_bound(u: f64, v: f64) -> f64 {
    2.0 * cosh(v.abs() / 2.0) * exp(-u / 2.0)
}

/// Limit of `D(L, ℓ, ℓ)/L` as `L → 0`.
pub fn cusp_summand(len: f64) -> f64 {
    2.0 * logistic_tail(len)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineConfig {
    pub tail_tolerance: f64,
    /// Largest bin index the truncation may reach.
    pub n_ceiling: u32,
    /// Inflation applied to the fitted bin-count constant.
    pub m_safety: f64,
    /// Inflation applied to the estimated `|α|/ℓ` bound.
    pub kappa_safety: f64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            tail_tolerance: 1e-6,
            n_ceiling: 200,
            m_safety: 2.0,
            kappa_safety: 2.0,
        }
    }
}

impl EngineConfig {
    fn check(&self) -> Result<()> {
        if !(self.tail_tolerance > 0.0) {
            return Err(Error::InvalidCoords("tail tolerance must be positive"));
        }
        if self.n_ceiling < 1 {
            return Err(Error::InvalidCoords("bin ceiling must be at least 1"));
        }
        Ok(())
    }
}

/// One summand with everything needed for both identities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesTerm {
    pub ell1: f64,
    pub ell2: f64,
    pub ell_boundary: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha_boundary: f64,
    pub d: f64,
    pub h: f64,
    pub k: f64,
    pub derivative: f64,
}

impl SeriesTerm {
    pub fn new(
        ell1: f64,
        ell2: f64,
        ell_boundary: f64,
        alpha1: f64,
        alpha2: f64,
        alpha_boundary: f64,
    ) -> Self {
        let u = ell1 + ell2;
        let h = coeff_h(u, ell_boundary);
        let k = coeff_k(u, ell_boundary);
        SeriesTerm {
            ell1,
            ell2,
            ell_boundary,
            alpha1,
            alpha2,
            alpha_boundary,
            d: gap_d(ell_boundary, ell1, ell2),
            h,
            k,
            derivative: h * alpha_boundary + k * (alpha1 + alpha2),
        }
    }

    /// The identity summand, switching to the cusp limit `D/ℓ∂` when `ℓ∂ = 0`.
    pub fn identity_summand(&self, cusp: bool) -> f64 {
        if cusp {
            // 2/(1 + e^{(ℓ₁+ℓ₂)/2}), which for γ₁ = γ₂ = γ is 2/(1 + e^{ℓ(γ)})
            2.0 * logistic_tail((self.ell1 + self.ell2) / 2.0)
        } else {
            self.d
        }
    }

    fn from_curve(c: &crate::curves::CurveClass, boundary: DualScalar) -> Self {
        SeriesTerm::new(
            c.length,
            c.length,
            boundary.re,
            c.alpha,
            c.alpha,
            boundary.inf,
        )
    }
}

/// Per-bin totals, each accumulated serially in traversal order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinSummary {
    pub n: u32,
    pub count: usize,
    pub sum_d: f64,
    pub sum_deriv: f64,
    pub sum_h: f64,
    pub sum_k_alpha: f64,
}

/// Summarizes one bin; a pure function of its members so bins can be
/// evaluated independently and combined in index order.
pub fn summarize_bin(bin: &CurveBin, boundary: DualScalar, cusp: bool) -> BinSummary {
    let mut d = KahanSum::new();
    let mut deriv = KahanSum::new();
    let mut h = KahanSum::new();
    let mut ka = KahanSum::new();
    for c in &bin.members {
        let t = SeriesTerm::from_curve(c, boundary);
        d.add(t.identity_summand(cusp));
        deriv.add(t.derivative);
        h.add(t.h);
        ka.add(t.k * (t.alpha1 + t.alpha2));
    }
    BinSummary {
        n: bin.n,
        count: bin.members.len(),
        sum_d: d.value(),
        sum_deriv: deriv.value(),
        sum_h: h.value(),
        sum_k_alpha: ka.value(),
    }
}

/// Fitted constant `max_N |𝒞_N| / (N + 1)²` over the given bins, unscaled.
pub fn fit_bin_constant(bins: &[CurveBin]) -> f64 {
    bins.iter()
        .map(|b| {
            let n1 = b.n as f64 + 1.0;
            b.members.len() as f64 / (n1 * n1)
        })
        .fold(0.0, f64::max)
}

/// Sums `f(N)` for `N > n_max` until the terms are negligible.
fn tail_sum(n_max: u32, f: impl Fn(f64) -> f64) -> f64 {
    let mut acc = KahanSum::new();
    let mut n = n_max as f64 + 1.0;
    loop {
        let t = f(n);
        acc.add(t);
        // terms are eventually decreasing; e^{−N/2} with N ≥ 1500 underflows
        if (n > 40.0 && t <= 1e-18 * acc.value())
            || n > n_max as f64 + 1500.0
            || t == 0.0 && n > 40.0
        {
            break;
        }
        n += 1.0;
    }
    acc.value()
}

/// `Σ_{N > n_max} 4 m sinh(ℓ∂/2) (N + 1)² e^{−N/2}`; at a cusp the factor
/// `4 sinh(ℓ∂/2)` becomes the limit bound `2` for `D/ℓ∂`.
pub fn identity_tail_bound(n_max: u32, m_hat: f64, ell_boundary: f64, cusp: bool) -> f64 {
    let front = if cusp {
        2.0 * m_hat
    } else {
        4.0 * m_hat * sinh(ell_boundary / 2.0)
    };
    tail_sum(n_max, |n| front * (n + 1.0) * (n + 1.0) * exp(-n / 2.0))
}

/// `Σ_{N > n_max} 4 m cosh(ℓ∂/2) (2κ(N + 1) + |α∂|) (N + 1)² e^{−N/2}`.
pub fn derivative_tail_bound(
    n_max: u32,
    m_hat: f64,
    kappa: f64,
    ell_boundary: f64,
    alpha_boundary: f64,
) -> f64 {
    let front = 4.0 * m_hat * cosh(ell_boundary / 2.0);
    tail_sum(n_max, |n| {
        front
            * (2.0 * kappa * (n + 1.0) + alpha_boundary.abs())
            * (n + 1.0)
            * (n + 1.0)
            * exp(-n / 2.0)
    })
}

/// `max |α(γ)|/ℓ(γ)` over the enumerated curves and the boundary.
pub fn kappa_estimate(bins: &[CurveBin], boundary: Option<DualScalar>) -> f64 {
    let curves = bins
        .iter()
        .flat_map(|b| b.members.iter())
        .map(|c| c.alpha.abs() / c.length);
    let b = boundary
        .filter(|b| b.re > 0.0)
        .map(|b| b.inf.abs() / b.re)
        .unwrap_or(0.0);
    curves.fold(b, f64::max)
}

/// Bins kept by a truncation, with the constants that certify it.
#[derive(Debug, Clone, PartialEq)]
pub struct Truncation {
    pub bins: Vec<CurveBin>,
    pub n_max: u32,
    /// Inflated bin-count constant.
    pub m_hat: f64,
    /// Raw `|α|/ℓ` maximum, before inflation.
    pub kappa_hat: f64,
    pub tail_bound: f64,
}

/// Smallest `n_max ≤ n_ceiling` whose tail bound is below tolerance.
///
/// Enumerates with a doubling cutoff; `tail(bins, n_max, m_hat)` is evaluated
/// with `m_hat` fitted over bins `0..=n_max` and inflated. Candidates with no
/// nonempty bin yet are skipped, since the fit would be zero.
fn truncate(
    rep: &HoledTorusRep,
    cfg: &EngineConfig,
    tail: impl Fn(&[CurveBin], u32, f64) -> f64,
) -> Result<Truncation> {
    cfg.check()?;
    let mut cutoff = 16u32.min(cfg.n_ceiling);
    loop {
        let bins = enumerate_bins(rep, cutoff)?;
        let mut m_fit = 0.0f64;
        let mut last_tail = f64::INFINITY;
        for n_max in 0..=cutoff {
            let b = &bins[n_max as usize];
            let n1 = n_max as f64 + 1.0;
            m_fit = m_fit.max(b.members.len() as f64 / (n1 * n1));
            if m_fit == 0.0 {
                continue;
            }
            let m_hat = cfg.m_safety * m_fit;
            let kept = &bins[..=n_max as usize];
            last_tail = tail(kept, n_max, m_hat);
            if last_tail < cfg.tail_tolerance {
                let mut bins = bins;
                bins.truncate(n_max as usize + 1);
                return Ok(Truncation {
                    kappa_hat: 0.0,
                    bins,
                    n_max,
                    m_hat,
                    tail_bound: last_tail,
                });
            }
        }
        if cutoff >= cfg.n_ceiling {
            return Err(Error::NonConvergence {
                n_ceiling: cfg.n_ceiling,
                tail_bound: last_tail,
                tolerance: cfg.tail_tolerance,
            });
        }
        cutoff = (cutoff * 2).min(cfg.n_ceiling);
    }
}

/// Boundary `(ℓ∂, α∂)` and cusp flag, with domain checks.
fn boundary_data(rep: &HoledTorusRep, allow_cusp: bool) -> Result<(DualScalar, bool)> {
    if !rep.coords.all_above_two() {
        return Err(Error::InvalidCoords("traces must exceed 2"));
    }
    if rep.is_cusp() {
        if allow_cusp {
            return Ok((DualScalar::ZERO, true));
        }
        return Err(Error::BoundaryParabolic {
            boundary_trace: rep.boundary_trace().re,
        });
    }
    if rep.boundary_trace().re > -2.0 {
        return Err(Error::InvalidCoords("boundary trace must be below -2"));
    }
    Ok((rep.boundary_length()?, false))
}

/// Truncation for the length identity.
pub fn truncate_for_identity(rep: &HoledTorusRep, cfg: &EngineConfig) -> Result<Truncation> {
    let (boundary, cusp) = boundary_data(rep, true)?;
    truncate(rep, cfg, |_, n, m| {
        identity_tail_bound(n, m, boundary.re, cusp)
    })
}

/// Truncation for the Margulis identity, with `κ̂` re-estimated per candidate.
pub fn truncate_for_derivative(rep: &HoledTorusRep, cfg: &EngineConfig) -> Result<Truncation> {
    let (boundary, _) = boundary_data(rep, false)?;
    let mut t = truncate(rep, cfg, |bins, n, m| {
        let kappa = cfg.kappa_safety * kappa_estimate(bins, Some(boundary));
        derivative_tail_bound(n, m, kappa, boundary.re, boundary.inf)
    })?;
    t.kappa_hat = kappa_estimate(&t.bins, Some(boundary));
    Ok(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesKind {
    McShane,
    McShaneCusp,
    Margulis,
    ImportedMcShane,
    ImportedMargulis,
}

/// Outcome of one verification.
///
/// `residual = target − partial_sum` in every kind. For the Margulis identity
/// the target is `α∂`, the partial sum is `Σ (H α∂ + K(α₁ + α₂))`, and the
/// residual equals `lhs − rhs` with `lhs = (1 − ΣH) α∂`, `rhs = ΣK(α₁ + α₂)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesReport {
    pub kind: SeriesKind,
    pub target: f64,
    pub partial_sum: f64,
    pub residual: f64,
    /// `Σ D`, or `Σ 2/(1 + e^ℓ)` at a cusp.
    pub partial_sum_identity: f64,
    /// `Σ d/dt D`.
    pub partial_sum_derivative: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ell_boundary: f64,
    pub alpha_boundary: f64,
    pub n_max: u32,
    pub bins: Vec<BinSummary>,
    pub tail_bound: f64,
    pub tail_bound_identity: f64,
    pub tail_bound_derivative: f64,
    /// False for imported term lists, whose coverage is the caller's problem.
    pub tail_certified: bool,
    pub m_hat: f64,
    pub kappa_hat: f64,
    pub h_partial_sum: f64,
    /// First bin at which the running `ΣH` exceeds 1.
    pub h_threshold_n: Option<u32>,
    /// Smallest interior Margulis invariant among summed curves.
    pub min_interior_alpha: Option<f64>,
    pub tolerance: f64,
    pub passed: bool,
}

impl SeriesReport {
    /// Counts per bin, for the `|𝒞_N| ≤ m(N+1)²` check.
    pub fn bin_counts(&self) -> impl Iterator<Item = (u32, usize)> + '_ {
        self.bins.iter().map(|b| (b.n, b.count))
    }
}

struct Totals {
    identity: f64,
    derivative: f64,
    h: f64,
    k_alpha: f64,
    h_threshold_n: Option<u32>,
}

/// Combines bin summaries in index order.
fn combine(bins: &[BinSummary]) -> Totals {
    let mut identity = KahanSum::new();
    let mut derivative = KahanSum::new();
    let mut h = KahanSum::new();
    let mut ka = KahanSum::new();
    let mut h_threshold_n = None;
    for b in bins {
        identity.add(b.sum_d);
        derivative.add(b.sum_deriv);
        h.add(b.sum_h);
        ka.add(b.sum_k_alpha);
        if h_threshold_n.is_none() && h.value() > 1.0 {
            h_threshold_n = Some(b.n);
        }
    }
    Totals {
        identity: identity.value(),
        derivative: derivative.value(),
        h: h.value(),
        k_alpha: ka.value(),
        h_threshold_n,
    }
}

fn min_alpha(bins: &[CurveBin]) -> Option<f64> {
    bins.iter()
        .flat_map(|b| b.members.iter())
        .map(|c| c.alpha)
        .reduce(f64::min)
}

/// Assembles the length-identity report from precomputed bin summaries.
pub fn assemble_mcshane(
    rep: &HoledTorusRep,
    t: &Truncation,
    summaries: Vec<BinSummary>,
    cfg: &EngineConfig,
) -> Result<SeriesReport> {
    let (boundary, cusp) = boundary_data(rep, true)?;
    let totals = combine(&summaries);
    let target = if cusp { 1.0 } else { boundary.re };
    let residual = target - totals.identity;
    let kappa = kappa_estimate(&t.bins, if cusp { None } else { Some(boundary) });
    let tail_d = if cusp {
        f64::NAN
    } else {
        derivative_tail_bound(
            t.n_max,
            t.m_hat,
            cfg.kappa_safety * kappa,
            boundary.re,
            boundary.inf,
        )
    };
    Ok(SeriesReport {
        kind: if cusp {
            SeriesKind::McShaneCusp
        } else {
            SeriesKind::McShane
        },
        target,
        partial_sum: totals.identity,
        residual,
        partial_sum_identity: totals.identity,
        partial_sum_derivative: totals.derivative,
        lhs: (1.0 - totals.h) * boundary.inf,
        rhs: totals.k_alpha,
        ell_boundary: boundary.re,
        alpha_boundary: boundary.inf,
        n_max: t.n_max,
        bins: summaries,
        tail_bound: t.tail_bound,
        tail_bound_identity: t.tail_bound,
        tail_bound_derivative: tail_d,
        tail_certified: true,
        m_hat: t.m_hat,
        kappa_hat: kappa,
        h_partial_sum: totals.h,
        h_threshold_n: totals.h_threshold_n,
        min_interior_alpha: min_alpha(&t.bins),
        tolerance: cfg.tail_tolerance,
        passed: residual.abs() <= t.tail_bound.max(cfg.tail_tolerance),
    })
}

/// Assembles the Margulis-identity report from precomputed bin summaries.
pub fn assemble_margulis(
    rep: &HoledTorusRep,
    t: &Truncation,
    summaries: Vec<BinSummary>,
    cfg: &EngineConfig,
) -> Result<SeriesReport> {
    let (boundary, _) = boundary_data(rep, false)?;
    let totals = combine(&summaries);
    let lhs = (1.0 - totals.h) * boundary.inf;
    let rhs = totals.k_alpha;
    let residual = lhs - rhs;
    Ok(SeriesReport {
        kind: SeriesKind::Margulis,
        target: boundary.inf,
        partial_sum: totals.derivative,
        residual,
        partial_sum_identity: totals.identity,
        partial_sum_derivative: totals.derivative,
        lhs,
        rhs,
        ell_boundary: boundary.re,
        alpha_boundary: boundary.inf,
        n_max: t.n_max,
        bins: summaries,
        tail_bound: t.tail_bound,
        tail_bound_identity: identity_tail_bound(t.n_max, t.m_hat, boundary.re, false),
        tail_bound_derivative: t.tail_bound,
        tail_certified: true,
        m_hat: t.m_hat,
        kappa_hat: t.kappa_hat,
        h_partial_sum: totals.h,
        h_threshold_n: totals.h_threshold_n,
        min_interior_alpha: min_alpha(&t.bins),
        tolerance: cfg.tail_tolerance,
        passed: residual.abs() <= t.tail_bound.max(cfg.tail_tolerance),
    })
}

fn summaries(t: &Truncation, boundary: DualScalar, cusp: bool) -> Vec<BinSummary> {
    t.bins
        .iter()
        .map(|b| summarize_bin(b, boundary, cusp))
        .collect()
}

/// Sums `D(ℓ∂, ℓγ, ℓγ)` over curves until the certified tail is below
/// tolerance, and compares against `ℓ∂`. At a cusp the limiting summand
/// `2/(1 + e^{ℓγ})` is summed against the target `1`.
pub fn mcshane_sum(rep: &HoledTorusRep, cfg: &EngineConfig) -> Result<SeriesReport> {
    let t = truncate_for_identity(rep, cfg)?;
    let (boundary, cusp) = boundary_data(rep, true)?;
    let s = summaries(&t, boundary, cusp);
    assemble_mcshane(rep, &t, s, cfg)
}

/// Residual of `(1 − ΣH) α∂ = ΣK(α₁ + α₂)` for the attached deformation.
pub fn margulis_residual(rep: &HoledTorusRep, cfg: &EngineConfig) -> Result<SeriesReport> {
    let t = truncate_for_derivative(rep, cfg)?;
    let (boundary, _) = boundary_data(rep, false)?;
    let s = summaries(&t, boundary, false);
    assemble_margulis(rep, &t, s, cfg)
}

/// Running `ΣH(2ℓγ, ℓ∂)` by bin.
#[derive(Debug, Clone, PartialEq)]
pub struct MirzakhaniReport {
    /// `(N, ΣH over bins 0..=N)`.
    pub running: Vec<(u32, f64)>,
    pub threshold_n: Option<u32>,
    /// Whether every summed term had `D(ℓ∂, ℓγ, ℓγ)/ℓ∂ < H(2ℓγ, ℓ∂)`.
    pub terms_below_h: bool,
}

/// First bin at which the running `ΣH` exceeds 1, searching up to the ceiling.
pub fn mirzakhani_threshold(rep: &HoledTorusRep, cfg: &EngineConfig) -> Result<MirzakhaniReport> {
    let (boundary, _) = boundary_data(rep, false)?;
    let lb = boundary.re;
    let mut cutoff = 16u32.min(cfg.n_ceiling);
    loop {
        let bins = enumerate_bins(rep, cutoff)?;
        let mut running = Vec::with_capacity(bins.len());
        let mut acc = KahanSum::new();
        let mut threshold_n = None;
        let mut terms_below_h = true;
        for b in &bins {
            for c in &b.members {
                let h = coeff_h(2.0 * c.length, lb);
                acc.add(h);
                if !(gap_d(lb, c.length, c.length) / lb < h) {
                    terms_below_h = false;
                }
            }
            running.push((b.n, acc.value()));
            if threshold_n.is_none() && acc.value() > 1.0 {
                threshold_n = Some(b.n);
            }
        }
        if threshold_n.is_some() || cutoff >= cfg.n_ceiling {
            return Ok(MirzakhaniReport {
                running,
                threshold_n,
                terms_below_h,
            });
        }
        cutoff = (cutoff * 2).min(cfg.n_ceiling);
    }
}

/// A caller-supplied summand for surfaces whose pants are enumerated elsewhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImportedTerm {
    pub ell1: f64,
    pub ell2: f64,
    pub alpha1: f64,
    pub alpha2: f64,
}

fn imported_bins(terms: &[ImportedTerm], ell_b: f64, alpha_b: f64) -> Vec<BinSummary> {
    let n_max = terms
        .iter()
        .map(|t| math::floor(t.ell1 + t.ell2).max(0.0) as u32)
        .max()
        .unwrap_or(0);
    let mut acc: Vec<(usize, KahanSum, KahanSum, KahanSum, KahanSum)> = (0..=n_max)
        .map(|_| {
            (
                0,
                KahanSum::new(),
                KahanSum::new(),
                KahanSum::new(),
                KahanSum::new(),
            )
        })
        .collect();
    for t in terms {
        let n = math::floor(t.ell1 + t.ell2).max(0.0) as usize;
        let s = SeriesTerm::new(t.ell1, t.ell2, ell_b, t.alpha1, t.alpha2, alpha_b);
        let slot = &mut acc[n];
        slot.0 += 1;
        slot.1.add(s.d);
        slot.2.add(s.derivative);
        slot.3.add(s.h);
        slot.4.add(s.k * (s.alpha1 + s.alpha2));
    }
    acc.into_iter()
        .enumerate()
        .map(|(n, (count, d, dd, h, ka))| BinSummary {
            n: n as u32,
            count,
            sum_d: d.value(),
            sum_deriv: dd.value(),
            sum_h: h.value(),
            sum_k_alpha: ka.value(),
        })
        .collect()
}

fn imported_report(
    kind: SeriesKind,
    ell_b: f64,
    alpha_b: f64,
    terms: &[ImportedTerm],
    tolerance: f64,
) -> SeriesReport {
    let bins = imported_bins(terms, ell_b, alpha_b);
    let totals = combine(&bins);
    let lhs = (1.0 - totals.h) * alpha_b;
    let rhs = totals.k_alpha;
    let (target, partial_sum, residual) = match kind {
        SeriesKind::ImportedMargulis => (alpha_b, totals.derivative, lhs - rhs),
        _ => (ell_b, totals.identity, ell_b - totals.identity),
    };
    let m_fit = bins
        .iter()
        .map(|b| b.count as f64 / ((b.n as f64 + 1.0) * (b.n as f64 + 1.0)))
        .fold(0.0, f64::max);
    let kappa = terms
        .iter()
        .flat_map(|t| [(t.alpha1, t.ell1), (t.alpha2, t.ell2)])
        .filter(|(_, l)| *l > 0.0)
        .map(|(a, l)| a.abs() / l)
        .fold(0.0, f64::max);
    SeriesReport {
        kind,
        target,
        partial_sum,
        residual,
        partial_sum_identity: totals.identity,
        partial_sum_derivative: totals.derivative,
        lhs,
        rhs,
        ell_boundary: ell_b,
        alpha_boundary: alpha_b,
        n_max: bins.last().map(|b| b.n).unwrap_or(0),
        bins,
        tail_bound: 0.0,
        tail_bound_identity: 0.0,
        tail_bound_derivative: 0.0,
        tail_certified: false,
        m_hat: m_fit,
        kappa_hat: kappa,
        h_partial_sum: totals.h,
        h_threshold_n: totals.h_threshold_n,
        min_interior_alpha: terms
            .iter()
            .flat_map(|t| [t.alpha1, t.alpha2])
            .reduce(f64::min),
        tolerance,
        passed: residual.abs() <= tolerance,
    }
}

/// Length identity over an externally supplied list of pants; no tail is
/// certified, so the pass test is `|residual| ≤ tolerance`.
pub fn mcshane_sum_imported(
    ell_boundary: f64,
    terms: &[ImportedTerm],
    tolerance: f64,
) -> SeriesReport {
    imported_report(
        SeriesKind::ImportedMcShane,
        ell_boundary,
        0.0,
        terms,
        tolerance,
    )
}

/// Margulis identity over an externally supplied list of pants.
pub fn margulis_residual_imported(
    ell_boundary: f64,
    alpha_boundary: f64,
    terms: &[ImportedTerm],
    tolerance: f64,
) -> SeriesReport {
    imported_report(
        SeriesKind::ImportedMargulis,
        ell_boundary,
        alpha_boundary,
        terms,
        tolerance,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::enumerate_curves;
    use crate::representation::{
        attach_deformation, build_rep, DeformationSpec, PolynomialPath, TraceCoords,
    };
    use proptest::prelude::*;

    fn near(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn rep(x: f64, y: f64, z: f64) -> HoledTorusRep {
        build_rep(TraceCoords::new(x, y, z)).unwrap()
    }

    /// Naive evaluation straight from the definition.
    fn gap_naive(x: f64, y: f64, z: f64) -> f64 {
        let s = (y + z) / 2.0;
        2.0 * libm::log((libm::exp(x / 2.0) + libm::exp(s)) / (libm::exp(-x / 2.0) + libm::exp(s)))
    }

    #[test]
    fn gap_examples() {
        assert_eq!(gap_d(0.0, 3.0, 4.0), 0.0);
        let e = core::f64::consts::E;
        let expect = 2.0 * libm::log(2.0 * e / (e + 1.0 / e));
        assert!(near(gap_d(2.0, 1.0, 1.0), expect, 1e-14));
        assert!(near(expect, 1.1324383390, 1e-9));
        for &(x, y, z) in &[
            (1.0, 2.0, 3.0),
            (5.0, 0.5, 0.2),
            (0.1, 10.0, 12.0),
            (-2.0, 1.0, 1.0),
        ] {
            assert!(near(gap_d(x, y, z), gap_naive(x, y, z), 1e-12));
        }
        // large arguments: no overflow, small gaps keep relative precision
        let small = gap_d(1.0, 300.0, 300.0);
        let expect = 4.0 * libm::sinh(0.5) * libm::exp(-300.0);
        assert!(near(small / expect, 1.0, 1e-12));
        assert!(near(gap_d(2000.0, 1.0, 1.0), 1998.0, 1e-9));
    }

    #[test]
    fn coefficient_examples() {
        for v in [-3.0, 0.0, 0.5, 7.0] {
            assert!(near(coeff_h(0.0, v), 1.0, 1e-14));
            assert_eq!(coeff_k(3.0, 0.0), 0.0);
            assert!(near(coeff_h(2.5, v), coeff_h(2.5, -v), 1e-15));
            assert!(near(coeff_k(2.5, v), coeff_k(-2.5, v), 1e-15));
            assert!(near(coeff_k(2.5, -v), -coeff_k(2.5, v), 1e-15));
        }
        let e = core::f64::consts::E;
        assert!(near(coeff_h(2.0, 0.0), 2.0 / (1.0 + e), 1e-15));
        assert!(near(coeff_h(2.0, 0.0), 0.53788, 1e-5));
        assert!(coeff_k(1e4, 3.0).is_finite());
    }

    #[test]
    fn derivative_term_examples() {
        assert_eq!(term_derivative(2.0, 2.0, 3.0, 0.0, 0.0, 0.0), 0.0);
        assert_eq!(
            term_derivative(2.0, 2.5, 3.0, 0.0, 0.0, 1.5),
            coeff_h(4.5, 3.0) * 1.5
        );
        // finite difference of D along a length path
        let (l1, l2, lb) = (2.3, 3.1, 1.7);
        let (a1, a2, ab) = (0.4, -0.9, 1.3);
        let f = |t: f64| gap_d(lb + ab * t, l1 + a1 * t, l2 + a2 * t);
        let h = 1e-4;
        let fd = (f(h) - f(-h)) / (2.0 * h);
        assert!(near(term_derivative(l1, l2, lb, a1, a2, ab), fd, 1e-6));
    }

    #[test]
    fn tail_bounds_decrease() {
        let mut prev = f64::INFINITY;
        for n in 0..80 {
            let t = identity_tail_bound(n, 0.2, 5.0, false);
            let d = derivative_tail_bound(n, 0.2, 0.5, 5.0, 1.0);
            assert!(t >= 0.0 && d >= 0.0);
            assert!(t < prev);
            prev = t;
        }
        // closed form check: Σ_{N>n} (N+1)² e^{−N/2}
        let brute: f64 = (11..3000)
            .map(|n| {
                let n = n as f64;
                (n + 1.0) * (n + 1.0) * libm::exp(-n / 2.0)
            })
            .sum();
        assert!(near(
            identity_tail_bound(10, 0.25, 0.0, true),
            brute * 0.5,
            1e-12 * brute
        ));
    }

    #[test]
    fn mcshane_identity_at_4_4_4() {
        let r = rep(4.0, 4.0, 4.0);
        let report = mcshane_sum(&r, &EngineConfig::default()).unwrap();
        let target = 2.0 * libm::acosh(9.0);
        assert!(near(report.target, target, 1e-12));
        assert!(near(target, 5.7745419007, 1e-9));
        assert!(report.residual.abs() <= 1e-6, "{report:?}");
        assert!(report.passed);
        assert!(report.tail_bound < 1e-6);
        assert!(report.n_max <= 60);
    }

    #[test]
    fn cusp_limit_recovers_one_half() {
        let r = rep(3.0, 3.0, 3.0);
        let report = mcshane_sum(&r, &EngineConfig::default()).unwrap();
        assert_eq!(report.kind, SeriesKind::McShaneCusp);
        assert!(
            near(report.partial_sum, 1.0, 1e-6),
            "{}",
            report.partial_sum
        );
        assert!(report.passed);
        assert!(matches!(
            margulis_residual(&r, &EngineConfig::default()),
            Err(Error::BoundaryParabolic { .. })
        ));
    }

    #[test]
    fn partial_sums_increase_with_truncation() {
        let r = rep(4.0, 4.5, 5.0);
        let lb = r.boundary_length().unwrap();
        let mut prev = 0.0;
        for n in [10, 20, 30, 40] {
            let bins = enumerate_bins(&r, n).unwrap();
            let s: f64 = bins.iter().map(|b| summarize_bin(b, lb, false).sum_d).sum();
            assert!(s > prev);
            prev = s;
        }
    }

    #[test]
    fn bin_order_matches_farey_order() {
        let r = rep(4.2, 3.7, 5.1);
        let lb = r.boundary_length().unwrap().re;
        let e = enumerate_curves(&r, 41.0).unwrap();
        let farey = KahanSum::sum_iter(e.curves.iter().map(|c| gap_d(lb, c.length, c.length)));
        let bins = e.into_bins(41);
        let binned = KahanSum::sum_iter(
            bins.iter()
                .flat_map(|b| b.members.iter())
                .map(|c| gap_d(lb, c.length, c.length)),
        );
        assert!(near(farey, binned, 1e-10));
    }

    #[test]
    fn margulis_zero_deformation_is_exact() {
        let r = rep(4.0, 4.0, 4.0);
        let r = attach_deformation(&r, &DeformationSpec::Zero).unwrap();
        let report = margulis_residual(&r, &EngineConfig::default()).unwrap();
        assert_eq!(report.residual, 0.0);
        assert!(report.passed);
        assert_eq!(report.kappa_hat, 0.0);
    }

    #[test]
    fn margulis_uniform_path() {
        let r = rep(4.0, 4.0, 4.0);
        let r = attach_deformation(
            &r,
            &DeformationSpec::Path {
                path: PolynomialPath::linear([1.0; 3]),
                h: 1e-4,
            },
        )
        .unwrap();
        let report = margulis_residual(&r, &EngineConfig::default()).unwrap();
        assert!(report.residual.abs() <= 1e-5, "{report:?}");
        assert!(report.tail_bound < 1e-6);
        assert!(report.passed);
        // lengthening every interior curve lengthens the boundary
        assert!(report.min_interior_alpha.unwrap() > 0.0);
        assert!(report.alpha_boundary > 0.0);
        assert!(report.h_partial_sum > 1.0);
    }

    #[test]
    fn kappa_examples() {
        let r = rep(4.0, 4.0, 4.0);
        let z = attach_deformation(&r, &DeformationSpec::Zero).unwrap();
        let bins = enumerate_bins(&z, 20).unwrap();
        assert_eq!(
            kappa_estimate(&bins, Some(z.boundary_length().unwrap())),
            0.0
        );
        let s = 0.6;
        let a0 = r.a.value();
        let d = DeformationSpec::Tangent {
            a_eps: [[s / 2.0 * a0[0][0], 0.0], [0.0, -s / 2.0 * a0[1][1]]],
            b_eps: [[0.0; 2]; 2],
        };
        let r = attach_deformation(&r, &d).unwrap();
        let bins = enumerate_bins(&r, 20).unwrap();
        let k = kappa_estimate(&bins, Some(r.boundary_length().unwrap()));
        assert!(k >= s / r.a.length().unwrap() - 1e-12);
    }

    #[test]
    fn mirzakhani_threshold_at_4_4_4() {
        let r = rep(4.0, 4.0, 4.0);
        let m = mirzakhani_threshold(&r, &EngineConfig::default()).unwrap();
        assert!(m.threshold_n.is_some());
        assert!(m.terms_below_h);
        for w in m.running.windows(2) {
            assert!(w[1].1 >= w[0].1);
        }
    }

    #[test]
    fn non_convergence_is_reported() {
        let r = rep(4.0, 4.0, 4.0);
        let cfg = EngineConfig {
            n_ceiling: 8,
            ..EngineConfig::default()
        };
        assert!(matches!(
            mcshane_sum(&r, &cfg),
            Err(Error::NonConvergence { n_ceiling: 8, .. })
        ));
    }

    #[test]
    fn imported_list_matches_torus_enumeration() {
        let r = rep(4.0, 4.0, 4.0);
        let r = attach_deformation(
            &r,
            &DeformationSpec::Path {
                path: PolynomialPath::linear([1.0; 3]),
                h: 1e-4,
            },
        )
        .unwrap();
        let b = r.boundary_length().unwrap();
        let bins = enumerate_bins(&r, 50).unwrap();
        let terms: Vec<ImportedTerm> = bins
            .iter()
            .flat_map(|b| b.members.iter())
            .map(|c| ImportedTerm {
                ell1: c.length,
                ell2: c.length,
                alpha1: c.alpha,
                alpha2: c.alpha,
            })
            .collect();
        let m = mcshane_sum_imported(b.re, &terms, 1e-6);
        assert!(m.passed && !m.tail_certified);
        let g = margulis_residual_imported(b.re, b.inf, &terms, 1e-5);
        assert!(g.passed, "{g:?}");
        assert!(near(g.residual, g.target - g.partial_sum, 1e-10));
    }

    #[test]
    fn bad_config_rejected() {
        let r = rep(4.0, 4.0, 4.0);
        let cfg = EngineConfig {
            tail_tolerance: 0.0,
            ..EngineConfig::default()
        };
        assert!(mcshane_sum(&r, &cfg).is_err());
        let bad = rep(2.1, 2.1, 2.1);
        assert!(matches!(
            mcshane_sum(&bad, &EngineConfig::default()),
            Err(Error::InvalidCoords(_))
        ));
    }

    proptest! {
        #[test]
        fn partial_derivatives(x in 0.01f64..10.0, y in 0.01f64..10.0, z in 0.01f64..10.0) {
            let h = 1e-4;
            let dx = (gap_d(x + h, y, z) - gap_d(x - h, y, z)) / (2.0 * h);
            let dy = (gap_d(x, y + h, z) - gap_d(x, y - h, z)) / (2.0 * h);
            let dz = (gap_d(x, y, z + h) - gap_d(x, y, z - h)) / (2.0 * h);
            prop_assert!(near(dx, coeff_h(y + z, x), 1e-8));
            prop_assert!(near(dy, coeff_k(y + z, x), 1e-8));
            prop_assert!(near(dz, coeff_k(y + z, x), 1e-8));
        }

        #[test]
        fn bounds_and_signs(x in 0.01f64..10.0, y in 0.01f64..10.0, z in 0.01f64..10.0) {
            let d = gap_d(x, y, z);
            prop_assert!(d > 0.0 && d <= gap_bound(x, y, z));
            let (h, k) = (coeff_h(y + z, x), coeff_k(y + z, x));
            prop_assert!(h > 0.0 && k < 0.0);
            prop_assert!(h < coeff_bound(y + z, x) && k.abs() < coeff_bound(y + z, x));
            prop_assert!(near(k, coeff_k_logistic(y + z, x), 1e-12));
        }

        #[test]
        fn h_increases_in_second_argument(u in 0.01f64..10.0, v in 0.01f64..10.0) {
            let e = 1e-5;
            prop_assert!(coeff_h(u, v + e) > coeff_h(u, v - e));
            // D(L, ℓ, ℓ)/L < H(2ℓ, L)
            prop_assert!(gap_d(v, u / 2.0, u / 2.0) / v < coeff_h(u, v));
        }
    }
}
