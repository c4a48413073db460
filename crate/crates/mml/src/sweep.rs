//! Margulis-identity sweep over a grid of surfaces and deformations.
//!
//! Trace triples are drawn uniformly from `[3.5, 6]³` (every such triple has
//! boundary trace below `−2`). Each triple gets `seeds` random tangent
//! deformations `A₁ = X_A A₀`, `B₁ = X_B B₀` with the `sl(2)` coordinates of
//! `X_A`, `X_B` uniform in `[−1, 1]`, plus the uniform path `c + t(1, 1, 1)`.
//! The path `(4 + t, 4 + t, 4 + t)` is always included as cell 0.

use mml_core::identity::{margulis_residual, mirzakhani_threshold};
use mml_core::representation::{attach_deformation, build_rep, PolynomialPath, DEFAULT_PATH_STEP};
use mml_core::{DeformationSpec, EngineConfig, HoledTorusRep, TraceCoords};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepConfig {
    pub grid: usize,
    pub seeds: usize,
    pub seed: u64,
    pub engine: EngineConfig,
    /// A cell passes when `|residual| ≤ max(residual_floor, tail bound)`.
    pub residual_floor: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            grid: 5,
            seeds: 20,
            seed: DEFAULT_SEED,
            engine: EngineConfig::default(),
            residual_floor: 1e-5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellReport {
    pub index: usize,
    pub coords: [f64; 3],
    pub deformation: &'static str,
    /// Seed of the tangent deformation; `None` for path cells.
    pub seed: Option<u64>,
    pub residual: f64,
    pub bound: f64,
    pub tail_bound: f64,
    pub n_max: u32,
    pub alpha_boundary: f64,
    pub min_interior_alpha: Option<f64>,
    /// All enumerated interior invariants exceed the tail bound.
    pub positivity_applies: bool,
    pub passed: bool,
    pub error: Option<String>,
}

impl CellReport {
    /// False only when positivity applies and `α(∂) ≤ 0`.
    pub fn positivity_holds(&self) -> bool {
        !self.positivity_applies || self.alpha_boundary > 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TripleReport {
    pub coords: [f64; 3],
    pub h_threshold_n: Option<u32>,
    pub terms_below_h: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub seed: u64,
    pub total: usize,
    pub passed: usize,
    pub positivity_applicable: usize,
    pub positivity_violations: usize,
    pub triples: Vec<TripleReport>,
    pub cells: Vec<CellReport>,
}

impl SweepReport {
    pub fn all_passed(&self) -> bool {
        self.passed == self.total
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Cell {
    coords: TraceCoords,
    deformation: Deform,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Deform {
    Uniform,
    Tangent(u64),
}

pub fn grid_triples(n: usize, seed: u64) -> Vec<TraceCoords> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let c = TraceCoords::new(
            rng.gen_range(3.5..=6.0),
            rng.gen_range(3.5..=6.0),
            rng.gen_range(3.5..=6.0),
        );
        if c.boundary_trace() < -2.0 {
            out.push(c);
        }
    }
    out
}

/// Random tangent deformation with the given seed.
pub fn random_tangent(rep: &HoledTorusRep, seed: u64) -> DeformationSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = || [0; 3].map(|_| rng.gen_range(-1.0..=1.0));
    let (xa, xb) = (v(), v());
    DeformationSpec::from_algebra(rep, &xa, &xb)
}

fn cells(cfg: &SweepConfig) -> Vec<Cell> {
    let mut out = vec![Cell {
        coords: TraceCoords::new(4.0, 4.0, 4.0),
        deformation: Deform::Uniform,
    }];
    for (i, c) in grid_triples(cfg.grid, cfg.seed).into_iter().enumerate() {
        out.push(Cell {
            coords: c,
            deformation: Deform::Uniform,
        });
        for k in 0..cfg.seeds {
            let s = cfg.seed.wrapping_add(1 + (i * cfg.seeds + k) as u64);
            out.push(Cell {
                coords: c,
                deformation: Deform::Tangent(s),
            });
        }
    }
    out
}

fn run_cell(index: usize, cell: &Cell, cfg: &SweepConfig) -> CellReport {
    let TraceCoords { x, y, z } = cell.coords;
    let mut report = CellReport {
        index,
        coords: [x, y, z],
        deformation: match cell.deformation {
            Deform::Uniform => "path",
            Deform::Tangent(_) => "tangent",
        },
        seed: match cell.deformation {
            Deform::Uniform => None,
            Deform::Tangent(s) => Some(s),
        },
        residual: f64::NAN,
        bound: f64::NAN,
        tail_bound: f64::NAN,
        n_max: 0,
        alpha_boundary: f64::NAN,
        min_interior_alpha: None,
        positivity_applies: false,
        passed: false,
        error: None,
    };
    let result = build_rep(cell.coords).and_then(|rep| {
        let spec = match cell.deformation {
            Deform::Uniform => DeformationSpec::Path {
                path: PolynomialPath::linear([1.0; 3]),
                h: DEFAULT_PATH_STEP,
            },
            Deform::Tangent(s) => random_tangent(&rep, s),
        };
        margulis_residual(&attach_deformation(&rep, &spec)?, &cfg.engine)
    });
    match result {
        Ok(r) => {
            report.residual = r.residual;
            report.bound = cfg.residual_floor.max(r.tail_bound);
            report.tail_bound = r.tail_bound;
            report.n_max = r.n_max;
            report.alpha_boundary = r.alpha_boundary;
            report.min_interior_alpha = r.min_interior_alpha;
            report.positivity_applies = r.min_interior_alpha.is_some_and(|a| a > r.tail_bound);
            report.passed = r.residual.abs() <= report.bound;
        }
        Err(e) => report.error = Some(e.to_string()),
    }
    report
}

fn run_triple(c: TraceCoords, cfg: &SweepConfig) -> TripleReport {
    let m = build_rep(c).and_then(|r| mirzakhani_threshold(&r, &cfg.engine));
    TripleReport {
        coords: [c.x, c.y, c.z],
        h_threshold_n: m.as_ref().ok().and_then(|m| m.threshold_n),
        terms_below_h: m.is_ok_and(|m| m.terms_below_h),
    }
}

/// Runs every cell on the current rayon pool; output order is cell order.
pub fn sweep(cfg: &SweepConfig) -> SweepReport {
    let cells = cells(cfg);
    let reports: Vec<CellReport> = cells
        .par_iter()
        .enumerate()
        .map(|(i, c)| run_cell(i, c, cfg))
        .collect();
    let triples: Vec<TripleReport> = grid_triples(cfg.grid, cfg.seed)
        .into_par_iter()
        .map(|c| run_triple(c, cfg))
        .collect();
    SweepReport {
        seed: cfg.seed,
        total: reports.len(),
        passed: reports.iter().filter(|r| r.passed).count(),
        positivity_applicable: reports.iter().filter(|r| r.positivity_applies).count(),
        positivity_violations: reports.iter().filter(|r| !r.positivity_holds()).count(),
        triples,
        cells: reports,
    }
}

impl SweepReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("sweep serializes");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> anyhow::Result<String> {
        #[derive(Serialize)]
        struct Row<'a> {
            index: usize,
            x: f64,
            y: f64,
            z: f64,
            deformation: &'a str,
            seed: Option<u64>,
            residual: f64,
            bound: f64,
            n_max: u32,
            alpha_boundary: f64,
            positivity_applies: bool,
            passed: bool,
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        for c in &self.cells {
            w.serialize(Row {
                index: c.index,
                x: c.coords[0],
                y: c.coords[1],
                z: c.coords[2],
                deformation: c.deformation,
                seed: c.seed,
                residual: c.residual,
                bound: c.bound,
                n_max: c.n_max,
                alpha_boundary: c.alpha_boundary,
                positivity_applies: c.positivity_applies,
                passed: c.passed,
            })?;
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }
}
