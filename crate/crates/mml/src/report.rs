//! JSON and CSV renderings of series reports.

use mml_core::identity::{BinSummary, SeriesKind};
use mml_core::SeriesReport;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinRecord {
    pub n: u32,
    pub count: usize,
    pub sum_d: f64,
    pub sum_deriv: f64,
    pub sum_h: f64,
}

impl From<&BinSummary> for BinRecord {
    fn from(b: &BinSummary) -> Self {
        BinRecord {
            n: b.n,
            count: b.count,
            sum_d: b.sum_d,
            sum_deriv: b.sum_deriv,
            sum_h: b.sum_h,
        }
    }
}

/// Serialized report. Non-finite numbers become `null`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportJson {
    pub kind: &'static str,
    pub target: f64,
    pub partial_sum: f64,
    pub residual: f64,
    pub n_max: u32,
    pub tail_bound: f64,
    /// "empirical" for enumerated surfaces, "none" for imported term lists.
    pub tail_certification: &'static str,
    pub m_hat: f64,
    pub kappa_hat: f64,
    pub h_partial_sum: f64,
    pub h_threshold_n: Option<u32>,
    pub lhs: f64,
    pub rhs: f64,
    pub ell_boundary: f64,
    pub alpha_boundary: f64,
    pub tail_bound_identity: Option<f64>,
    pub tail_bound_derivative: Option<f64>,
    pub min_interior_alpha: Option<f64>,
    pub tolerance: f64,
    pub passed: bool,
    pub bins: Vec<BinRecord>,
}

pub fn kind_name(k: SeriesKind) -> &'static str {
    match k {
        SeriesKind::McShane => "mcshane",
        SeriesKind::McShaneCusp => "mcshane-cusp",
        SeriesKind::Margulis => "margulis",
        SeriesKind::ImportedMcShane => "mcshane-imported",
        SeriesKind::ImportedMargulis => "margulis-imported",
    }
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

impl From<&SeriesReport> for ReportJson {
    fn from(r: &SeriesReport) -> Self {
        ReportJson {
            kind: kind_name(r.kind),
            target: r.target,
            partial_sum: r.partial_sum,
            residual: r.residual,
            n_max: r.n_max,
            tail_bound: r.tail_bound,
            tail_certification: if r.tail_certified {
                "empirical"
            } else {
                "none"
            },
            m_hat: r.m_hat,
            kappa_hat: r.kappa_hat,
            h_partial_sum: r.h_partial_sum,
            h_threshold_n: r.h_threshold_n,
            lhs: r.lhs,
            rhs: r.rhs,
            ell_boundary: r.ell_boundary,
            alpha_boundary: r.alpha_boundary,
            tail_bound_identity: finite(r.tail_bound_identity),
            tail_bound_derivative: finite(r.tail_bound_derivative),
            min_interior_alpha: r.min_interior_alpha,
            tolerance: r.tolerance,
            passed: r.passed,
            bins: r.bins.iter().map(BinRecord::from).collect(),
        }
    }
}

pub fn to_json(r: &SeriesReport) -> String {
    let mut s = serde_json::to_string_pretty(&ReportJson::from(r)).expect("report serializes");
    s.push('\n');
    s
}

/// Per-bin table.
pub fn to_csv(r: &SeriesReport) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for b in &r.bins {
        w.serialize(BinRecord::from(b))?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}
