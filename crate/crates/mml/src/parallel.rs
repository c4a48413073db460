//! Multithreaded evaluation with serial-identical results.
//!
//! Each bin is summarized serially on one worker and the summaries are
//! combined in bin order, so the output does not depend on thread count.

use mml_core::identity::{self, summarize_bin, BinSummary, Truncation};
use mml_core::{DualScalar, EngineConfig, HoledTorusRep, SeriesReport};
use rayon::prelude::*;

/// Worker pool sized by `MML_THREADS`, defaulting to rayon's choice.
pub fn pool() -> anyhow::Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("MML_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| anyhow::anyhow!("MML_THREADS must be a positive integer, got {v:?}"))?;
        if n == 0 {
            anyhow::bail!("MML_THREADS must be a positive integer, got 0");
        }
        b = b.num_threads(n);
    }
    Ok(b.build()?)
}

fn boundary(rep: &HoledTorusRep) -> mml_core::Result<(DualScalar, bool)> {
    if rep.is_cusp() {
        Ok((DualScalar::ZERO, true))
    } else {
        Ok((rep.boundary_length()?, false))
    }
}

pub fn bin_summaries(t: &Truncation, boundary: DualScalar, cusp: bool) -> Vec<BinSummary> {
    t.bins
        .par_iter()
        .map(|b| summarize_bin(b, boundary, cusp))
        .collect()
}

pub fn mcshane_sum(rep: &HoledTorusRep, cfg: &EngineConfig) -> mml_core::Result<SeriesReport> {
    let t = identity::truncate_for_identity(rep, cfg)?;
    let (b, cusp) = boundary(rep)?;
    let s = bin_summaries(&t, b, cusp);
    identity::assemble_mcshane(rep, &t, s, cfg)
}

pub fn margulis_residual(
    rep: &HoledTorusRep,
    cfg: &EngineConfig,
) -> mml_core::Result<SeriesReport> {
    let t = identity::truncate_for_derivative(rep, cfg)?;
    let (b, _) = boundary(rep)?;
    let s = bin_summaries(&t, b, false);
    identity::assemble_margulis(rep, &t, s, cfg)
}
