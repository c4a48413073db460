//! Curve census export.
//!
//! One row per simple closed curve in bins `0..=n_max`, in Farey traversal
//! order within each bin, followed by one summary row whose `word` column is
//! the literal `m_hat`, whose `trace` column holds the fitted bin-count
//! constant `max_N |𝒞_N| / (N + 1)²`, and whose `bin` column holds `n_max`.

use mml_core::identity::fit_bin_constant;
use mml_core::{CurveBin, HoledTorusRep};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CensusRow {
    pub slope_p: i64,
    pub slope_q: i64,
    pub word: String,
    pub trace: f64,
    pub length: f64,
    pub bin: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Census {
    pub rows: Vec<CensusRow>,
    pub n_max: u32,
    pub m_hat: f64,
    pub counts: Vec<usize>,
}

pub fn census(rep: &HoledTorusRep, n_max: u32) -> mml_core::Result<Census> {
    let bins = mml_core::curves::enumerate_bins(rep, n_max)?;
    Ok(from_bins(&bins, n_max))
}

pub fn from_bins(bins: &[CurveBin], n_max: u32) -> Census {
    let rows = bins
        .iter()
        .flat_map(|b| b.members.iter())
        .map(|c| CensusRow {
            slope_p: c.slope.p(),
            slope_q: c.slope.q(),
            word: c.word.to_string(),
            trace: c.trace,
            length: c.length,
            bin: c.bin_index(),
        })
        .collect();
    Census {
        rows,
        n_max,
        m_hat: fit_bin_constant(bins),
        counts: bins.iter().map(|b| b.members.len()).collect(),
    }
}

impl Census {
    pub fn to_csv(&self) -> anyhow::Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.write_record([
            String::new(),
            String::new(),
            "m_hat".to_string(),
            self.m_hat.to_string(),
            String::new(),
            self.n_max.to_string(),
        ])?;
        Ok(String::from_utf8(w.into_inner()?)?)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("census serializes");
        s.push('\n');
        s
    }
}
