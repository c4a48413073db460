//! File formats, reports and parallel drivers for `mml-core`.

pub mod census;
pub mod parallel;
pub mod report;
pub mod spec_file;
pub mod sweep;
pub mod terms;

/// Process exit codes.
pub mod exit {
    pub const PASS: i32 = 0;
    pub const INVALID_INPUT: i32 = 1;
    pub const NON_CONVERGENCE: i32 = 2;
    /// The computation finished but the residual exceeds its bound.
    pub const RESIDUAL_OUT_OF_BOUND: i32 = 3;

    pub fn for_error(e: &anyhow::Error) -> i32 {
        match e.downcast_ref::<mml_core::Error>() {
            Some(mml_core::Error::NonConvergence { .. }) => NON_CONVERGENCE,
            _ => INVALID_INPUT,
        }
    }
}
