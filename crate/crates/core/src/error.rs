use core::fmt;

use crate::curves::Slope;

pub type Result<T> = core::result::Result<T, Error>;

/// Failure modes of the verification pipeline.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Inverting a dual scalar whose value part vanishes.
    ZeroDivisor { re: f64 },
    /// An element with `|trace| <= 2` where a hyperbolic one is required.
    NotHyperbolic { trace: f64 },
    /// A matrix whose dual determinant is not `1 + 0ε`.
    NotInGroup { det_re: f64, det_inf: f64 },
    /// Farey trace recursion and direct word evaluation disagree.
    RecursionMismatch {
        slope: Slope,
        recursion: f64,
        direct: f64,
    },
    /// Trace failed to grow along a Stern–Brocot branch, so pruning is unsound.
    NonMonotone {
        slope: Slope,
        parent_trace: f64,
        trace: f64,
    },
    /// Trace coordinates outside the supported domain.
    InvalidCoords(&'static str),
    /// The boundary is a cusp where a geodesic boundary is required.
    BoundaryParabolic { boundary_trace: f64 },
    /// A deformation that does not stay tangent to `SL(2, R)`.
    InvalidDeformation(&'static str),
    /// The certified tail did not fall below tolerance within the bin ceiling.
    NonConvergence {
        n_ceiling: u32,
        tail_bound: f64,
        tolerance: f64,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ZeroDivisor { re } => {
                write!(f, "dual scalar with value part {re:e} is not invertible")
            }
            Error::NotHyperbolic { trace } => {
                write!(f, "element with trace {trace} is not hyperbolic")
            }
            Error::NotInGroup { det_re, det_inf } => write!(
                f,
                "determinant {det_re} + {det_inf}ε is not 1 + 0ε"
            ),
            Error::RecursionMismatch {
                slope,
                recursion,
                direct,
            } => write!(
                f,
                "trace of slope {slope}: recursion gives {recursion}, word evaluation gives {direct}"
            ),
            Error::NonMonotone {
                slope,
                parent_trace,
                trace,
            } => write!(
                f,
                "trace {trace} at slope {slope} does not exceed parent trace {parent_trace}"
            ),
            Error::InvalidCoords(reason) => write!(f, "invalid trace coordinates: {reason}"),
            Error::BoundaryParabolic { boundary_trace } => write!(
                f,
                "boundary parabolic (boundary trace {boundary_trace})"
            ),
            Error::InvalidDeformation(reason) => write!(f, "invalid deformation: {reason}"),
            Error::NonConvergence {
                n_ceiling,
                tail_bound,
                tolerance,
            } => write!(
                f,
                "tail bound {tail_bound:e} still above tolerance {tolerance:e} at bin ceiling {n_ceiling}"
            ),
        }
    }
}

impl core::error::Error for Error {}
