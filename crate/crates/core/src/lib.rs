//! Numerical verification of the generalized McShane identity on one-holed
//! tori and of its derivative, the identity satisfied by Margulis invariants of
//! affine deformations.
//!
//! Group elements live in `SL(2, R[ε])`, the tangent group of `SL(2, R)`: the
//! value part is a Fuchsian holonomy, the `ε` part an infinitesimal
//! deformation. The Margulis invariant of an element is read off its dual
//! trace ([`sl2::DualMatrix2::margulis_invariant`]) and cross-checked against
//! the classical Lorentzian definition in [`lorentz`].
//!
//! Simple closed curves on the one-holed torus are indexed by Farey slopes
//! ([`curves`]); [`identity`] sums the gap function over them bin by bin and
//! reports certified truncation tails.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod curves;
pub mod dualnum;
mod error;
pub mod identity;
pub mod lorentz;
mod math;
pub mod representation;
pub mod sl2;
pub mod summation;

pub use crate::curves::{CurveBin, CurveClass, Slope};
pub use crate::dualnum::DualScalar;
pub use crate::error::{Error, Result};
pub use crate::identity::{EngineConfig, SeriesReport};
pub use crate::lorentz::LorentzIsometry;
pub use crate::representation::{DeformationSpec, HoledTorusRep, TraceCoords};
pub use crate::sl2::DualMatrix2;
