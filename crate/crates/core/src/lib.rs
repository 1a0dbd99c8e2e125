//! Finite-dimensional frame multipliers on `ℂ^d`: frames and their duals,
//! multipliers and their inverses, companion frames under perturbation,
//! and the correction operators relating `M⁻¹` to dual-frame multipliers.
//!
//! Operators are dense complex matrices. A frame is stored through its
//! `d × N` synthesis matrix; analysis is its conjugate transpose.

pub mod cli;
pub mod error;
pub mod frames;
pub mod generators;
pub mod io;
pub mod multiplier;
pub mod numeric;
pub mod perturbation;
pub mod representations;
pub mod symbols;

pub use error::{Error, Result};
pub use frames::{DualFrame, Frame};
pub use multiplier::{InversionReport, Multiplier};
pub use numeric::{Mat, Tol, Vector, Verdict, C64};
pub use perturbation::PerturbReport;
pub use representations::{EquivalenceReport, RepResult};
pub use symbols::Symbol;
