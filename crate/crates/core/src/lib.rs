//! Porous medium flow on hyperbolic space.
//!
//! Radial geometry and the `r ↔ s` change of variables, a catalog of closed-form
//! solutions, a mass-conserving finite-volume solver for the radial
//! divergence-form family, and the analysis routines that turn run traces into
//! pass/fail verdicts.

pub mod analysis;
pub mod error;
pub mod exact;
pub mod geometry;
pub mod interp;
pub mod numdiff;
pub mod params;
pub mod quadrature;
pub mod solver;

pub use error::{Error, Result};
pub use params::{Diffusion, ModelParams};
