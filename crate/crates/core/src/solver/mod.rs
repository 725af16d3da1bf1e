//! Flux-form finite-volume solver for `A(x) ∂ₜu = ∂ₓ(B(x) Φ)` on `[0, X]`.

pub mod front;
pub mod grid;
pub mod init;
pub mod problem;
pub mod run;
pub mod step;

pub use front::free_boundary;
pub use grid::{Grid, Spacing};
pub use init::{cell_averages, dirac_init, normalize_mass, perturb};
pub use problem::{Flux, Problem, ProblemKind};
pub use run::{log_spaced, run, Checkpoint, RunTrace, Scheme, SolverConfig, State, StepRecord};
pub use step::{explicit_dt_bound, explicit_step, implicit_step, NewtonConfig};
