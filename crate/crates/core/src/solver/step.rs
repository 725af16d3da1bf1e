//! One time step of the flux-form scheme.
//!
//! The discrete equation on cell `i` is
//! `V_i (u_i - u_i^old) = dt (F_(i+1/2) - F_(i-1/2))` with
//! `F_(i+1/2) = G_(i+1/2) Φ(v_(i+1) - v_i)` and no flux through either end.
//! Here `G` is the face conductance with the center spacing folded in.

use crate::error::{Error, Result};
use crate::solver::problem::{Flux, Problem};

/// Newton settings for the implicit step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonConfig {
    /// Converged when `Σ|R_i| ≤ tol · Σ V_i u_i^old` (plus a rounding floor).
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            tol: 1e-13,
            max_iterations: 30,
        }
    }
}

/// Face flux `G Φ(v_(i+1) - v_i)` with its derivatives in `u_i` and `u_(i+1)`.
fn face(flux: Flux, g: f64, ul: f64, ur: f64) -> (f64, f64, f64) {
    let (vl, vr) = (flux.potential(ul), flux.potential(ur));
    let (phi, dphi) = match flux {
        Flux::Porous { .. } => (vr - vl, 1.0),
        Flux::PLaplacian { .. } => flux.law(vr - vl),
    };
    (
        g * phi,
        -g * dphi * flux.potential_derivative(ul),
        g * dphi * flux.potential_derivative(ur),
    )
}

/// Conductances adjusted for the nonlinearity of `Φ`.
///
/// For the p-Laplacian, `G (Δv/d)|Δv/d|^(p-2)` is written as
/// `G d^(1-p) |Δv|^(p-2) Δv`, so the stored `G = B/d` is rescaled by `d^(2-p)`.
pub(crate) fn effective_conductance(problem: &Problem) -> Vec<f64> {
    match problem.flux() {
        Flux::Porous { .. } => problem.conductance().to_vec(),
        Flux::PLaplacian { p } => {
            let grid = problem.grid();
            problem
                .conductance()
                .iter()
                .enumerate()
                .map(|(i, g)| {
                    let d = grid.center(i + 1) - grid.center(i);
                    g * d.powf(2.0 - p)
                })
                .collect()
        }
    }
}

struct System {
    residual: Vec<f64>,
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    norm: f64,
    floor: f64,
}

fn assemble(
    problem: &Problem,
    cond: &[f64],
    u_old: &[f64],
    u: &[f64],
    dt: f64,
    jacobian: bool,
) -> System {
    let n = u.len();
    let vol = problem.measure();
    let flux = problem.flux();
    let mut residual = vec![0.0; n];
    let mut scale = vec![0.0; n];
    let (mut lower, mut diag, mut upper) = if jacobian {
        (vec![0.0; n], vol[..n].to_vec(), vec![0.0; n])
    } else {
        (Vec::new(), Vec::new(), Vec::new())
    };
    for i in 0..n {
        residual[i] = vol[i] * (u[i] - u_old[i]);
        scale[i] = vol[i] * (u[i].abs() + u_old[i].abs());
    }
    for (j, &g) in cond.iter().enumerate().take(n - 1) {
        let (f, dl, dr) = face(flux, g, u[j], u[j + 1]);
        let df = dt * f;
        // R_j gets -dt F_(j+1/2); R_(j+1) gets +dt F_(j+1/2).
        residual[j] -= df;
        residual[j + 1] += df;
        scale[j] += df.abs();
        scale[j + 1] += df.abs();
        if jacobian {
            diag[j] -= dt * dl;
            upper[j] -= dt * dr;
            lower[j + 1] += dt * dl;
            diag[j + 1] += dt * dr;
        }
    }
    let norm = residual.iter().map(|r| r.abs()).sum();
    let floor = 64.0 * f64::EPSILON * scale.iter().sum::<f64>();
    System {
        residual,
        lower,
        diag,
        upper,
        norm,
        floor,
    }
}

/// Solves the tridiagonal system in place; `rhs` becomes the solution.
pub(crate) fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [f64]) -> bool {
    let n = rhs.len();
    let mut c = vec![0.0; n];
    let mut beta = diag[0];
    if beta == 0.0 || !beta.is_finite() {
        return false;
    }
    rhs[0] /= beta;
    for i in 1..n {
        c[i - 1] = upper[i - 1] / beta;
        beta = diag[i] - lower[i] * c[i - 1];
        if beta == 0.0 || !beta.is_finite() {
            return false;
        }
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= c[i] * rhs[i + 1];
    }
    true
}

/// Backward-Euler step by damped Newton; returns the new values and the iteration count.
pub fn implicit_step(
    problem: &Problem,
    u_old: &[f64],
    dt: f64,
    cfg: &NewtonConfig,
) -> Result<(Vec<f64>, usize)> {
    let cond = effective_conductance(problem);
    implicit_step_with(problem, &cond, u_old, dt, cfg)
}

pub(crate) fn implicit_step_with(
    problem: &Problem,
    cond: &[f64],
    u_old: &[f64],
    dt: f64,
    cfg: &NewtonConfig,
) -> Result<(Vec<f64>, usize)> {
    let mass: f64 = problem
        .measure()
        .iter()
        .zip(u_old)
        .map(|(v, u)| v * u.abs())
        .sum();
    let mut u = u_old.to_vec();
    let mut sys = assemble(problem, cond, u_old, &u, dt, true);
    for iter in 0..cfg.max_iterations {
        if sys.norm <= cfg.tol * mass + sys.floor {
            return Ok((u, iter));
        }
        let mut delta: Vec<f64> = sys.residual.iter().map(|r| -r).collect();
        if !thomas(&sys.lower, &sys.diag, &sys.upper, &mut delta) {
            break;
        }
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..12 {
            let trial: Vec<f64> = u
                .iter()
                .zip(&delta)
                .map(|(u, d)| (u + lambda * d).max(0.0))
                .collect();
            let trial_sys = assemble(problem, cond, u_old, &trial, dt, true);
            if trial_sys.norm.is_finite() && trial_sys.norm < (1.0 - 1e-4 * lambda) * sys.norm {
                accepted = Some((trial, trial_sys));
                break;
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((trial, trial_sys)) => {
                u = trial;
                sys = trial_sys;
            }
            None => {
                // No descent: either converged to rounding or stuck.
                if sys.norm <= 1e3 * (cfg.tol * mass + sys.floor) {
                    return Ok((u, iter + 1));
                }
                break;
            }
        }
    }
    if sys.norm <= cfg.tol * mass + sys.floor {
        return Ok((u, cfg.max_iterations));
    }
    Err(Error::NewtonDivergence {
        iterations: cfg.max_iterations,
        dt,
    })
}

/// Largest stable explicit step `min_i V_i / (Σ_faces G Φ' v')` at the current state.
pub fn explicit_dt_bound(problem: &Problem, u: &[f64]) -> f64 {
    let cond = effective_conductance(problem);
    explicit_dt_bound_with(problem, &cond, u)
}

pub(crate) fn explicit_dt_bound_with(problem: &Problem, cond: &[f64], u: &[f64]) -> f64 {
    let n = u.len();
    let flux = problem.flux();
    let mut rate = vec![0.0; n];
    for (j, &g) in cond.iter().enumerate().take(n - 1) {
        let (_, dl, dr) = face(flux, g, u[j], u[j + 1]);
        // Bound both sides' sensitivity; for Porous this is G m u^(m-1).
        let k = match flux {
            Flux::Porous { .. } => dl.abs().max(dr.abs()),
            Flux::PLaplacian { p } => {
                let gv = (u[j + 1] - u[j]).abs();
                g * (p - 1.0) * gv.powf(p - 2.0)
            }
        };
        rate[j] += k;
        rate[j + 1] += k;
    }
    problem
        .measure()
        .iter()
        .zip(&rate)
        .filter(|(_, r)| **r > 0.0)
        .map(|(v, r)| v / r)
        .fold(f64::INFINITY, f64::min)
}

/// Forward-Euler step; fails if `dt` exceeds `cfl` times the stability bound.
pub fn explicit_step(problem: &Problem, u_old: &[f64], dt: f64, cfl: f64) -> Result<Vec<f64>> {
    let cond = effective_conductance(problem);
    explicit_step_with(problem, &cond, u_old, dt, cfl)
}

pub(crate) fn explicit_step_with(
    problem: &Problem,
    cond: &[f64],
    u_old: &[f64],
    dt: f64,
    cfl: f64,
) -> Result<Vec<f64>> {
    let bound = cfl * explicit_dt_bound_with(problem, cond, u_old);
    if dt > bound {
        return Err(Error::CflViolation { dt, bound });
    }
    let n = u_old.len();
    let vol = problem.measure();
    let flux = problem.flux();
    let mut change = vec![0.0; n];
    for (j, &g) in cond.iter().enumerate().take(n - 1) {
        let (f, _, _) = face(flux, g, u_old[j], u_old[j + 1]);
        change[j] += f;
        change[j + 1] -= f;
    }
    Ok(u_old
        .iter()
        .zip(&change)
        .zip(vol)
        .map(|((u, c), v)| (u + dt * c / v).max(0.0))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ModelParams;
    use crate::solver::grid::Grid;
    use crate::solver::problem::ProblemKind;

    fn euclid() -> Problem {
        let p = ModelParams::porous(2.0, 3, 1.0).unwrap();
        Problem::build(ProblemKind::Euclidean, p, Grid::uniform(0.05, 2.0).unwrap()).unwrap()
    }

    #[test]
    fn thomas_solves_small_system() {
        let lower = [0.0, 1.0, 1.0];
        let diag = [4.0, 4.0, 4.0];
        let upper = [1.0, 1.0, 0.0];
        let mut rhs = [5.0, 6.0, 5.0];
        assert!(thomas(&lower, &diag, &upper, &mut rhs));
        for v in rhs {
            assert!((v - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn constant_state_is_steady() {
        let p = euclid();
        let u = vec![0.3; p.grid().len()];
        let (next, iters) = implicit_step(&p, &u, 0.1, &NewtonConfig::default()).unwrap();
        assert_eq!(iters, 0);
        assert_eq!(next, u);
        let e = explicit_step(&p, &u, 1e-4, 0.5).unwrap();
        assert_eq!(e, u);
    }

    #[test]
    fn implicit_step_conserves_mass_and_sign() {
        let p = euclid();
        let u: Vec<f64> = p
            .grid()
            .centers()
            .iter()
            .map(|x| (1.0 - x * x).max(0.0))
            .collect();
        let m0 = p.mass(&u);
        let (next, _) = implicit_step(&p, &u, 0.05, &NewtonConfig::default()).unwrap();
        assert!(next.iter().all(|v| *v >= 0.0));
        assert!(((p.mass(&next) - m0) / m0).abs() < 1e-12);
    }

    #[test]
    fn explicit_step_respects_cfl() {
        let p = euclid();
        let u: Vec<f64> = p
            .grid()
            .centers()
            .iter()
            .map(|x| (1.0 - x * x).max(0.0))
            .collect();
        let bound = explicit_dt_bound(&p, &u);
        assert!(matches!(
            explicit_step(&p, &u, 2.0 * bound, 0.9),
            Err(Error::CflViolation { .. })
        ));
        let next = explicit_step(&p, &u, 0.4 * bound, 0.9).unwrap();
        assert!(((p.mass(&next) - p.mass(&u)) / p.mass(&u)).abs() < 1e-13);
    }

    #[test]
    fn p_laplacian_step() {
        let params = ModelParams::p_laplacian(3.0, 3, 1.0).unwrap();
        let p = Problem::build(
            ProblemKind::PlapHyperbolic,
            params,
            Grid::uniform(0.02, 3.0).unwrap(),
        )
        .unwrap();
        let u: Vec<f64> = p
            .grid()
            .centers()
            .iter()
            .map(|x| (1.0 - x * x).max(0.0).powi(2))
            .collect();
        let m0 = p.mass(&u);
        let (next, iters) = implicit_step(&p, &u, 0.01, &NewtonConfig::default()).unwrap();
        assert!(iters > 0);
        assert!(((p.mass(&next) - m0) / m0).abs() < 1e-12);
        assert!(next[0] < u[0]);
    }
}
