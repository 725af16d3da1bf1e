//! Pointwise PDE residuals of evaluators, by Ridders extrapolation.
//!
//! Each function takes the half-width of a neighbourhood on which the
//! evaluator is smooth; steps never leave it, so kinks at free boundaries
//! do not pollute the differences.

use crate::numdiff::{ridders_first, ridders_second};
use crate::params::ModelParams;

/// `∂ₜu - Δ_g u^m` for a radial function on `ℍⁿ` (`m = 1` gives the heat equation).
///
/// `dr` and `dt` bound the admissible steps in `r` and `t`.
pub fn radial_residual<F>(u: F, m: f64, n: u32, r: f64, t: f64, dr: f64, dt: f64) -> f64
where
    F: Fn(f64, f64) -> f64,
{
    let v = |x: f64| u(x, t).powf(m);
    let h = dr.min(0.5 * r);
    let v1 = ridders_first(v, r, h).value;
    let v2 = ridders_second(v, r, h).value;
    let ut = ridders_first(|s| u(r, s), t, dt.min(0.5 * t)).value;
    ut - (v2 + (n - 1) as f64 / r.tanh() * v1)
}

/// `∂ₜu - Δ u^m` for `u(y, t)` on the half-space model, independent of the
/// horizontal coordinates.
///
/// Derivatives are taken in `η = log y` and `τ = log t`, where
/// `Δ = ∂_ηη - (n-1)∂_η`. `deta` and `dtau` bound the steps.
pub fn halfspace_residual<F>(u: F, m: f64, n: u32, y: f64, t: f64, deta: f64, dtau: f64) -> f64
where
    F: Fn(f64, f64) -> f64,
{
    let eta = y.ln();
    let tau = t.ln();
    let g = |e: f64| u(e.exp(), t).powf(m);
    let g1 = ridders_first(g, eta, deta).value;
    let g2 = ridders_second(g, eta, deta).value;
    let ut = ridders_first(|s: f64| u(y, s.exp()), tau, dtau).value / t;
    ut - (g2 - (n - 1) as f64 * g1)
}

/// Residual of the p-Laplacian profile equation
/// `-F/(p-2) + γF' - (|F'|^(p-2)F')' + (n-1)|F'|^(p-2)F'` at `ξ > 0`.
pub fn plap_profile_residual<F>(profile: F, params: &ModelParams, xi: f64, dxi: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    let p = params.p().unwrap_or(f64::NAN);
    let gamma = params.front_rate();
    let h = dxi.min(0.5 * xi);
    let flux = |x: f64| {
        let d = ridders_first(&profile, x, 0.25 * h).value;
        d.abs().powf(p - 2.0) * d
    };
    let f1 = ridders_first(&profile, xi, h).value;
    let flux_here = f1.abs().powf(p - 2.0) * f1;
    let dflux = ridders_first(flux, xi, 0.5 * h).value;
    -profile(xi) / (p - 2.0) + gamma * f1 - dflux + (params.n - 1) as f64 * flux_here
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{gtw, log_cone};

    #[test]
    fn gtw_is_exact_in_its_positivity_set() {
        for (m, n) in [(2.0, 2), (2.0, 3), (3.0, 2), (3.0, 3)] {
            let params = ModelParams::porous(m, n, 1.0).unwrap();
            let gamma = params.front_rate();
            for &(c, t, zeta) in &[(1.0f64, 1.0, 0.5), (0.5, 20.0, 0.02), (2.0, 80.0, 3.0)] {
                // Height at log-distance zeta inside the front.
                let y = (zeta - c.ln() - gamma * f64::ln(t)).exp();
                let u = |y: f64, t: f64| gtw(y, t, &params, c).unwrap();
                let res = halfspace_residual(u, m, n, y, t, 0.5 * zeta, 0.5 * zeta / gamma);
                assert!(res.abs() < 1e-8, "m={m} n={n} zeta={zeta}: {res}");
            }
        }
    }

    #[test]
    fn log_cone_residual_is_the_coth_defect() {
        let params = ModelParams::porous(2.0, 3, 1.0).unwrap();
        let (b, t) = (0.2, 30.0f64);
        let u = |r: f64, t: f64| log_cone(r, t, &params, b).unwrap();
        let edge = 0.5 * t.ln() + b;
        for r in [0.1, 0.5, 1.0, 1.5] {
            let d = edge - r;
            let res = radial_residual(u, 2.0, 3, r, t, 0.5 * d, 0.5 * d * t);
            // (n-1)(coth r - 1)|(Ũ^m)'|, with (Ũ²)' = -2a² (edge - r) / t².
            let expect = 2.0 * (1.0 / r.tanh() - 1.0) * 2.0 * 0.0625 * d / (t * t);
            assert!((res - expect).abs() < 1e-10, "r={r}: {res} vs {expect}");
        }
    }
}
