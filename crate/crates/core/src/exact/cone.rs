//! Log-conical solutions: the half-space wave, the approximate-equation cone,
//! its p-Laplacian analogue, and the singular-weight family.

use crate::error::{Error, Result};
use crate::geometry::sphere_area;
use crate::params::ModelParams;
use crate::quadrature::{integrate, integrate_to_infinity, QuadConfig};

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("time must be positive (got {t})")))
    }
}

fn positive_power(base: f64, exponent: f64) -> f64 {
    if base <= 0.0 {
        0.0
    } else {
        base.powf(exponent)
    }
}

/// Half-space wave: `U^(m-1) = a (log(c t^γ y))₊ / t`.
pub fn gtw(y: f64, t: f64, params: &ModelParams, c: f64) -> Result<f64> {
    check_time(t)?;
    let m = params.require_m()?;
    if !(c > 0.0) {
        return Err(Error::Parameter {
            name: "c",
            reason: format!("wave constant must be positive (got {c})"),
        });
    }
    if y <= 0.0 {
        return Ok(0.0);
    }
    let zeta = c.ln() + params.front_rate() * t.ln() + y.ln();
    Ok(positive_power(params.cone_slope() * zeta / t, 1.0 / (m - 1.0)))
}

/// Log-conical approximate solution `t^(-1/(m-1)) (a(γ log t + b - r))₊^(1/(m-1))`.
pub fn log_cone(r: f64, t: f64, params: &ModelParams, b: f64) -> Result<f64> {
    check_time(t)?;
    let m = params.require_m()?;
    let xi = params.front_rate() * t.ln() + b - r;
    Ok(positive_power(params.cone_slope() * xi / t, 1.0 / (m - 1.0)))
}

/// p-Laplacian cone `a t^(-1/(p-2)) (γ log t - r + b)₊^((p-1)/(p-2))`.
pub fn plap_cone(r: f64, t: f64, params: &ModelParams, b: f64) -> Result<f64> {
    check_time(t)?;
    let p = params.p().ok_or(Error::Parameter {
        name: "p",
        reason: "a p-Laplacian exponent is required".into(),
    })?;
    let xi = params.front_rate() * t.ln() + b - r;
    Ok(params.cone_slope()
        * t.powf(-1.0 / (p - 2.0))
        * positive_power(xi, (p - 1.0) / (p - 2.0)))
}

/// Singular-weight family `[log(A t^β / s) / (m(n-2)t)]₊^(1/(m-1))`.
pub fn singular_barenblatt(s: f64, t: f64, params: &ModelParams, a: f64) -> Result<f64> {
    check_time(t)?;
    let m = params.require_m()?;
    let beta = params.weighted_beta()?;
    if !(a > 0.0) {
        return Err(Error::Parameter {
            name: "A",
            reason: format!("constant must be positive (got {a})"),
        });
    }
    if s <= 0.0 {
        return Ok(f64::INFINITY);
    }
    let nm2 = (params.n - 2) as f64;
    let arg = (a.ln() + beta * t.ln() - s.ln()) / (m * nm2 * t);
    Ok(positive_power(arg, 1.0 / (m - 1.0)))
}

/// Energy `|S^(n-1)| ∫ Û_A(s, t) s^(n-3) ds`, by quadrature at `t = 1`.
///
/// The integral is time independent; with `s = A e^(-w)` it becomes a
/// smooth integral over `w ∈ [0, ∞)`.
pub fn singular_barenblatt_energy(params: &ModelParams, a: f64) -> Result<f64> {
    let nm2 = params.n as i32 - 2;
    singular_barenblatt(1.0, 1.0, params, a)?;
    let integrand = |w: f64| {
        let s = a * (-w).exp();
        if s <= 0.0 {
            return 0.0;
        }
        singular_barenblatt(s, 1.0, params, a).unwrap_or(0.0) * s.powi(nm2)
    };
    let value = integrate_to_infinity(integrand, 0.0, QuadConfig::default()).value;
    Ok(sphere_area(params.n) * value)
}

/// `∫₀^∞ ξ^(1/(m-1)) e^(-(n-1)ξ) dξ`, by quadrature.
pub fn log_cone_profile_integral(params: &ModelParams) -> Result<f64> {
    let m = params.require_m()?;
    let alpha = 1.0 / (m - 1.0);
    let nm1 = (params.n - 1) as f64;
    Ok(integrate_to_infinity(
        |xi: f64| xi.powf(alpha) * (-nm1 * xi).exp(),
        0.0,
        QuadConfig::default(),
    )
    .value)
}

fn mass_prefactor(params: &ModelParams) -> Result<f64> {
    let m = params.require_m()?;
    Ok(sphere_area(params.n)
        * 2f64.powi(1 - params.n as i32)
        * params.cone_slope().powf(1.0 / (m - 1.0)))
}

/// Limit mass `K(n,m) e^(b(n-1))` of the log-cone as `t → ∞`.
pub fn log_cone_mass(params: &ModelParams, b: f64) -> Result<f64> {
    let k = mass_prefactor(params)? * log_cone_profile_integral(params)?;
    Ok(k * (b * (params.n - 1) as f64).exp())
}

/// The far-field mass integral truncated at `ξ = γ log t + b`.
pub fn log_cone_mass_horizon(params: &ModelParams, b: f64, t: f64) -> Result<f64> {
    check_time(t)?;
    let m = params.require_m()?;
    let alpha = 1.0 / (m - 1.0);
    let nm1 = (params.n - 1) as f64;
    let top = params.front_rate() * t.ln() + b;
    if top <= 0.0 {
        return Ok(0.0);
    }
    let i = integrate(
        |xi: f64| xi.powf(alpha) * (-nm1 * xi).exp(),
        0.0,
        top,
        QuadConfig::default(),
    )
    .value;
    Ok(mass_prefactor(params)? * (b * nm1).exp() * i)
}

/// Hyperbolic mass `|S^(n-1)| ∫ Ũ(r,t) (sinh r)^(n-1) dr` of the log-cone at time `t`.
pub fn log_cone_mass_exact(params: &ModelParams, b: f64, t: f64) -> Result<f64> {
    check_time(t)?;
    let edge = params.front_rate() * t.ln() + b;
    if edge <= 0.0 {
        return Ok(0.0);
    }
    let nm1 = params.n as i32 - 1;
    let i = integrate(
        |r: f64| log_cone(r, t, params, b).unwrap_or(0.0) * r.sinh().powi(nm1),
        0.0,
        edge,
        QuadConfig::default(),
    )
    .value;
    Ok(sphere_area(params.n) * i)
}

/// Offset `b` whose log-cone carries limit mass `params.mass`.
pub fn log_cone_offset_for_mass(params: &ModelParams) -> Result<f64> {
    let k = log_cone_mass(params, 0.0)?;
    Ok((params.mass / k).ln() / (params.n - 1) as f64)
}

/// Offset after rescaling the mass by `factor`: `b + γ(m-1) log factor`.
pub fn rescaled_offset(params: &ModelParams, b: f64, factor: f64) -> f64 {
    let m = params.m().unwrap_or(2.0);
    b + params.front_rate() * (m - 1.0) * factor.ln()
}
