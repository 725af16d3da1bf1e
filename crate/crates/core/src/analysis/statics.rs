//! Exactness checks of the closed-form catalog, sampled with a fixed seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::exact::residual::{halfspace_residual, plap_profile_residual, radial_residual};
use crate::exact::{gtw, heat_kernel, log_cone, Subsolution};
use crate::geometry::{sphere_area, CoordinateMap};
use crate::params::ModelParams;
use crate::quadrature::{integrate, QuadConfig};

const EXPONENT_PAIRS: [(f64, u32); 4] = [(2.0, 2), (2.0, 3), (3.0, 2), (3.0, 3)];

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

/// Largest `|∂ₜU - ΔU^m|` of the half-space wave over `samples` points per
/// `(m, n) ∈ {2,3}²`, each at least `1e-2` inside the front in `log y`.
///
/// Initial difference steps are capped at 0.1 in `log y` and `log t`.
pub fn gtw_exactness(samples: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for (m, n) in EXPONENT_PAIRS {
        let params = ModelParams::porous(m, n, 1.0)?;
        let gamma = params.front_rate();
        for _ in 0..samples {
            let c = log_uniform(&mut rng, 0.2, 5.0);
            let t = log_uniform(&mut rng, 0.5, 1e3);
            let zeta = rng.random_range(1e-2..3.0);
            let y = (zeta - c.ln() - gamma * t.ln()).exp();
            let u = |y: f64, t: f64| gtw(y, t, &params, c).unwrap_or(f64::NAN);
            let step = (0.5 * zeta).min(0.1);
            let res = halfspace_residual(u, m, n, y, t, step, step / gamma);
            worst = worst.max(res.abs());
        }
    }
    Ok(worst)
}

/// Smallest `∂ₜŨ - Δ_g Ũ^m` of the log-cone on `ℍⁿ` over the same parameter
/// pairs, at least `1e-2` inside the support and away from the origin.
pub fn log_cone_supersolution(samples: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    for (m, n) in EXPONENT_PAIRS {
        let params = ModelParams::porous(m, n, 1.0)?;
        let gamma = params.front_rate();
        for _ in 0..samples {
            let b = rng.random_range(-0.5..1.5);
            let t = log_uniform(&mut rng, 20.0, 1e5);
            let edge = gamma * t.ln() + b;
            let r = rng.random_range(1e-2..edge - 1e-2);
            let d = edge - r;
            let u = |r: f64, t: f64| log_cone(r, t, &params, b).unwrap_or(f64::NAN);
            let dt = t * (1.0 - (-0.5 * d / gamma).exp()).min(0.1);
            let res = radial_residual(u, m, n, r, t, (0.5 * d).min(0.1), dt);
            worst = worst.min(res);
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapAccuracy {
    /// `max |s(r) - (e^(2r) - 1)/2| / s` on the sampled range.
    pub closed_form: f64,
    /// `max |r(s(r)) - r|`.
    pub round_trip: f64,
}

/// The `n = 3` map against its closed form on `r ∈ [lo, hi]`, log-spaced plus random samples.
pub fn coordinate_map_accuracy(lo: f64, hi: f64, samples: usize, seed: u64) -> Result<MapAccuracy> {
    let map = CoordinateMap::new(3)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rs: Vec<f64> = (0..samples)
        .map(|k| lo * (hi / lo).powf(k as f64 / (samples - 1) as f64))
        .collect();
    rs.extend((0..samples).map(|_| log_uniform(&mut rng, lo, hi)));
    let mut acc = MapAccuracy {
        closed_form: 0.0,
        round_trip: 0.0,
    };
    for r in rs {
        let s = map.s_of_r(r)?;
        let exact = 0.5 * (2.0 * r).exp_m1();
        acc.closed_form = acc.closed_form.max(((s - exact) / exact).abs());
        acc.round_trip = acc.round_trip.max((map.r_of_s(s)? - r).abs());
    }
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatKernelChecks {
    /// `(t, mass)` for `n = 3`.
    pub mass3: Vec<(f64, f64)>,
    pub residual3: f64,
    /// `(t, mass)` for `n = 2`.
    pub mass2: Vec<(f64, f64)>,
    pub min2: f64,
}

fn kernel_mass(n: u32, t: f64) -> Result<f64> {
    let omega = sphere_area(n);
    let cfg = QuadConfig {
        rel_tol: 1e-10,
        ..QuadConfig::default()
    };
    let err = std::cell::RefCell::new(None);
    let v = integrate(
        |r| match heat_kernel(r, t, n) {
            Ok(u) => u * omega * r.sinh().powi(n as i32 - 1),
            Err(e) => {
                err.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        0.0,
        40.0,
        cfg,
    )
    .value;
    match err.into_inner() {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

pub fn heat_kernel_checks(times: &[f64]) -> Result<HeatKernelChecks> {
    let mut out = HeatKernelChecks {
        mass3: Vec::new(),
        residual3: 0.0,
        mass2: Vec::new(),
        min2: f64::INFINITY,
    };
    for &t in times {
        out.mass3.push((t, kernel_mass(3, t)?));
        out.mass2.push((t, kernel_mass(2, t)?));
    }
    for &(r, t) in &[(0.05, 0.2), (0.5, 0.4), (1.3, 1.0), (3.0, 2.5), (6.0, 4.0)] {
        let h = 1e-3;
        let u = |x: f64, s: f64| heat_kernel(x, s, 3).unwrap_or(f64::NAN);
        let ut = crate::numdiff::central4_first(|s| u(r, s), t, h);
        let ur = crate::numdiff::central4_first(|x| u(x, t), r, h);
        let urr = crate::numdiff::central4_second(|x| u(x, t), r, h);
        out.residual3 = out.residual3.max((ut - urr - 2.0 / r.tanh() * ur).abs());
    }
    for r in [0.0, 1e-3, 0.1, 1.0, 3.0, 8.0] {
        for &t in times {
            out.min2 = out.min2.min(heat_kernel(r, t, 2)?);
        }
    }
    Ok(out)
}

/// Largest residual of the p-Laplacian cone profile `a ξ^((p-1)/(p-2))` over
/// `p ∈ {3, 4}`, `n ∈ {2, 3}`, sampled on `ξ ∈ [1e-2, 5]`.
pub fn plap_profile_exactness(samples: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for p in [3.0, 4.0] {
        for n in [2, 3] {
            let params = ModelParams::p_laplacian(p, n, 1.0)?;
            let a = params.cone_slope();
            let profile = |x: f64| a * x.max(0.0).powf((p - 1.0) / (p - 2.0));
            for _ in 0..samples {
                let xi = rng.random_range(1e-2..5.0);
                let res = plap_profile_residual(profile, &params, xi, 0.5 * xi);
                worst = worst.max(res.abs());
            }
        }
    }
    Ok(worst)
}

/// Sufficient inner margin of the matched subsolution at time `t`.
pub fn subsolution_margin(m: f64, n: u32, t: f64) -> Result<f64> {
    let params = ModelParams::porous(m, n, 1.0)?;
    Ok(Subsolution::new(&params)?.report(t, 200)?.sufficient_margin)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gtw_and_cone_samples() {
        assert!(gtw_exactness(50, 1).unwrap() < 1e-8);
        assert!(log_cone_supersolution(50, 1).unwrap() >= -1e-10);
    }

    #[test]
    fn map_against_closed_form() {
        let acc = coordinate_map_accuracy(1e-2, 15.0, 40, 3).unwrap();
        assert!(acc.closed_form < 1e-8, "{acc:?}");
        assert!(acc.round_trip < 1e-10, "{acc:?}");
    }

    #[test]
    fn kernels() {
        let h = heat_kernel_checks(&[0.5, 2.0]).unwrap();
        assert!(h.mass3.iter().all(|(_, m)| (m - 1.0).abs() < 1e-6));
        assert!(h.mass2.iter().all(|(_, m)| (m - 1.0).abs() < 1e-4));
        assert!(h.residual3 < 1e-6);
        assert!(h.min2 > 0.0);
    }

    #[test]
    fn plap_profile() {
        assert!(plap_profile_exactness(20, 5).unwrap() < 1e-8);
    }

    #[test]
    fn deterministic_sampling() {
        assert_eq!(gtw_exactness(10, 9).unwrap(), gtw_exactness(10, 9).unwrap());
    }
}
