use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadConfig};

/// Heat kernel of `ℍ²` or `ℍ³` at geodesic distance `r`.
pub fn heat_kernel(r: f64, t: f64, n: u32) -> Result<f64> {
    if r < 0.0 || !(t > 0.0) {
        return Err(Error::Domain(format!(
            "heat kernel needs r >= 0 and t > 0 (got r={r}, t={t})"
        )));
    }
    match n {
        3 => Ok(kernel3(r, t)),
        2 => Ok(kernel2(r, t)),
        _ => Err(Error::Dimension {
            n,
            reason: "heat kernels are provided for n = 2 and n = 3 only",
        }),
    }
}

fn kernel3(r: f64, t: f64) -> f64 {
    let ratio = if r < 1e-8 { 1.0 } else { r / r.sinh() };
    (4.0 * PI * t).powf(-1.5) * ratio * (-t - r * r / (4.0 * t)).exp()
}

/// `√2 (4πt)^(-3/2) e^(-t/4) ∫_r^∞ s e^(-s²/4t) (cosh s - cosh r)^(-1/2) ds`.
///
/// With `s = r + v²` and `cosh s - cosh r = 2 sinh((s+r)/2) sinh(v²/2)` the
/// integrand is smooth at `v = 0` for every `r ≥ 0`.
fn kernel2(r: f64, t: f64) -> f64 {
    // Cut where the Gaussian factor relative to s = r has dropped below e^-45.
    let span = {
        let mut d: f64 = 1.0;
        while (d * (2.0 * r + d)) / (4.0 * t) + 0.5 * d < 45.0 {
            d *= 2.0;
        }
        d
    };
    let integrand = |v: f64| {
        let v2 = v * v;
        let s = r + v2;
        let half_sinh_ratio = if v2 < 1e-6 {
            0.5 + v2 * v2 / 48.0
        } else {
            (0.5 * v2).sinh() / v2
        };
        let denom = (2.0 * (0.5 * (s + r)).sinh() * half_sinh_ratio).sqrt();
        // ds = 2v dv and √(sinh(v²/2)) = v √(sinh(v²/2)/v²).
        2.0 * s * (-(v2 * (2.0 * r + v2)) / (4.0 * t)).exp() / denom
    };
    let cfg = QuadConfig {
        rel_tol: 1e-12,
        ..QuadConfig::default()
    };
    let integral = integrate(integrand, 0.0, span.sqrt(), cfg).value;
    2f64.sqrt() * (4.0 * PI * t).powf(-1.5) * (-0.25 * t - r * r / (4.0 * t)).exp() * integral
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numdiff::central4_first;
    use crate::numdiff::central4_second;
    use crate::quadrature::integrate_to_infinity;

    #[test]
    fn h3_value_at_origin() {
        let v = heat_kernel(0.0, 1.0, 3).unwrap();
        assert!((v - (4.0 * PI).powf(-1.5) * (-1.0f64).exp()).abs() < 1e-17);
        assert!((v - 8.2587e-3).abs() < 1e-6);
    }

    #[test]
    fn h3_mass_is_one() {
        for t in [0.5, 2.0] {
            let mass = integrate(
                |r| heat_kernel(r, t, 3).unwrap() * 4.0 * PI * r.sinh().powi(2),
                0.0,
                40.0,
                QuadConfig::default(),
            )
            .value;
            assert!((mass - 1.0).abs() < 1e-6, "t={t} mass={mass}");
        }
    }

    #[test]
    fn h3_solves_heat_equation() {
        for &(r, t) in &[(0.5, 0.4), (1.3, 1.0), (3.0, 2.5), (0.05, 0.2)] {
            let h = 1e-3;
            let ut = central4_first(|s| heat_kernel(r, s, 3).unwrap(), t, h);
            let ur = central4_first(|x| heat_kernel(x, t, 3).unwrap(), r, h);
            let urr = central4_second(|x| heat_kernel(x, t, 3).unwrap(), r, h);
            let res = ut - (urr + 2.0 / r.tanh() * ur);
            assert!(res.abs() < 1e-6, "r={r} t={t} res={res}");
        }
    }

    #[test]
    fn h2_direct_quadrature_agrees() {
        // Independent evaluation with s = r cosh w, which also removes the singularity.
        let direct = |r: f64, t: f64| {
            let f = |w: f64| {
                let s = r * w.cosh();
                let diff = 2.0 * (0.5 * (s + r)).sinh() * (0.5 * (s - r)).sinh();
                if diff <= 0.0 {
                    return (2.0 * r / r.sinh()).sqrt() * r * (-r * r / (4.0 * t)).exp();
                }
                s * (-s * s / (4.0 * t)).exp() * r * w.sinh() / diff.sqrt()
            };
            let i = integrate_to_infinity(
                |w| if w > 20.0 { 0.0 } else { f(w) },
                0.0,
                QuadConfig::default(),
            )
            .value;
            2f64.sqrt() * (4.0 * PI * t).powf(-1.5) * (-0.25 * t).exp() * i
        };
        for &(r, t) in &[(0.7, 1.0), (2.0, 0.5), (1.5, 3.0)] {
            let a = heat_kernel(r, t, 2).unwrap();
            let b = direct(r, t);
            assert!((a - b).abs() < 1e-9 * a, "r={r} t={t}: {a} vs {b}");
        }
    }

    #[test]
    fn h2_positive_with_unit_mass() {
        for t in [0.5, 2.0] {
            let mass = integrate(
                |r| heat_kernel(r, t, 2).unwrap() * 2.0 * PI * r.sinh(),
                0.0,
                40.0,
                QuadConfig {
                    rel_tol: 1e-9,
                    ..QuadConfig::default()
                },
            )
            .value;
            assert!((mass - 1.0).abs() < 1e-4, "t={t} mass={mass}");
        }
        for r in [0.0, 0.01, 1.0, 5.0] {
            assert!(heat_kernel(r, 1.0, 2).unwrap() > 0.0);
        }
    }

    #[test]
    fn other_dimensions_rejected() {
        assert!(heat_kernel(1.0, 1.0, 4).is_err());
        assert!(heat_kernel(-1.0, 1.0, 3).is_err());
    }
}
