//! Radial geometry of hyperbolic space with curvature −1.
//!
//! Besides the volume factor `(sinh r)^(n-1)`, this module implements the
//! change of radial variable `r ↦ s` defined by `ds / s^(n-1) = dr / (sinh r)^(n-1)`,
//! normalised so that `s ≈ r` at the origin. Integrating from infinity,
//!
//! ```text
//! s(r) = [ (n-2) ∫_r^∞ (sinh ρ)^(1-n) dρ ]^(-1/(n-2)),     n ≥ 3,
//! ```
//!
//! which turns the radial equation `∂ₜu = Δ_g u^m` into the Euclidean
//! equation with density `ρ(s) ∂ₜû = Δ_s û^m`.

use crate::error::{Error, Result};
use crate::interp::MonotoneCubic;
use crate::quadrature::{integrate, QuadConfig};

/// Split point between adaptive quadrature and the closed-form tail.
const TAIL_SPLIT: f64 = 10.0;
const TABLE_NODES: usize = 2048;
const TABLE_R_MIN: f64 = 1e-4;
const TABLE_R_MAX: f64 = 40.0;

/// Dimension of the hyperbolic space; the curvature is fixed at −1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpaceParams {
    n: u32,
}

impl SpaceParams {
    pub const CURVATURE: f64 = -1.0;

    pub fn new(n: u32) -> Result<Self> {
        if n < 2 {
            return Err(Error::Dimension {
                n,
                reason: "hyperbolic space needs n >= 2",
            });
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> u32 {
        self.n
    }
}

/// Surface area of the unit sphere `S^(n-1)` in `ℝⁿ`.
pub fn sphere_area(n: u32) -> f64 {
    use std::f64::consts::PI;
    // ω₁ = 2, ω₂ = 2π, ω_{k+2} = 2π ω_k / k
    let (mut k, mut w) = if n % 2 == 1 { (1, 2.0) } else { (2, 2.0 * PI) };
    while k < n {
        w *= 2.0 * PI / k as f64;
        k += 2;
    }
    w
}

/// `(sinh r)^(n-1)`, the radial density of the hyperbolic volume element.
pub fn volume_factor(r: f64, n: u32) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::Domain(format!("geodesic radius must be >= 0, got {r}")));
    }
    Ok(r.sinh().powi(n as i32 - 1))
}

fn require_map_dimension(n: u32) -> Result<()> {
    if n < 3 {
        return Err(Error::Dimension {
            n,
            reason: "the r <-> s map degenerates for n = 2",
        });
    }
    Ok(())
}

/// `∫_a^∞ (sinh ρ)^(1-n) dρ` for `a >= TAIL_SPLIT`, summed from the expansion
/// `(sinh ρ)^(1-n) = 2^(n-1) Σ_k C(n-2+k, k) e^{-(n-1+2k)ρ}`.
fn sinh_power_tail(a: f64, n: u32) -> f64 {
    let q = (n - 1) as f64;
    let mut coeff = 1.0; // C(n-2+k, k)
    let mut sum = 0.0;
    for k in 0..60 {
        let rate = q + 2.0 * k as f64;
        let term = coeff * (-rate * a).exp() / rate;
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
        coeff *= (n as f64 - 2.0 + k as f64 + 1.0) / (k as f64 + 1.0);
    }
    2f64.powi(n as i32 - 1) * sum
}

fn sinh_power_integrand(n: u32) -> impl Fn(f64) -> f64 {
    move |rho: f64| rho.sinh().powi(1 - n as i32)
}

/// `∫_a^b (sinh ρ)^(1-n) dρ` with geometric breakpoints so each panel is smooth.
fn sinh_power_integral(a: f64, b: f64, n: u32) -> f64 {
    let cfg = QuadConfig {
        rel_tol: 1e-14,
        ..QuadConfig::default()
    };
    let f = sinh_power_integrand(n);
    let mut lo = a;
    let mut sum = 0.0;
    while lo < b {
        let hi = (lo * 4.0).max(lo + 0.5).min(b);
        sum += integrate(&f, lo, hi, cfg).value;
        lo = hi;
    }
    sum
}

/// `∫_r^∞ (sinh ρ)^(1-n) dρ`.
fn sinh_power_from(r: f64, n: u32) -> f64 {
    if r >= TAIL_SPLIT {
        sinh_power_tail(r, n)
    } else {
        sinh_power_integral(r, TAIL_SPLIT, n) + sinh_power_tail(TAIL_SPLIT, n)
    }
}

fn s_from_integral(integral: f64, n: u32) -> f64 {
    let k = (n - 2) as f64;
    (k * integral).powf(-1.0 / k)
}

/// Constant of the far-field asymptote `s(r) ≈ c(n) e^((n-1) r / (n-2))`.
pub fn asymptote_constant(n: u32) -> f64 {
    let k = (n - 2) as f64;
    let q = (n - 1) as f64;
    (q / k).powf(1.0 / k) * 2f64.powf(-q / k)
}

/// `s(r)` by adaptive quadrature plus the analytic tail.
pub fn r_to_s(r: f64, n: u32) -> Result<f64> {
    require_map_dimension(n)?;
    if !(r > 0.0) {
        return Err(Error::Domain(format!("r must be positive, got {r}")));
    }
    Ok(s_from_integral(sinh_power_from(r, n), n))
}

/// `ds/dr = (s / sinh r)^(n-1)`.
pub fn ds_dr(r: f64, s: f64, n: u32) -> f64 {
    (s / r.sinh()).powi(n as i32 - 1)
}

fn newton_inverse<S: Fn(f64) -> f64>(s_of_r: S, s: f64, n: u32, mut r: f64) -> f64 {
    let target = s.ln();
    // Bracket maintained for a bisection fallback.
    let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
    for _ in 0..100 {
        let sr = s_of_r(r);
        let g = sr.ln() - target;
        if g.abs() <= 2e-16 {
            break;
        }
        if g > 0.0 {
            hi = hi.min(r);
        } else {
            lo = lo.max(r);
        }
        // d ln s / dr = s^(n-2) / (sinh r)^(n-1)
        let slope = ds_dr(r, sr, n) / sr;
        let mut next = r - g / slope;
        if !(next > lo && next < hi) {
            next = if hi.is_finite() { 0.5 * (lo + hi) } else { 2.0 * r.max(lo) + 1.0 };
        }
        let step = (next - r).abs();
        r = next;
        if step <= 1e-15 * r.max(1e-300) {
            break;
        }
    }
    r
}

/// Inverse map `r(s)` by safeguarded Newton iteration on `ln s(r)`.
pub fn s_to_r(s: f64, n: u32) -> Result<f64> {
    require_map_dimension(n)?;
    if !(s > 0.0) {
        return Err(Error::Domain(format!("s must be positive, got {s}")));
    }
    let guess = far_field_guess(s, n);
    Ok(newton_inverse(
        |r| s_from_integral(sinh_power_from(r, n), n),
        s,
        n,
        guess,
    ))
}

fn far_field_guess(s: f64, n: u32) -> f64 {
    if s < 1.0 {
        s
    } else {
        let k = (n - 2) as f64;
        let q = (n - 1) as f64;
        (k / q * (s / asymptote_constant(n)).ln()).max(0.5)
    }
}

fn rho_from(r: f64, s: f64, n: u32) -> f64 {
    (r.sinh() / s).powi(2 * (n as i32 - 1))
}

/// Density `ρ(s) = (sinh r / s)^(2(n-1))` of the weighted Euclidean problem.
pub fn weight_rho(s: f64, n: u32) -> Result<f64> {
    let r = s_to_r(s, n)?;
    Ok(rho_from(r, s, n))
}

/// Angular distortion `μ(s) = (sinh r / s)^(2(n-2))`; identically 1 for n = 2.
pub fn weight_mu(s: f64, n: u32) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::Domain(format!("s must be positive, got {s}")));
    }
    if n < 2 {
        return Err(Error::Dimension {
            n,
            reason: "hyperbolic space needs n >= 2",
        });
    }
    if n == 2 {
        return Ok(1.0);
    }
    let r = s_to_r(s, n)?;
    Ok((r.sinh() / s).powi(2 * (n as i32 - 2)))
}

/// Tabulated `r ↔ s` map for one dimension `n ≥ 3`.
///
/// The table (2048 log-spaced radii on `[1e-4, 40]`) stores the cumulative
/// integral, so evaluating `s(r)` only integrates from `r` to the next node.
/// A monotone cubic through `(ln s, ln r)` seeds the Newton inversion.
#[derive(Debug, Clone)]
pub struct CoordinateMap {
    n: u32,
    r: Vec<f64>,
    integral: Vec<f64>,
    s: Vec<f64>,
    inverse_seed: MonotoneCubic,
    far_rho_constant: f64,
}

impl CoordinateMap {
    pub fn new(n: u32) -> Result<Self> {
        require_map_dimension(n)?;
        let ratio = (TABLE_R_MAX / TABLE_R_MIN).ln() / (TABLE_NODES - 1) as f64;
        let r: Vec<f64> = (0..TABLE_NODES)
            .map(|i| TABLE_R_MIN * (ratio * i as f64).exp())
            .collect();
        let mut integral = vec![0.0; TABLE_NODES];
        let cfg = QuadConfig {
            rel_tol: 1e-15,
            ..QuadConfig::default()
        };
        let f = sinh_power_integrand(n);
        for i in (0..TABLE_NODES).rev() {
            integral[i] = if r[i] >= TAIL_SPLIT {
                sinh_power_tail(r[i], n)
            } else if r[i + 1] >= TAIL_SPLIT {
                integrate(&f, r[i], TAIL_SPLIT, cfg).value + sinh_power_tail(TAIL_SPLIT, n)
            } else {
                integral[i + 1] + integrate(&f, r[i], r[i + 1], cfg).value
            };
        }
        let s: Vec<f64> = integral.iter().map(|&v| s_from_integral(v, n)).collect();
        let inverse_seed = MonotoneCubic::new(
            s.iter().map(|v| v.ln()).collect(),
            r.iter().map(|v| v.ln()).collect(),
        );
        // lim s²ρ(s) = s^(-2(n-2)) (sinh r)^(2(n-1)), evaluated in logs at the table end.
        let r_end = TABLE_R_MAX;
        let s_end = s[TABLE_NODES - 1];
        let log_sinh = r_end - std::f64::consts::LN_2 + (-(-2.0 * r_end).exp()).ln_1p();
        let far_rho_constant = (2.0 * (n - 1) as f64 * log_sinh
            - 2.0 * (n - 2) as f64 * s_end.ln())
        .exp();
        Ok(Self {
            n,
            r,
            integral,
            s,
            inverse_seed,
            far_rho_constant,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Tabulated `(r_i, s_i)` pairs.
    pub fn table(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.r.iter().copied().zip(self.s.iter().copied())
    }

    fn integral_from(&self, r: f64) -> f64 {
        if r >= TAIL_SPLIT {
            return sinh_power_tail(r, self.n);
        }
        if r < TABLE_R_MIN {
            return sinh_power_integral(r, TABLE_R_MIN, self.n) + self.integral[0];
        }
        let k = self.r.partition_point(|&x| x <= r);
        let upper = self.r[k].min(TAIL_SPLIT);
        let cfg = QuadConfig {
            rel_tol: 1e-15,
            ..QuadConfig::default()
        };
        let piece = integrate(sinh_power_integrand(self.n), r, upper, cfg).value;
        let rest = if upper == TAIL_SPLIT {
            sinh_power_tail(TAIL_SPLIT, self.n)
        } else {
            self.integral[k]
        };
        rest + piece
    }

    /// `s(r)` for `r > 0`.
    pub fn s_of_r(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::Domain(format!("r must be positive, got {r}")));
        }
        Ok(s_from_integral(self.integral_from(r), self.n))
    }

    /// `r(s)` for `s > 0`; `|s(r(s)) - s| / s` is at rounding level.
    pub fn r_of_s(&self, s: f64) -> Result<f64> {
        if !(s > 0.0) {
            return Err(Error::Domain(format!("s must be positive, got {s}")));
        }
        let ls = s.ln();
        let guess = if s <= self.s[0] {
            s
        } else if s >= self.s[TABLE_NODES - 1] {
            far_field_guess(s, self.n)
        } else {
            self.inverse_seed.eval(ls).exp()
        };
        Ok(newton_inverse(
            |r| s_from_integral(self.integral_from(r), self.n),
            s,
            self.n,
            guess,
        ))
    }

    /// `ρ(s)`.
    pub fn rho(&self, s: f64) -> Result<f64> {
        let r = self.r_of_s(s)?;
        Ok(rho_from(r, s, self.n))
    }

    /// `μ(s)`.
    pub fn mu(&self, s: f64) -> Result<f64> {
        let r = self.r_of_s(s)?;
        Ok((r.sinh() / s).powi(2 * (self.n as i32 - 2)))
    }

    /// `c₁(n) = lim_{s→∞} s² ρ(s)`, computed at the end of the table.
    pub fn far_rho_constant(&self) -> f64 {
        self.far_rho_constant
    }
}
