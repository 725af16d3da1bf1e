use crate::error::{Error, Result};
use crate::geometry::sphere_area;
use crate::params::ModelParams;
use crate::quadrature::{integrate, QuadConfig};

/// Euclidean Barenblatt solution `t^(-nβ) (C - k ξ²)₊^(1/(m-1))`, `ξ = r t^(-β)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Barenblatt {
    m: f64,
    n: u32,
    beta: f64,
    k: f64,
    c: f64,
}

impl Barenblatt {
    /// Calibrates `C` so that the mass over `ℝⁿ` equals `params.mass`.
    pub fn new(params: &ModelParams) -> Result<Self> {
        let m = params.require_m()?;
        let n = params.n;
        let beta = params.barenblatt_beta()?;
        let k = params.barenblatt_k()?;
        let alpha = 1.0 / (m - 1.0);
        let nf = n as f64;
        // Mass of the profile with C = 1: |S^(n-1)| k^(-n/2) ∫₀¹ (1-σ²)^α σ^(n-1) dσ.
        let shape = integrate(
            |s: f64| (1.0 - s * s).max(0.0).powf(alpha) * s.powi(n as i32 - 1),
            0.0,
            1.0,
            QuadConfig::default(),
        )
        .value;
        let unit = sphere_area(n) * k.powf(-0.5 * nf) * shape;
        let c = (params.mass / unit).powf(1.0 / (alpha + 0.5 * nf));
        Ok(Self { m, n, beta, k, c })
    }

    /// Uses a given profile constant instead of calibrating from a mass.
    pub fn with_constant(params: &ModelParams, c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::Parameter {
                name: "C",
                reason: format!("Barenblatt constant must be positive (got {c})"),
            });
        }
        let mut b = Self::new(params)?;
        b.c = c;
        Ok(b)
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn profile_constant(&self) -> f64 {
        self.c
    }

    /// `r₀ = √(C/k)`; the support at time `t` is `r ≤ r₀ t^β`.
    pub fn r0(&self) -> f64 {
        (self.c / self.k).sqrt()
    }

    pub fn support_radius(&self, t: f64) -> f64 {
        self.r0() * t.powf(self.beta)
    }

    pub fn profile(&self, xi: f64) -> f64 {
        let base = self.c - self.k * xi * xi;
        if base <= 0.0 {
            0.0
        } else {
            base.powf(1.0 / (self.m - 1.0))
        }
    }

    pub fn eval(&self, r: f64, t: f64) -> f64 {
        t.powf(-(self.n as f64) * self.beta) * self.profile(r * t.powf(-self.beta))
    }
}
