use crate::error::{Error, Result};
use crate::exact::residual::radial_residual;
use crate::params::ModelParams;

/// Matched subsolution: an outer cone `t^(-1/(m-1)) (a(γ log t - r) + b)₊^(1/(m-1))`
/// on `r ≥ 1` joined at `r = 1` to an inner cap `U^m = C₁(t) - C₂(t) r²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Subsolution {
    m: f64,
    n: u32,
    a: f64,
    gamma: f64,
    b: f64,
}

/// Inner/outer data at the junction `r = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matching {
    /// Outer value at `r = 1`.
    pub value: f64,
    /// `-∂ᵣU` of the outer form at `r = 1`.
    pub slope: f64,
    pub c1: f64,
    pub c2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubsolutionReport {
    pub t: f64,
    pub matching: Matching,
    /// `|outer^m - (C₁ - C₂)|` at `r = 1`.
    pub continuity_gap: f64,
    /// `|∂ᵣ outer^m + 2C₂|` at `r = 1`.
    pub slope_gap: f64,
    /// Largest `LHS - RHS` of the reduced outer inequality over the `ξ` samples.
    pub outer_inequality: f64,
    /// Largest `∂ₜU - Δ_g U^m` over outer samples; a subsolution has it `≤ 0`.
    pub outer_residual: f64,
    /// Largest `∂ₜU - Δ_g U^m` over inner samples `r ∈ (0, 1)`.
    pub inner_residual: f64,
    /// `Kγ log t / t - A^(m-1)`; positive when the sufficient inner condition holds.
    pub sufficient_margin: f64,
}

/// `coth 1`, the bound for `coth r` on `r ≥ 1`.
pub fn coth_bound() -> f64 {
    1.0 / 1f64.tanh()
}

impl Subsolution {
    /// Largest outer slope `1/(k m (n-1))`, `k = coth 1`.
    pub fn slope_bound(m: f64, n: u32) -> f64 {
        1.0 / (coth_bound() * m * (n - 1) as f64)
    }

    /// `K = 1/(2 m K₁)` with `K₁ = 2n - 1`.
    pub fn inner_constant(m: f64, n: u32) -> f64 {
        1.0 / (2.0 * m * (2 * n - 1) as f64)
    }

    /// Default coefficients: `a = min(slope bound, K)`, `γ = m a/(m-1)`, `b = a/2`.
    ///
    /// With `a = K` the sufficient inner condition has margin `(K - b)/t`, and
    /// `b = a/2` makes the junction feasible once `γ log t > 1/2`.
    pub fn new(params: &ModelParams) -> Result<Self> {
        let m = params.require_m()?;
        let a = Self::slope_bound(m, params.n).min(Self::inner_constant(m, params.n));
        Self::with_coefficients(params, a, m * a / (m - 1.0), 0.5 * a)
    }

    pub fn with_coefficients(params: &ModelParams, a: f64, gamma: f64, b: f64) -> Result<Self> {
        let m = params.require_m()?;
        if !(a > 0.0) || !(gamma > 0.0) || b < 0.0 {
            return Err(Error::Parameter {
                name: "subsolution",
                reason: format!("need a > 0, γ > 0, b >= 0 (got a={a}, γ={gamma}, b={b})"),
            });
        }
        Ok(Self {
            m,
            n: params.n,
            a,
            gamma,
            b,
        })
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    fn outer_base(&self, r: f64, t: f64) -> f64 {
        self.a * (self.gamma * t.ln() - r) + self.b
    }

    fn outer(&self, r: f64, t: f64) -> f64 {
        let base = self.outer_base(r, t);
        if base <= 0.0 {
            0.0
        } else {
            (base / t).powf(1.0 / (self.m - 1.0))
        }
    }

    pub fn support_edge(&self, t: f64) -> f64 {
        (self.gamma * t.ln() + self.b / self.a).max(0.0)
    }

    /// Solves `C₁ - C₂ = A^m`, `2C₂ = m A^(m-1) B` at time `t`.
    pub fn matching(&self, t: f64) -> Result<Matching> {
        let base = self.outer_base(1.0, t);
        if !(base > 0.0) {
            return Err(Error::MatchingInfeasible { t });
        }
        let m = self.m;
        let alpha = 1.0 / (m - 1.0);
        let value = (base / t).powf(alpha);
        let slope = self.a / (m - 1.0) * t.powf(-alpha) * base.powf(alpha - 1.0);
        let c2 = 0.5 * m * value.powf(m - 1.0) * slope;
        let c1 = value.powf(m) + c2;
        Ok(Matching {
            value,
            slope,
            c1,
            c2,
        })
    }

    pub fn eval(&self, r: f64, t: f64) -> f64 {
        if r >= 1.0 {
            return self.outer(r, t);
        }
        match self.matching(t) {
            Ok(mt) => (mt.c1 - mt.c2 * r * r).max(0.0).powf(1.0 / self.m),
            Err(_) => 0.0,
        }
    }

    /// Checks both differential inequalities on `samples` points per region.
    pub fn report(&self, t: f64, samples: usize) -> Result<SubsolutionReport> {
        let mt = self.matching(t)?;
        let m = self.m;
        let n = self.n;
        let k = coth_bound();
        let nm1 = (n - 1) as f64;

        let outer_m = |r: f64| self.outer(r, t).powf(m);
        let continuity_gap = (outer_m(1.0) - (mt.c1 - mt.c2)).abs();
        let outer_slope = -m * mt.value.powf(m - 1.0) * mt.slope;
        let slope_gap = (outer_slope + 2.0 * mt.c2).abs();

        let edge = self.support_edge(t);
        let samples = samples.max(2);
        let mut outer_inequality = f64::NEG_INFINITY;
        let mut outer_residual = f64::NEG_INFINITY;
        for i in 0..samples {
            let r = 1.0 + (edge - 1.0) * (i as f64 + 0.5) / samples as f64;
            let xi = self.gamma * t.ln() - r;
            let base = self.a * xi + self.b;
            let lhs = -base + self.gamma * self.a;
            let rhs = -k * nm1 * m * self.a * base + m * self.a * self.a / (m - 1.0);
            outer_inequality = outer_inequality.max(lhs - rhs);

            let room = edge - r;
            if room > 1e-3 {
                let u = |x: f64, s: f64| self.outer(x, s);
                let dt = t * (1.0 - (-0.5 * room / self.gamma).exp());
                let res = radial_residual(u, m, n, r, t, 0.5 * room, dt);
                outer_residual = outer_residual.max(res);
            }
        }

        let mut inner_residual = f64::NEG_INFINITY;
        for i in 0..samples {
            let r = (i as f64 + 0.5) / samples as f64;
            let room = r.min(1.0 - r);
            let u = |x: f64, s: f64| self.eval(x, s);
            let res = radial_residual(u, m, n, r, t, 0.5 * room, 0.05 * t);
            inner_residual = inner_residual.max(res);
        }

        let big_k = Self::inner_constant(m, n);
        let sufficient_margin = big_k * self.gamma * t.ln() / t - mt.value.powf(m - 1.0);
        Ok(SubsolutionReport {
            t,
            matching: mt,
            continuity_gap,
            slope_gap,
            outer_inequality,
            outer_residual,
            inner_residual,
            sufficient_margin,
        })
    }
}
