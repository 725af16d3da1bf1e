//! Physical configuration of one problem instance and its derived exponents.

use crate::error::{Error, Result};

/// Flux nonlinearity of the equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Diffusion {
    /// Porous medium: flux `∇(u^m)`, `m > 1`.
    Porous { m: f64 },
    /// Evolution p-Laplacian: flux `|∇u|^(p-2) ∇u`, `p > 2`.
    PLaplacian { p: f64 },
}

/// Exponent, dimension and total mass.
///
/// The mass is measured with the full `n`-dimensional volume element of the
/// relevant geometry, angular factor `|S^(n-1)|` included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub diffusion: Diffusion,
    pub n: u32,
    pub mass: f64,
}

impl ModelParams {
    pub fn porous(m: f64, n: u32, mass: f64) -> Result<Self> {
        if !(m > 1.0) || !m.is_finite() {
            return Err(Error::Parameter {
                name: "m",
                reason: format!("m must exceed 1 (got {m})"),
            });
        }
        Self::checked(Diffusion::Porous { m }, n, mass)
    }

    pub fn p_laplacian(p: f64, n: u32, mass: f64) -> Result<Self> {
        if !(p > 2.0) || !p.is_finite() {
            return Err(Error::Parameter {
                name: "p",
                reason: format!("p must exceed 2 (got {p})"),
            });
        }
        Self::checked(Diffusion::PLaplacian { p }, n, mass)
    }

    fn checked(diffusion: Diffusion, n: u32, mass: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Dimension {
                n,
                reason: "hyperbolic space needs n >= 2",
            });
        }
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::Parameter {
                name: "mass",
                reason: format!("mass must be positive (got {mass})"),
            });
        }
        Ok(Self { diffusion, n, mass })
    }

    pub fn with_mass(mut self, mass: f64) -> Result<Self> {
        self.mass = mass;
        Self::checked(self.diffusion, self.n, mass)
    }

    /// PME exponent, if this is a porous medium instance.
    pub fn m(&self) -> Option<f64> {
        match self.diffusion {
            Diffusion::Porous { m } => Some(m),
            Diffusion::PLaplacian { .. } => None,
        }
    }

    pub fn p(&self) -> Option<f64> {
        match self.diffusion {
            Diffusion::PLaplacian { p } => Some(p),
            Diffusion::Porous { .. } => None,
        }
    }

    pub(crate) fn require_m(&self) -> Result<f64> {
        self.m().ok_or(Error::Parameter {
            name: "m",
            reason: "a porous medium exponent is required".into(),
        })
    }

    fn nm1(&self) -> f64 {
        (self.n - 1) as f64
    }

    /// Slope of the log-conical profile.
    ///
    /// `1/(m(n-1))` for the PME; for the p-Laplacian the root of
    /// `a^(p-2) = (p-2)^(p-2) / ((n-1)(p-1)^(p-1))`.
    pub fn cone_slope(&self) -> f64 {
        match self.diffusion {
            Diffusion::Porous { m } => 1.0 / (m * self.nm1()),
            Diffusion::PLaplacian { p } => {
                let rhs = (p - 2.0).powf(p - 2.0) / (self.nm1() * (p - 1.0).powf(p - 1.0));
                rhs.powf(1.0 / (p - 2.0))
            }
        }
    }

    /// Logarithmic front rate: `1/((m-1)(n-1))` or `1/((p-2)(n-1))`.
    pub fn front_rate(&self) -> f64 {
        match self.diffusion {
            Diffusion::Porous { m } => 1.0 / ((m - 1.0) * self.nm1()),
            Diffusion::PLaplacian { p } => 1.0 / ((p - 2.0) * self.nm1()),
        }
    }

    /// Decay exponent of the height: `1/(m-1)` or `1/(p-2)`.
    pub fn decay_exponent(&self) -> f64 {
        match self.diffusion {
            Diffusion::Porous { m } => 1.0 / (m - 1.0),
            Diffusion::PLaplacian { p } => 1.0 / (p - 2.0),
        }
    }

    /// Power `q` making `u^q` linear across a free boundary:
    /// `m - 1` or `(p-2)/(p-1)`.
    pub fn front_power(&self) -> f64 {
        match self.diffusion {
            Diffusion::Porous { m } => m - 1.0,
            Diffusion::PLaplacian { p } => (p - 2.0) / (p - 1.0),
        }
    }

    /// Euclidean Barenblatt exponent `β = 1/(n(m-1)+2)`.
    pub fn barenblatt_beta(&self) -> Result<f64> {
        let m = self.require_m()?;
        Ok(1.0 / (self.n as f64 * (m - 1.0) + 2.0))
    }

    /// Barenblatt profile coefficient `k = (m-1)β/(2m)`.
    pub fn barenblatt_k(&self) -> Result<f64> {
        let m = self.require_m()?;
        Ok((m - 1.0) * self.barenblatt_beta()? / (2.0 * m))
    }

    /// Exponent `1/((n-2)(m-1))` of the singular-weight family; needs `n >= 3`.
    pub fn weighted_beta(&self) -> Result<f64> {
        let m = self.require_m()?;
        if self.n < 3 {
            return Err(Error::Dimension {
                n: self.n,
                reason: "the singular-weight family needs n >= 3",
            });
        }
        Ok(1.0 / ((self.n - 2) as f64 * (m - 1.0)))
    }

    /// Pressure: `m/(m-1) u^(m-1)`, or `(p-1)/(p-2) u^((p-2)/(p-1))`.
    pub fn pressure_of(&self, u: f64) -> f64 {
        let q = self.front_power();
        if u <= 0.0 {
            0.0
        } else {
            u.powf(q) * match self.diffusion {
                Diffusion::Porous { m } => m / (m - 1.0),
                Diffusion::PLaplacian { p } => (p - 1.0) / (p - 2.0),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_constants_m2_n3() {
        let p = ModelParams::porous(2.0, 3, 1.0).unwrap();
        assert!((p.cone_slope() - 0.25).abs() < 1e-15);
        assert!((p.front_rate() - 0.5).abs() < 1e-15);
        assert!((p.barenblatt_beta().unwrap() - 0.2).abs() < 1e-15);
        assert!((p.barenblatt_k().unwrap() - 0.05).abs() < 1e-15);
        assert!((p.weighted_beta().unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn derived_constants_m3_n3() {
        let p = ModelParams::porous(3.0, 3, 1.0).unwrap();
        assert!((p.cone_slope() - 1.0 / 6.0).abs() < 1e-15);
        assert!((p.front_rate() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn p_laplacian_constants() {
        let p = ModelParams::p_laplacian(3.0, 3, 1.0).unwrap();
        assert!((p.cone_slope() - 0.125).abs() < 1e-15);
        assert!((p.front_rate() - 0.5).abs() < 1e-15);
        assert!(p.barenblatt_beta().is_err());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(ModelParams::porous(0.5, 3, 1.0).is_err());
        assert!(ModelParams::porous(1.0, 3, 1.0).is_err());
        assert!(ModelParams::porous(2.0, 1, 1.0).is_err());
        assert!(ModelParams::porous(2.0, 3, 0.0).is_err());
        assert!(ModelParams::p_laplacian(2.0, 3, 1.0).is_err());
        assert!(ModelParams::porous(2.0, 2, 1.0).unwrap().weighted_beta().is_err());
    }
}
