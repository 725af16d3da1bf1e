use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{sphere_area, CoordinateMap};
use crate::params::{Diffusion, ModelParams};
use crate::quadrature::{GL4_NODES, GL4_WEIGHTS};
use crate::solver::grid::Grid;

/// Equation family `A(x) ∂ₜu = ∂ₓ(B(x) Φ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProblemKind {
    /// `A = B = (sinh x)^(n-1)`, `Φ = ∂ₓ(u^m)`.
    HyperbolicRadial,
    /// `A = ρ(x) x^(n-1)`, `B = x^(n-1)`, `Φ = ∂ₓ(u^m)`.
    WeightedEuclidean,
    /// `A = B = x^(n-1)`, `Φ = ∂ₓ(u^m)`.
    Euclidean,
    /// `A = B = e^((n-1)x)`, `Φ = ∂ₓ(u^m)`.
    ApproxConstant,
    /// `A = B = (sinh x)^(n-1)`, `Φ = |∂ₓu|^(p-2) ∂ₓu`.
    PlapHyperbolic,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 5] = [
        Self::HyperbolicRadial,
        Self::WeightedEuclidean,
        Self::Euclidean,
        Self::ApproxConstant,
        Self::PlapHyperbolic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::HyperbolicRadial => "hyperbolic-radial",
            Self::WeightedEuclidean => "weighted-euclidean",
            Self::Euclidean => "euclidean",
            Self::ApproxConstant => "approx-constant",
            Self::PlapHyperbolic => "plap-hyperbolic",
        }
    }

    /// Whether the spatial coordinate is the geodesic radius.
    pub fn is_geodesic(self) -> bool {
        matches!(
            self,
            Self::HyperbolicRadial | Self::PlapHyperbolic | Self::ApproxConstant
        )
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Domain(format!("unknown problem kind '{s}'")))
    }
}

/// Flux nonlinearity in terms of the potential `v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Flux {
    /// `v = u^m`, flux linear in `∂ₓv`.
    Porous { m: f64 },
    /// `v = u`, flux `|∂ₓv|^(p-2) ∂ₓv`.
    PLaplacian { p: f64 },
}

impl Flux {
    pub fn potential(self, u: f64) -> f64 {
        match self {
            Flux::Porous { m } => {
                if u <= 0.0 {
                    0.0
                } else if m == 2.0 {
                    u * u
                } else {
                    u.powf(m)
                }
            }
            Flux::PLaplacian { .. } => u,
        }
    }

    pub fn potential_derivative(self, u: f64) -> f64 {
        match self {
            Flux::Porous { m } => {
                if u <= 0.0 {
                    0.0
                } else if m == 2.0 {
                    2.0 * u
                } else {
                    m * u.powf(m - 1.0)
                }
            }
            Flux::PLaplacian { .. } => 1.0,
        }
    }

    /// `Φ(g)` and `Φ'(g)` for the potential gradient `g`.
    pub fn law(self, g: f64) -> (f64, f64) {
        match self {
            Flux::Porous { .. } => (g, 1.0),
            Flux::PLaplacian { p } => {
                let a = g.abs();
                if a == 0.0 {
                    (0.0, 0.0)
                } else {
                    let w = a.powf(p - 2.0);
                    (w * g, (p - 1.0) * w)
                }
            }
        }
    }
}

/// Discretized coefficients of one problem on one grid.
///
/// Cell measures and face conductances include `|S^(n-1)|`, so
/// `Σ measure_i u_i` is the mass in the problem's own volume.
#[derive(Debug, Clone)]
pub struct Problem {
    kind: ProblemKind,
    params: ModelParams,
    flux: Flux,
    grid: Grid,
    measure: Vec<f64>,
    conductance: Vec<f64>,
    map: Option<Arc<CoordinateMap>>,
    weight_scale: f64,
}

impl Problem {
    /// Builds the coefficients. The weighted kind uses `ρ/c₁(n)`, so that `s²ρ → 1`;
    /// see [`Problem::build_with_weight`] for the raw weight.
    pub fn build(kind: ProblemKind, params: ModelParams, grid: Grid) -> Result<Self> {
        Self::build_with_weight(kind, params, grid, true)
    }

    pub fn build_with_weight(
        kind: ProblemKind,
        params: ModelParams,
        grid: Grid,
        normalize_weight: bool,
    ) -> Result<Self> {
        let flux = match (kind, params.diffusion) {
            (ProblemKind::PlapHyperbolic, Diffusion::PLaplacian { p }) => Flux::PLaplacian { p },
            (ProblemKind::PlapHyperbolic, _) => {
                return Err(Error::Incompatible(
                    "plap-hyperbolic needs a p-Laplacian exponent p".into(),
                ))
            }
            (_, Diffusion::Porous { m }) => Flux::Porous { m },
            (_, Diffusion::PLaplacian { .. }) => {
                return Err(Error::Incompatible(format!(
                    "{kind} needs a porous medium exponent m"
                )))
            }
        };
        let (map, weight_scale) = if kind == ProblemKind::WeightedEuclidean {
            if params.n < 3 {
                return Err(Error::Incompatible(
                    "weighted-euclidean needs n >= 3; the change of variables degenerates for n = 2"
                        .into(),
                ));
            }
            let map = Arc::new(CoordinateMap::new(params.n)?);
            let scale = if normalize_weight {
                map.far_rho_constant()
            } else {
                1.0
            };
            (Some(map), scale)
        } else {
            (None, 1.0)
        };
        let mut problem = Self {
            kind,
            params,
            flux,
            grid: Grid::uniform(1.0, 2.0)?,
            measure: Vec::new(),
            conductance: Vec::new(),
            map,
            weight_scale,
        };
        problem.set_grid(grid)?;
        Ok(problem)
    }

    /// Switches to a grid that extends the current one, keeping computed coefficients.
    pub fn set_grid(&mut self, grid: Grid) -> Result<()> {
        let keep = if grid.faces().starts_with(self.grid.faces()) && !self.measure.is_empty() {
            self.measure.len()
        } else {
            0
        };
        let omega = sphere_area(self.params.n);
        self.measure.truncate(keep);
        for i in keep..grid.len() {
            let (a, b) = (grid.faces()[i], grid.faces()[i + 1]);
            let c = 0.5 * (a + b);
            let h = 0.5 * (b - a);
            let mut sum = 0.0;
            for (x, w) in GL4_NODES.iter().zip(GL4_WEIGHTS.iter()) {
                sum += w * self.cell_weight(c + h * x)?;
            }
            self.measure.push(omega * h * sum);
        }
        let keep_faces = keep.saturating_sub(1);
        self.conductance.truncate(keep_faces);
        for i in keep_faces..grid.len() - 1 {
            let d = grid.center(i + 1) - grid.center(i);
            self.conductance
                .push(omega * self.face_weight(grid.faces()[i + 1]) / d);
        }
        self.grid = grid;
        Ok(())
    }

    /// `A(x)`.
    pub fn cell_weight(&self, x: f64) -> Result<f64> {
        let nm1 = self.params.n as i32 - 1;
        Ok(match self.kind {
            ProblemKind::HyperbolicRadial | ProblemKind::PlapHyperbolic => x.sinh().powi(nm1),
            ProblemKind::Euclidean => x.powi(nm1),
            ProblemKind::ApproxConstant => (nm1 as f64 * x).exp(),
            ProblemKind::WeightedEuclidean => {
                if x <= 0.0 {
                    0.0
                } else {
                    let map = self.map.as_ref().expect("weighted problem has a map");
                    map.rho(x)? * x.powi(nm1) / self.weight_scale
                }
            }
        })
    }

    /// `B(x)`.
    pub fn face_weight(&self, x: f64) -> f64 {
        let nm1 = self.params.n as i32 - 1;
        match self.kind {
            ProblemKind::HyperbolicRadial | ProblemKind::PlapHyperbolic => x.sinh().powi(nm1),
            ProblemKind::Euclidean | ProblemKind::WeightedEuclidean => x.powi(nm1),
            ProblemKind::ApproxConstant => (nm1 as f64 * x).exp(),
        }
    }

    pub fn kind(&self) -> ProblemKind {
        self.kind
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn flux(&self) -> Flux {
        self.flux
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// `|S^(n-1)| ∫_cell A`.
    pub fn measure(&self) -> &[f64] {
        &self.measure
    }

    /// `|S^(n-1)| B(face) / (x_(i+1) - x_i)` for interior faces.
    pub fn conductance(&self) -> &[f64] {
        &self.conductance
    }

    pub fn map(&self) -> Option<&CoordinateMap> {
        self.map.as_deref()
    }

    /// The constant dividing `ρ` (`c₁(n)` when normalized, else 1).
    ///
    /// Weighted time is hyperbolic time divided by it, and weighted energy
    /// is hyperbolic mass divided by it.
    pub fn weight_scale(&self) -> f64 {
        self.weight_scale
    }

    /// Geodesic radius of a grid coordinate.
    pub fn geodesic_radius(&self, x: f64) -> Result<f64> {
        match &self.map {
            Some(map) if x > 0.0 => map.r_of_s(x),
            _ => Ok(x),
        }
    }

    pub fn mass(&self, u: &[f64]) -> f64 {
        self.measure.iter().zip(u).map(|(v, u)| v * u).sum()
    }

    /// The power of `u` that is linear across a front.
    pub fn front_power(&self) -> f64 {
        self.params.front_power()
    }
}
