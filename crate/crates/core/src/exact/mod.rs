//! Closed-form and approximate solutions, evaluable at `(coordinate, time)`.
//!
//! Radial kinds take the geodesic radius `r`; the half-space wave takes the
//! height `y`; the singular-weight family takes the Euclidean radius `s`.

mod barenblatt;
mod cone;
mod heat;
pub mod residual;
mod subsolution;

pub use barenblatt::Barenblatt;
pub use cone::{
    gtw, log_cone, log_cone_mass, log_cone_mass_exact, log_cone_mass_horizon,
    log_cone_offset_for_mass, log_cone_profile_integral, plap_cone, rescaled_offset,
    singular_barenblatt, singular_barenblatt_energy,
};
pub use heat::heat_kernel;
pub use subsolution::{Subsolution, SubsolutionReport};

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::params::ModelParams;

/// PME pressure `m/(m-1) u^(m-1)`.
pub fn pressure(u: f64, m: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else {
        m / (m - 1.0) * u.powf(m - 1.0)
    }
}

/// `U_M(x, t) = M U(x, M^(m-1) t)`.
pub fn mass_rescale<F>(u: F, mass: f64, m: f64) -> impl Fn(f64, f64) -> f64
where
    F: Fn(f64, f64) -> f64,
{
    let factor = mass.powf(m - 1.0);
    move |x, t| mass * u(x, factor * t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolutionKind {
    BarenblattEuclidean,
    HeatKernelH3,
    HeatKernelH2,
    GtwHalfspace,
    LogCone,
    SingularBarenblatt,
    PlapCone,
    SubsolutionMatched,
}

impl SolutionKind {
    pub const ALL: [SolutionKind; 8] = [
        Self::BarenblattEuclidean,
        Self::HeatKernelH3,
        Self::HeatKernelH2,
        Self::GtwHalfspace,
        Self::LogCone,
        Self::SingularBarenblatt,
        Self::PlapCone,
        Self::SubsolutionMatched,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::BarenblattEuclidean => "barenblatt-euclidean",
            Self::HeatKernelH3 => "heat-kernel-h3",
            Self::HeatKernelH2 => "heat-kernel-h2",
            Self::GtwHalfspace => "gtw-halfspace",
            Self::LogCone => "log-cone",
            Self::SingularBarenblatt => "singular-barenblatt",
            Self::PlapCone => "plap-cone",
            Self::SubsolutionMatched => "subsolution-matched",
        }
    }
}

impl fmt::Display for SolutionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolutionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Domain(format!("unknown solution kind '{s}'")))
    }
}

/// One catalog solution with its parameters bound.
#[derive(Debug, Clone)]
pub enum ClosedFormSolution {
    Barenblatt(Barenblatt),
    HeatKernel { n: u32 },
    Gtw { params: ModelParams, c: f64 },
    LogCone { params: ModelParams, b: f64 },
    SingularBarenblatt { params: ModelParams, a: f64 },
    PlapCone { params: ModelParams, b: f64 },
    Subsolution(Subsolution),
}

impl ClosedFormSolution {
    pub fn kind(&self) -> SolutionKind {
        match self {
            Self::Barenblatt(_) => SolutionKind::BarenblattEuclidean,
            Self::HeatKernel { n: 2 } => SolutionKind::HeatKernelH2,
            Self::HeatKernel { .. } => SolutionKind::HeatKernelH3,
            Self::Gtw { .. } => SolutionKind::GtwHalfspace,
            Self::LogCone { .. } => SolutionKind::LogCone,
            Self::SingularBarenblatt { .. } => SolutionKind::SingularBarenblatt,
            Self::PlapCone { .. } => SolutionKind::PlapCone,
            Self::Subsolution(_) => SolutionKind::SubsolutionMatched,
        }
    }

    pub fn eval(&self, x: f64, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("time must be positive (got {t})")));
        }
        if x < 0.0 || x.is_nan() {
            return Err(Error::Domain(format!("coordinate must be nonnegative (got {x})")));
        }
        match self {
            Self::Barenblatt(b) => Ok(b.eval(x, t)),
            Self::HeatKernel { n } => heat_kernel(x, t, *n),
            Self::Gtw { params, c } => gtw(x, t, params, *c),
            Self::LogCone { params, b } => log_cone(x, t, params, *b),
            Self::SingularBarenblatt { params, a } => singular_barenblatt(x, t, params, *a),
            Self::PlapCone { params, b } => plap_cone(x, t, params, *b),
            Self::Subsolution(s) => Ok(s.eval(x, t)),
        }
    }

    /// Pressure of the solution; `NaN` for the linear heat kernels.
    pub fn pressure(&self, x: f64, t: f64) -> Result<f64> {
        let u = self.eval(x, t)?;
        Ok(match self {
            Self::HeatKernel { .. } => f64::NAN,
            Self::Barenblatt(b) => pressure(u, b.m()),
            Self::Subsolution(s) => pressure(u, s.m()),
            Self::Gtw { params, .. }
            | Self::LogCone { params, .. }
            | Self::SingularBarenblatt { params, .. }
            | Self::PlapCone { params, .. } => params.pressure_of(u),
        })
    }

    /// Edge of the positivity set at time `t`, where it is a single point.
    ///
    /// For the half-space wave this is the lowest positive height.
    pub fn support_edge(&self, t: f64) -> Option<f64> {
        match self {
            Self::Barenblatt(b) => Some(b.support_radius(t)),
            Self::HeatKernel { .. } => None,
            Self::Gtw { params, c } => Some(1.0 / (c * t.powf(params.front_rate()))),
            Self::LogCone { params, b } | Self::PlapCone { params, b } => {
                Some((params.front_rate() * t.ln() + b).max(0.0))
            }
            Self::SingularBarenblatt { params, a } => {
                params.weighted_beta().ok().map(|beta| a * t.powf(beta))
            }
            Self::Subsolution(s) => Some(s.support_edge(t)),
        }
    }
}
