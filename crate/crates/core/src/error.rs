use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported dimension n = {n}: {reason}")]
    Dimension { n: u32, reason: &'static str },

    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("newton iteration did not converge after {iterations} iterations (dt = {dt:e})")]
    NewtonDivergence { iterations: usize, dt: f64 },

    #[error("explicit step dt = {dt:e} exceeds the stability bound {bound:e}")]
    CflViolation { dt: f64, bound: f64 },

    #[error("time step underflow at t = {t:e} (dt = {dt:e})")]
    DtUnderflow { t: f64, dt: f64 },

    #[error("support touches the end of the domain at x = {x_max}")]
    DomainTooSmall { x_max: f64 },

    #[error("state has no support above the threshold")]
    NoSupport,

    #[error("subsolution matching infeasible at t = {t}: outer profile vanishes at r = 1")]
    MatchingInfeasible { t: f64 },

    #[error("insufficient data: {0}")]
    Insufficient(String),

    #[error("incompatible traces: {0}")]
    Incompatible(String),

    #[error("config error at line {line}: {message}")]
    ConfigSyntax { line: usize, message: String },

    #[error("config key `{key}`: {message}")]
    ConfigValue { key: String, message: String },

    #[error("malformed data file {path}: {message}")]
    Format { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
