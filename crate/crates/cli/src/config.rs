//! Run configuration: a TOML file with sections `[problem] [grid] [solver]
//! [checkpoints] [validate]`, fully checked at parse time.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use sha2::{Digest, Sha256};

use hypme::solver::{log_spaced, Grid, NewtonConfig, ProblemKind, Scheme, SolverConfig};
use hypme::{Error, ModelParams, Result};

/// Key reference printed by `--help`.
pub const CONFIG_HELP: &str = "\
CONFIG KEYS (defaults in parentheses)
  output = DIR                   output directory, relative to the config file
  [problem]
    kind                         hyperbolic-radial | weighted-euclidean | euclidean |
                                 approx-constant | plap-hyperbolic | catalog
    m / p                        PME exponent (m > 1) or p-Laplacian exponent (p > 2)
    n                            dimension (>= 2; >= 3 for weighted-euclidean)
    mass (1)                     total mass, angular factor included
    init (\"dirac\")               dirac | barenblatt
    dirac_width (0.1)            geodesic radius of the initial bump
    t0 (0)                       start time; barenblatt data needs t0 > 0
    normalize_weight (true)      weighted kind: divide the weight by its far-field constant
    perturbation (0)             relative amplitude of random multiplicative noise, in [0, 1)
    seed (0)                     perturbation seed
  [grid]
    spacing (\"uniform\")          uniform | graded
    h (0.01)                     uniform cell width
    h0 (1e-3), growth (1.01)     graded first width and ratio
    x_max (2)                    initial domain end
  [solver]
    scheme (\"implicit\")          implicit | explicit
    newton_tol (1e-13), max_iterations (30)
    dt_init (1e-6), dt_min (1e-14), dt_fraction (0.05), growth (1.3)
    target_low (3), target_high (5), cfl (0.9)
    fixed_dt, fixed_dt_h2        fixed step, absolute or as a multiple of h^2
    front_threshold (1e-6)
    auto_extend (true), extend_trigger (0.9), extend_factor (1.5)
  [checkpoints]
    start (1e-3), end (1e4), count (57)   log-spaced checkpoint times
    times ([])                   extra checkpoint times
    physical_time (false)        weighted kind: divide all times by the weight constant
  [validate]
    checks                       list of check names (default: mass, benilan, retention)
    thresholds                   see the README for the full list";

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    output: Option<String>,
    problem: RawProblem,
    #[serde(default)]
    grid: RawGrid,
    #[serde(default)]
    solver: RawSolver,
    #[serde(default)]
    checkpoints: RawCheckpoints,
    #[serde(default)]
    validate: RawValidate,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    kind: String,
    m: Option<f64>,
    p: Option<f64>,
    n: Option<u32>,
    mass: Option<f64>,
    init: Option<String>,
    dirac_width: Option<f64>,
    t0: Option<f64>,
    normalize_weight: Option<bool>,
    perturbation: Option<f64>,
    seed: Option<u64>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    spacing: Option<String>,
    h: Option<f64>,
    h0: Option<f64>,
    growth: Option<f64>,
    x_max: Option<f64>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    scheme: Option<String>,
    newton_tol: Option<f64>,
    max_iterations: Option<usize>,
    dt_init: Option<f64>,
    dt_min: Option<f64>,
    dt_fraction: Option<f64>,
    growth: Option<f64>,
    target_low: Option<usize>,
    target_high: Option<usize>,
    cfl: Option<f64>,
    fixed_dt: Option<f64>,
    fixed_dt_h2: Option<f64>,
    front_threshold: Option<f64>,
    auto_extend: Option<bool>,
    extend_trigger: Option<f64>,
    extend_factor: Option<f64>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawCheckpoints {
    start: Option<f64>,
    end: Option<f64>,
    count: Option<usize>,
    times: Option<Vec<f64>>,
    physical_time: Option<bool>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawValidate {
    checks: Option<Vec<String>>,
    mass_drift: Option<f64>,
    fit_window: Option<[f64; 2]>,
    gamma_bracket: Option<[f64; 2]>,
    offset_window: Option<[f64; 2]>,
    profile_xi: Option<[f64; 2]>,
    profile_points: Option<usize>,
    profile_times: Option<[f64; 2]>,
    profile_ratio: Option<f64>,
    sup_window: Option<[f64; 2]>,
    sup_ratio: Option<f64>,
    benilan_factor: Option<f64>,
    benilan_from: Option<f64>,
    darcy_window: Option<[f64; 2]>,
    darcy_band: Option<f64>,
    darcy_tolerance: Option<f64>,
    small_times: Option<[f64; 2]>,
    weighted_window: Option<[f64; 2]>,
    weighted_variation: Option<f64>,
    energy_tolerance: Option<f64>,
    dominance_time: Option<f64>,
    dominance_tolerance: Option<f64>,
    transform_reference: Option<String>,
    transform_times: Option<Vec<f64>>,
    transform_tolerance: Option<f64>,
    mass_reference: Option<String>,
    mass_tolerance: Option<f64>,
    consistency_reference: Option<String>,
    consistency_bracket: Option<[f64; 2]>,
    width_reference: Option<String>,
    width_time: Option<f64>,
    width_tolerance: Option<f64>,
    static_samples: Option<usize>,
    static_seed: Option<u64>,
    gtw_tolerance: Option<f64>,
    cone_tolerance: Option<f64>,
    map_range: Option<[f64; 2]>,
    map_tolerance: Option<f64>,
    roundtrip_tolerance: Option<f64>,
    heat_times: Option<Vec<f64>>,
    heat_mass3_tolerance: Option<f64>,
    heat_residual_tolerance: Option<f64>,
    heat_mass2_tolerance: Option<f64>,
    plap_tolerance: Option<f64>,
    subsolution_time: Option<f64>,
}

/// Initial datum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialData {
    /// Smooth bump of the given geodesic radius carrying the configured mass.
    Dirac { width: f64 },
    /// Euclidean Barenblatt profile at the start time.
    Barenblatt,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridSpec {
    Uniform { h: f64, x_max: f64 },
    Graded { h0: f64, growth: f64, x_max: f64 },
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid> {
        match *self {
            Self::Uniform { h, x_max } => Grid::uniform(h, x_max),
            Self::Graded { h0, growth, x_max } => Grid::graded(h0, growth, x_max),
        }
    }

    /// Representative width: `h`, or the first width of a graded grid.
    pub fn width(&self) -> f64 {
        match *self {
            Self::Uniform { h, .. } => h,
            Self::Graded { h0, .. } => h0,
        }
    }
}

/// A solver scenario; absent for catalog-only configs.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    pub params: ModelParams,
    pub init: InitialData,
    pub t0: f64,
    pub normalize_weight: bool,
    pub perturbation: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CheckName {
    Mass,
    LogGrowth,
    Profile,
    SupLaw,
    Benilan,
    Retention,
    Darcy,
    Dominance,
    SmallTime,
    Transform,
    WeightedSupport,
    TwoD,
    MassScaling,
    Consistency,
    DiracWidth,
    StaticGtw,
    StaticCone,
    StaticMap,
    StaticHeat,
    StaticPlap,
    StaticSubsolution,
}

impl CheckName {
    pub const ALL: [CheckName; 21] = [
        Self::Mass,
        Self::LogGrowth,
        Self::Profile,
        Self::SupLaw,
        Self::Benilan,
        Self::Retention,
        Self::Darcy,
        Self::Dominance,
        Self::SmallTime,
        Self::Transform,
        Self::WeightedSupport,
        Self::TwoD,
        Self::MassScaling,
        Self::Consistency,
        Self::DiracWidth,
        Self::StaticGtw,
        Self::StaticCone,
        Self::StaticMap,
        Self::StaticHeat,
        Self::StaticPlap,
        Self::StaticSubsolution,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Mass => "mass",
            Self::LogGrowth => "log-growth",
            Self::Profile => "profile",
            Self::SupLaw => "sup-law",
            Self::Benilan => "benilan",
            Self::Retention => "retention",
            Self::Darcy => "darcy",
            Self::Dominance => "dominance",
            Self::SmallTime => "small-time",
            Self::Transform => "transform",
            Self::WeightedSupport => "weighted-support",
            Self::TwoD => "two-d",
            Self::MassScaling => "mass-scaling",
            Self::Consistency => "consistency",
            Self::DiracWidth => "dirac-width",
            Self::StaticGtw => "static-gtw",
            Self::StaticCone => "static-cone",
            Self::StaticMap => "static-map",
            Self::StaticHeat => "static-heat",
            Self::StaticPlap => "static-plap",
            Self::StaticSubsolution => "static-subsolution",
        }
    }

    /// Whether the check reads the run's own trace.
    pub fn needs_trace(self) -> bool {
        !matches!(
            self,
            Self::StaticGtw
                | Self::StaticCone
                | Self::StaticMap
                | Self::StaticHeat
                | Self::StaticPlap
                | Self::StaticSubsolution
        )
    }
}

/// Verdict thresholds and cross-run references.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidateSpec {
    pub checks: Vec<CheckName>,
    pub mass_drift: f64,
    pub fit_window: (f64, f64),
    pub gamma_bracket: (f64, f64),
    pub offset_window: (f64, f64),
    pub profile_xi: (f64, f64),
    pub profile_points: usize,
    pub profile_times: (f64, f64),
    pub profile_ratio: f64,
    pub sup_window: (f64, f64),
    pub sup_ratio: f64,
    pub benilan_factor: f64,
    pub benilan_from: f64,
    pub darcy_window: (f64, f64),
    pub darcy_band: f64,
    pub darcy_tolerance: f64,
    pub small_times: (f64, f64),
    pub weighted_window: (f64, f64),
    pub weighted_variation: f64,
    pub energy_tolerance: f64,
    pub dominance_time: f64,
    pub dominance_tolerance: f64,
    pub transform_reference: Option<PathBuf>,
    pub transform_times: Vec<f64>,
    pub transform_tolerance: f64,
    pub mass_reference: Option<PathBuf>,
    pub mass_tolerance: f64,
    pub consistency_reference: Option<PathBuf>,
    pub consistency_bracket: (f64, f64),
    pub width_reference: Option<PathBuf>,
    pub width_time: f64,
    pub width_tolerance: f64,
    pub static_samples: usize,
    pub static_seed: u64,
    pub gtw_tolerance: f64,
    pub cone_tolerance: f64,
    pub map_range: (f64, f64),
    pub map_tolerance: f64,
    pub roundtrip_tolerance: f64,
    pub heat_times: Vec<f64>,
    pub heat_mass3_tolerance: f64,
    pub heat_residual_tolerance: f64,
    pub heat_mass2_tolerance: f64,
    pub plap_tolerance: f64,
    pub subsolution_time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// File the config was read from, if any.
    pub source: Option<PathBuf>,
    /// SHA-256 of the config text, hex encoded.
    pub hash: String,
    pub text: String,
    pub output: Option<PathBuf>,
    /// `None` for catalog-only configs.
    pub problem: Option<ProblemSpec>,
    pub grid: GridSpec,
    pub solver: SolverConfig,
    pub checkpoints: Vec<f64>,
    pub validate: ValidateSpec,
}

fn value_error(key: &str, message: impl Into<String>) -> Error {
    Error::ConfigValue {
        key: key.to_string(),
        message: message.into(),
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

pub fn config_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

fn positive(key: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(value_error(key, format!("must be positive and finite (got {v})")))
    }
}

fn window(key: &str, w: [f64; 2]) -> Result<(f64, f64)> {
    if w[0] > 0.0 && w[1] > w[0] && w[1].is_finite() {
        Ok((w[0], w[1]))
    } else {
        Err(value_error(key, format!("need 0 < lo < hi (got [{}, {}])", w[0], w[1])))
    }
}

fn bracket(key: &str, w: [f64; 2]) -> Result<(f64, f64)> {
    if w[0] <= w[1] && w[0].is_finite() && w[1].is_finite() {
        Ok((w[0], w[1]))
    } else {
        Err(value_error(key, format!("need lo <= hi (got [{}, {}])", w[0], w[1])))
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_at(text, None)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_at(&text, Some(path))
    }

    /// Parses `text` as if read from `source`, which anchors relative paths.
    pub fn parse_at(text: &str, source: Option<&Path>) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::ConfigSyntax {
            line: e.span().map_or(0, |s| line_of(text, s.start)),
            message: e.message().to_string(),
        })?;
        let base = source
            .and_then(Path::parent)
            .map(Path::to_path_buf)
            .unwrap_or_default();
        let resolve = |p: &str| base.join(p);

        let problem = parse_problem(&raw.problem)?;
        let grid = parse_grid(&raw.grid, problem.as_ref())?;
        let solver = parse_solver(&raw.solver, &grid)?;
        let checkpoints = parse_checkpoints(&raw.checkpoints, problem.as_ref())?;
        let validate = parse_validate(&raw.validate, problem.as_ref(), &resolve)?;
        if let Some(p) = &problem {
            if let Some(&t) = checkpoints.first() {
                if t <= p.t0 {
                    return Err(value_error(
                        "checkpoints.start",
                        format!("checkpoints must follow the start time t0 = {}", p.t0),
                    ));
                }
            }
        }
        Ok(Self {
            source: source.map(Path::to_path_buf),
            hash: config_hash(text),
            text: text.to_string(),
            output: raw.output.as_deref().map(resolve),
            problem,
            grid,
            solver,
            checkpoints,
            validate,
        })
    }

    /// Path given relative to the config's directory.
    pub fn resolve(&self, p: &Path) -> PathBuf {
        match self.source.as_deref().and_then(Path::parent) {
            Some(dir) => dir.join(p),
            None => p.to_path_buf(),
        }
    }
}

fn parse_problem(raw: &RawProblem) -> Result<Option<ProblemSpec>> {
    if raw.kind == "catalog" {
        let stray = [
            ("problem.m", raw.m.is_some()),
            ("problem.p", raw.p.is_some()),
            ("problem.init", raw.init.is_some()),
        ];
        if let Some((key, _)) = stray.iter().find(|(_, set)| *set) {
            return Err(value_error(key, "not used by a catalog config"));
        }
        return Ok(None);
    }
    let kind: ProblemKind = raw
        .kind
        .parse()
        .map_err(|_| value_error("problem.kind", format!("unknown kind '{}'", raw.kind)))?;
    let n = raw.n.ok_or_else(|| value_error("problem.n", "required"))?;
    if n < 2 {
        return Err(value_error("problem.n", format!("must be at least 2 (got {n})")));
    }
    if kind == ProblemKind::WeightedEuclidean && n < 3 {
        return Err(value_error(
            "problem.n",
            "weighted-euclidean needs n >= 3; for n = 2 the change of variables picks up a log-log correction",
        ));
    }
    let mass = raw.mass.unwrap_or(1.0);
    positive("problem.mass", mass)?;
    let params = if kind == ProblemKind::PlapHyperbolic {
        if raw.m.is_some() {
            return Err(value_error("problem.m", "plap-hyperbolic takes p, not m"));
        }
        let p = raw.p.ok_or_else(|| value_error("problem.p", "required for plap-hyperbolic"))?;
        if !(p > 2.0) || !p.is_finite() {
            return Err(value_error("problem.p", format!("p must exceed 2 (got {p})")));
        }
        ModelParams::p_laplacian(p, n, mass)
    } else {
        if raw.p.is_some() {
            return Err(value_error("problem.p", format!("{kind} takes m, not p")));
        }
        let m = raw.m.ok_or_else(|| value_error("problem.m", "required"))?;
        if !(m > 1.0) || !m.is_finite() {
            return Err(value_error(
                "problem.m",
                format!("m must exceed 1 (got {m}); fast diffusion is not supported"),
            ));
        }
        ModelParams::porous(m, n, mass)
    }
    .map_err(|e| value_error("problem", e.to_string()))?;

    let t0 = raw.t0.unwrap_or(0.0);
    if !(t0 >= 0.0) || !t0.is_finite() {
        return Err(value_error("problem.t0", format!("must be nonnegative (got {t0})")));
    }
    let init = match raw.init.as_deref().unwrap_or("dirac") {
        "dirac" => InitialData::Dirac {
            width: positive("problem.dirac_width", raw.dirac_width.unwrap_or(0.1))?,
        },
        "barenblatt" => {
            if kind != ProblemKind::Euclidean || params.m().is_none() {
                return Err(value_error(
                    "problem.init",
                    "barenblatt data is exact only for the euclidean PME",
                ));
            }
            if t0 <= 0.0 {
                return Err(value_error("problem.t0", "barenblatt data needs t0 > 0"));
            }
            if raw.dirac_width.is_some() {
                return Err(value_error("problem.dirac_width", "unused with barenblatt data"));
            }
            InitialData::Barenblatt
        }
        other => {
            return Err(value_error(
                "problem.init",
                format!("expected dirac or barenblatt (got '{other}')"),
            ))
        }
    };
    let perturbation = raw.perturbation.unwrap_or(0.0);
    if !(0.0..1.0).contains(&perturbation) {
        return Err(value_error(
            "problem.perturbation",
            format!("must lie in [0, 1) (got {perturbation})"),
        ));
    }
    let normalize_weight = raw.normalize_weight.unwrap_or(true);
    if raw.normalize_weight.is_some() && kind != ProblemKind::WeightedEuclidean {
        return Err(value_error("problem.normalize_weight", "only for weighted-euclidean"));
    }
    Ok(Some(ProblemSpec {
        kind,
        params,
        init,
        t0,
        normalize_weight,
        perturbation,
        seed: raw.seed.unwrap_or(0),
    }))
}

fn parse_grid(raw: &RawGrid, problem: Option<&ProblemSpec>) -> Result<GridSpec> {
    let x_max = positive("grid.x_max", raw.x_max.unwrap_or(2.0))?;
    let spec = match raw.spacing.as_deref().unwrap_or("uniform") {
        "uniform" => {
            if raw.h0.is_some() || raw.growth.is_some() {
                return Err(value_error("grid.spacing", "h0 and growth need spacing = \"graded\""));
            }
            let h = positive("grid.h", raw.h.unwrap_or(0.01))?;
            if h >= x_max {
                return Err(value_error("grid.h", format!("must be below x_max = {x_max}")));
            }
            GridSpec::Uniform { h, x_max }
        }
        "graded" => {
            if raw.h.is_some() {
                return Err(value_error("grid.h", "use h0 with graded spacing"));
            }
            let h0 = positive("grid.h0", raw.h0.unwrap_or(1e-3))?;
            let growth = raw.growth.unwrap_or(1.01);
            if !(1.0..=1.5).contains(&growth) {
                return Err(value_error("grid.growth", format!("must lie in [1, 1.5] (got {growth})")));
            }
            if h0 >= x_max {
                return Err(value_error("grid.h0", format!("must be below x_max = {x_max}")));
            }
            GridSpec::Graded { h0, growth, x_max }
        }
        other => {
            return Err(value_error(
                "grid.spacing",
                format!("expected uniform or graded (got '{other}')"),
            ))
        }
    };
    if let Some(InitialData::Dirac { width }) = problem.map(|p| p.init) {
        if width >= x_max {
            return Err(value_error(
                "problem.dirac_width",
                format!("bump does not fit in x_max = {x_max}"),
            ));
        }
    }
    Ok(spec)
}

fn parse_solver(raw: &RawSolver, grid: &GridSpec) -> Result<SolverConfig> {
    let d = SolverConfig::default();
    let scheme = match raw.scheme.as_deref().unwrap_or("implicit") {
        "implicit" => Scheme::Implicit,
        "explicit" => Scheme::Explicit,
        other => {
            return Err(value_error(
                "solver.scheme",
                format!("expected implicit or explicit (got '{other}')"),
            ))
        }
    };
    let fixed_dt = match (raw.fixed_dt, raw.fixed_dt_h2) {
        (Some(_), Some(_)) => {
            return Err(value_error("solver.fixed_dt_h2", "give fixed_dt or fixed_dt_h2, not both"))
        }
        (Some(dt), None) => Some(positive("solver.fixed_dt", dt)?),
        (None, Some(f)) => {
            let h = grid.width();
            Some(positive("solver.fixed_dt_h2", f)? * h * h)
        }
        (None, None) => None,
    };
    let cfg = SolverConfig {
        scheme,
        newton: NewtonConfig {
            tol: raw.newton_tol.unwrap_or(d.newton.tol),
            max_iterations: raw.max_iterations.unwrap_or(d.newton.max_iterations),
        },
        dt_init: raw.dt_init.unwrap_or(d.dt_init),
        dt_min: raw.dt_min.unwrap_or(d.dt_min),
        dt_fraction: raw.dt_fraction.unwrap_or(d.dt_fraction),
        growth: raw.growth.unwrap_or(d.growth),
        target_low: raw.target_low.unwrap_or(d.target_low),
        target_high: raw.target_high.unwrap_or(d.target_high),
        cfl: raw.cfl.unwrap_or(d.cfl),
        fixed_dt,
        front_threshold: raw.front_threshold.unwrap_or(d.front_threshold),
        auto_extend: raw.auto_extend.unwrap_or(d.auto_extend),
        extend_trigger: raw.extend_trigger.unwrap_or(d.extend_trigger),
        extend_factor: raw.extend_factor.unwrap_or(d.extend_factor),
    };
    cfg.validate().map_err(|e| match e {
        Error::Parameter { name, reason } => value_error(&format!("solver.{name}"), reason),
        other => value_error("solver", other.to_string()),
    })?;
    Ok(cfg)
}

fn parse_checkpoints(raw: &RawCheckpoints, problem: Option<&ProblemSpec>) -> Result<Vec<f64>> {
    let count = raw.count.unwrap_or(57);
    let mut times = if count == 0 {
        Vec::new()
    } else {
        let start = positive("checkpoints.start", raw.start.unwrap_or(1e-3))?;
        let end = positive("checkpoints.end", raw.end.unwrap_or(1e4))?;
        if count == 1 {
            vec![end]
        } else {
            if end <= start {
                return Err(value_error("checkpoints.end", "must exceed start"));
            }
            log_spaced(start, end, count).map_err(|e| value_error("checkpoints", e.to_string()))?
        }
    };
    for &t in raw.times.as_deref().unwrap_or(&[]) {
        times.push(positive("checkpoints.times", t)?);
    }
    times.sort_by(f64::total_cmp);
    times.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
    if raw.physical_time.is_some()
        && problem.is_none_or(|p| p.kind != ProblemKind::WeightedEuclidean)
    {
        return Err(value_error("checkpoints.physical_time", "only for weighted-euclidean"));
    }
    if problem.is_some() && times.is_empty() {
        return Err(value_error("checkpoints.count", "a solver run needs checkpoints"));
    }
    if raw.physical_time == Some(true) {
        let p = problem.expect("checked above");
        let scale = weight_constant(p)?;
        for t in &mut times {
            *t /= scale;
        }
    }
    Ok(times)
}

/// Weight divisor of the weighted kind: the far-field constant, or 1 for the raw weight.
pub fn weight_constant(p: &ProblemSpec) -> Result<f64> {
    if p.kind != ProblemKind::WeightedEuclidean || !p.normalize_weight {
        return Ok(1.0);
    }
    Ok(hypme::geometry::CoordinateMap::new(p.params.n)?.far_rho_constant())
}

fn parse_validate(
    raw: &RawValidate,
    problem: Option<&ProblemSpec>,
    resolve: &dyn Fn(&str) -> PathBuf,
) -> Result<ValidateSpec> {
    let checks = match &raw.checks {
        Some(names) => {
            let mut out = Vec::new();
            for name in names {
                let c = CheckName::ALL
                    .into_iter()
                    .find(|c| c.name() == name)
                    .ok_or_else(|| value_error("validate.checks", format!("unknown check '{name}'")))?;
                if !out.contains(&c) {
                    out.push(c);
                }
            }
            out
        }
        None if problem.is_some() => vec![CheckName::Mass, CheckName::Benilan, CheckName::Retention],
        None => Vec::new(),
    };
    if problem.is_none() {
        if let Some(c) = checks.iter().find(|c| c.needs_trace()) {
            return Err(value_error(
                "validate.checks",
                format!("'{}' needs a solver run, but this is a catalog config", c.name()),
            ));
        }
    }
    let w = |key: &str, v: Option<[f64; 2]>, d: (f64, f64)| -> Result<(f64, f64)> {
        v.map_or(Ok(d), |v| window(key, v))
    };
    let pos = |key: &str, v: Option<f64>, d: f64| -> Result<f64> { positive(key, v.unwrap_or(d)) };
    let gamma_bracket = match raw.gamma_bracket {
        Some(b) => bracket("validate.gamma_bracket", b)?,
        None => problem.map_or((0.0, f64::INFINITY), |p| {
            let g = if p.params.n == 2 {
                p.params.m().map_or(p.params.front_rate(), |m| 1.0 / (m - 1.0))
            } else {
                p.params.front_rate()
            };
            (0.9 * g, 1.1 * g)
        }),
    };
    let need_ref = |key: &str, v: &Option<String>, check: CheckName| -> Result<Option<PathBuf>> {
        match v {
            Some(p) => Ok(Some(resolve(p))),
            None if checks.contains(&check) => Err(value_error(
                key,
                format!("required by the '{}' check", check.name()),
            )),
            None => Ok(None),
        }
    };
    let profile_points = raw.profile_points.unwrap_or(101);
    if profile_points < 2 {
        return Err(value_error("validate.profile_points", "need at least 2 points"));
    }
    let profile_xi = match raw.profile_xi {
        Some(v) if v[1] > v[0] => (v[0], v[1]),
        Some(_) => return Err(value_error("validate.profile_xi", "need lo < hi")),
        None => (-1.0, 2.0),
    };
    let heat_times = raw.heat_times.clone().unwrap_or_else(|| vec![0.5, 2.0]);
    for &t in &heat_times {
        positive("validate.heat_times", t)?;
    }
    let transform_times = raw.transform_times.clone().unwrap_or_else(|| vec![10.0]);
    for &t in &transform_times {
        positive("validate.transform_times", t)?;
    }
    let static_samples = raw.static_samples.unwrap_or(1000);
    if static_samples < 2 {
        return Err(value_error("validate.static_samples", "need at least 2 samples"));
    }
    Ok(ValidateSpec {
        mass_drift: pos("validate.mass_drift", raw.mass_drift, 1e-8)?,
        fit_window: w("validate.fit_window", raw.fit_window, (1e2, 1e4))?,
        gamma_bracket,
        offset_window: w("validate.offset_window", raw.offset_window, (1e3, 1e4))?,
        profile_xi,
        profile_points,
        profile_times: w("validate.profile_times", raw.profile_times, (1e2, 1e4))?,
        profile_ratio: pos("validate.profile_ratio", raw.profile_ratio, 0.5)?,
        sup_window: w("validate.sup_window", raw.sup_window, (1e3, 1e4))?,
        sup_ratio: pos("validate.sup_ratio", raw.sup_ratio, 2.0)?,
        benilan_factor: pos("validate.benilan_factor", raw.benilan_factor, 10.0)?,
        benilan_from: pos("validate.benilan_from", raw.benilan_from, 1e-2)?,
        darcy_window: w("validate.darcy_window", raw.darcy_window, (1e3, 1e4))?,
        darcy_band: pos("validate.darcy_band", raw.darcy_band, 0.3)?,
        darcy_tolerance: pos("validate.darcy_tolerance", raw.darcy_tolerance, 0.2)?,
        small_times: w("validate.small_times", raw.small_times, (1e-3, 1e-1))?,
        weighted_window: w("validate.weighted_window", raw.weighted_window, (1e2, 1e4))?,
        weighted_variation: pos("validate.weighted_variation", raw.weighted_variation, 0.15)?,
        energy_tolerance: pos("validate.energy_tolerance", raw.energy_tolerance, 0.1)?,
        dominance_time: pos("validate.dominance_time", raw.dominance_time, 1e2)?,
        dominance_tolerance: pos("validate.dominance_tolerance", raw.dominance_tolerance, 1e-10)?,
        transform_reference: need_ref(
            "validate.transform_reference",
            &raw.transform_reference,
            CheckName::Transform,
        )?,
        transform_times,
        transform_tolerance: pos("validate.transform_tolerance", raw.transform_tolerance, 0.01)?,
        mass_reference: need_ref("validate.mass_reference", &raw.mass_reference, CheckName::MassScaling)?,
        mass_tolerance: pos("validate.mass_tolerance", raw.mass_tolerance, 0.1)?,
        consistency_reference: need_ref(
            "validate.consistency_reference",
            &raw.consistency_reference,
            CheckName::Consistency,
        )?,
        consistency_bracket: w("validate.consistency_bracket", raw.consistency_bracket, (3.2, 4.8))?,
        width_reference: need_ref("validate.width_reference", &raw.width_reference, CheckName::DiracWidth)?,
        width_time: pos("validate.width_time", raw.width_time, 1.0)?,
        width_tolerance: pos("validate.width_tolerance", raw.width_tolerance, 0.01)?,
        static_samples,
        static_seed: raw.static_seed.unwrap_or(1),
        gtw_tolerance: pos("validate.gtw_tolerance", raw.gtw_tolerance, 1e-8)?,
        cone_tolerance: pos("validate.cone_tolerance", raw.cone_tolerance, 1e-10)?,
        map_range: w("validate.map_range", raw.map_range, (1e-2, 15.0))?,
        map_tolerance: pos("validate.map_tolerance", raw.map_tolerance, 1e-8)?,
        roundtrip_tolerance: pos("validate.roundtrip_tolerance", raw.roundtrip_tolerance, 1e-10)?,
        heat_times,
        heat_mass3_tolerance: pos("validate.heat_mass3_tolerance", raw.heat_mass3_tolerance, 1e-6)?,
        heat_residual_tolerance: pos(
            "validate.heat_residual_tolerance",
            raw.heat_residual_tolerance,
            1e-6,
        )?,
        heat_mass2_tolerance: pos("validate.heat_mass2_tolerance", raw.heat_mass2_tolerance, 1e-4)?,
        plap_tolerance: pos("validate.plap_tolerance", raw.plap_tolerance, 1e-8)?,
        subsolution_time: pos("validate.subsolution_time", raw.subsolution_time, 1e3)?,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[problem]\nkind = \"hyperbolic-radial\"\nm = 2\nn = 3\nmass = 1\n";

    #[test]
    fn minimal_gets_defaults() {
        let c = RunConfig::parse(MINIMAL).unwrap();
        let p = c.problem.unwrap();
        assert_eq!(p.init, InitialData::Dirac { width: 0.1 });
        assert_eq!(c.grid, GridSpec::Uniform { h: 0.01, x_max: 2.0 });
        assert_eq!(c.checkpoints.len(), 57);
        assert_eq!(c.checkpoints[0], 1e-3);
        assert_eq!(*c.checkpoints.last().unwrap(), 1e4);
        assert_eq!(c.solver, SolverConfig::default());
        assert_eq!(
            c.validate.checks,
            vec![CheckName::Mass, CheckName::Benilan, CheckName::Retention]
        );
        assert_eq!(c.validate.mass_drift, 1e-8);
        assert!((c.validate.gamma_bracket.0 - 0.45).abs() < 1e-15);
    }

    fn value_key(text: &str) -> String {
        match RunConfig::parse(text) {
            Err(Error::ConfigValue { key, .. }) => key,
            other => panic!("expected a value error, got {other:?}"),
        }
    }

    #[test]
    fn fast_diffusion_rejected() {
        let text = MINIMAL.replace("m = 2", "m = 0.5");
        assert_eq!(value_key(&text), "problem.m");
        let msg = RunConfig::parse(&text).unwrap_err().to_string();
        assert!(msg.contains("m must exceed 1"), "{msg}");
    }

    #[test]
    fn weighted_plane_rejected() {
        let text = "[problem]\nkind = \"weighted-euclidean\"\nm = 2\nn = 2\n";
        assert_eq!(value_key(text), "problem.n");
    }

    #[test]
    fn unknown_key_reports_line() {
        let text = format!("{MINIMAL}\n[grid]\nh = 0.01\nwidth = 3\n");
        match RunConfig::parse(&text) {
            Err(Error::ConfigSyntax { line, message }) => {
                assert_eq!(line, 9);
                assert!(message.contains("width"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        match RunConfig::parse("[problem]\nkind = \n") {
            Err(Error::ConfigSyntax { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn semantic_errors_name_keys() {
        assert_eq!(value_key(&format!("{MINIMAL}[grid]\nh = -1\n")), "grid.h");
        assert_eq!(value_key(&format!("{MINIMAL}[solver]\ngrowth = 2\n")), "solver.growth");
        assert_eq!(
            value_key(&format!("{MINIMAL}[validate]\nchecks = [\"nonsense\"]\n")),
            "validate.checks"
        );
        assert_eq!(
            value_key(&format!("{MINIMAL}[validate]\nchecks = [\"mass-scaling\"]\n")),
            "validate.mass_reference"
        );
        assert_eq!(value_key(&MINIMAL.replace("hyperbolic-radial", "spherical")), "problem.kind");
        assert_eq!(
            value_key("[problem]\nkind = \"plap-hyperbolic\"\nm = 2\nn = 3\n"),
            "problem.m"
        );
        assert_eq!(
            value_key(&format!("{MINIMAL}init = \"barenblatt\"\n")),
            "problem.init"
        );
    }

    #[test]
    fn catalog_configs() {
        let c = RunConfig::parse("[problem]\nkind = \"catalog\"\n[validate]\nchecks = [\"static-map\"]\n")
            .unwrap();
        assert!(c.problem.is_none());
        assert_eq!(
            value_key("[problem]\nkind = \"catalog\"\n[validate]\nchecks = [\"mass\"]\n"),
            "validate.checks"
        );
    }

    #[test]
    fn fixed_step_in_units_of_h2() {
        let c = RunConfig::parse(&format!("{MINIMAL}[grid]\nh = 0.02\n[solver]\nfixed_dt_h2 = 0.5\n"))
            .unwrap();
        assert!((c.solver.fixed_dt.unwrap() - 2e-4).abs() < 1e-18);
    }

    #[test]
    fn physical_time_rescales_checkpoints() {
        let text = "[problem]\nkind = \"weighted-euclidean\"\nm = 2\nn = 3\n\
                    [checkpoints]\ncount = 0\ntimes = [10.0]\nphysical_time = true\n";
        let c = RunConfig::parse(text).unwrap();
        let scale = weight_constant(c.problem.as_ref().unwrap()).unwrap();
        assert_eq!(c.checkpoints, vec![10.0 / scale]);
    }

    #[test]
    fn hash_tracks_text() {
        let a = RunConfig::parse(MINIMAL).unwrap();
        let b = RunConfig::parse(&format!("{MINIMAL}# comment\n")).unwrap();
        assert_eq!(a.hash.len(), 64);
        assert_ne!(a.hash, b.hash);
    }
}
