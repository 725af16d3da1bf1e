//! Runs a configured scenario and evaluates its checks, resolving reference
//! runs named by the config.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use hypme::analysis::{self, statics, Check, Target, ValidationReport};
use hypme::exact::Barenblatt;
use hypme::solver::{
    cell_averages, dirac_init, perturb, run, Problem, ProblemKind, RunTrace, State,
};
use hypme::{Error, Result};

use crate::config::{CheckName, GridSpec, InitialData, ProblemSpec, RunConfig};
use crate::io;

pub fn build_problem(spec: &ProblemSpec, grid: &GridSpec) -> Result<Problem> {
    Problem::build_with_weight(spec.kind, spec.params, grid.build()?, spec.normalize_weight)
}

pub fn initial_state(problem: &Problem, spec: &ProblemSpec) -> Result<State> {
    let mut u = match spec.init {
        InitialData::Dirac { width } => dirac_init(problem, width)?,
        InitialData::Barenblatt => {
            let bb = Barenblatt::new(&spec.params)?;
            cell_averages(
                problem,
                |x| Ok(bb.eval(x, spec.t0)),
                Some(bb.support_radius(spec.t0)),
            )?
        }
    };
    if spec.perturbation > 0.0 {
        perturb(problem, &mut u, spec.perturbation, spec.seed)?;
    }
    Ok(State { u, t: spec.t0 })
}

fn require_problem(config: &RunConfig) -> Result<&ProblemSpec> {
    config.problem.as_ref().ok_or_else(|| {
        Error::Incompatible("catalog configs have no solver run".into())
    })
}

/// Full solver run of a config.
pub fn execute(config: &RunConfig) -> Result<RunTrace> {
    let spec = require_problem(config)?;
    let problem = build_problem(spec, &config.grid)?;
    let initial = initial_state(&problem, spec)?;
    run(problem, initial, &config.solver, &config.checkpoints)
}

/// `key=value` run description recorded next to the outputs.
pub fn meta_entries(config: &RunConfig) -> BTreeMap<String, String> {
    let mut m = BTreeMap::new();
    let mut put = |k: &str, v: String| {
        m.insert(k.to_string(), v);
    };
    put("version", env!("CARGO_PKG_VERSION").to_string());
    if let Some(p) = &config.problem {
        put("kind", p.kind.name().to_string());
        if let Some(v) = p.params.m() {
            put("m", io::num(v));
        }
        if let Some(v) = p.params.p() {
            put("p", io::num(v));
        }
        put("n", p.params.n.to_string());
        put("mass", io::num(p.params.mass));
        put("seed", p.seed.to_string());
        put("perturbation", io::num(p.perturbation));
        put("t0", io::num(p.t0));
        match p.init {
            InitialData::Dirac { width } => {
                put("init", "dirac".into());
                put("dirac_width", io::num(width));
            }
            InitialData::Barenblatt => put("init", "barenblatt".into()),
        }
    }
    match config.grid {
        GridSpec::Uniform { h, .. } => {
            put("spacing", "uniform".into());
            put("h", io::num(h));
        }
        GridSpec::Graded { h0, growth, .. } => {
            put("spacing", "graded".into());
            put("h0", io::num(h0));
            put("growth", io::num(growth));
        }
    }
    put("scheme", format!("{:?}", config.solver.scheme).to_lowercase());
    m
}

/// Directory a config writes to: its `output` key, else `out/<file stem>`.
pub fn output_dir(config: &RunConfig) -> PathBuf {
    if let Some(dir) = &config.output {
        return dir.clone();
    }
    let stem = config
        .source
        .as_deref()
        .and_then(Path::file_stem)
        .map_or_else(|| "run".to_string(), |s| s.to_string_lossy().into_owned());
    PathBuf::from("out").join(stem)
}

pub fn write_outputs(dir: &Path, config: &RunConfig, trace: &RunTrace) -> Result<()> {
    io::write_run(dir, &config.hash, &config.text, trace, meta_entries(config))
}

/// Reads a stored run if its recorded hash matches the config.
pub fn load_outputs(dir: &Path, config: &RunConfig) -> Result<Option<RunTrace>> {
    let meta_path = dir.join(io::META_FILE);
    if !meta_path.exists() {
        return Ok(None);
    }
    let meta = io::read_meta(&meta_path)?;
    if meta.get("config_hash") != Some(&config.hash) {
        return Ok(None);
    }
    let spec = require_problem(config)?;
    let problem = build_problem(spec, &config.grid)?;
    io::read_run(dir, problem, config.solver.front_threshold).map(Some)
}

/// Reference runs keyed by config path, executed on first use.
///
/// With persistence on, a reference is read from its output directory when
/// the stored hash matches, and written there after a fresh run.
#[derive(Default)]
pub struct TraceStore {
    runs: BTreeMap<PathBuf, (Arc<RunConfig>, Arc<RunTrace>)>,
    persist: bool,
}

impl TraceStore {
    pub fn in_memory() -> Self {
        Self::default()
    }

    pub fn persistent() -> Self {
        Self {
            persist: true,
            ..Self::default()
        }
    }

    pub fn insert(&mut self, path: &Path, config: RunConfig, trace: RunTrace) {
        self.runs
            .insert(path.to_path_buf(), (Arc::new(config), Arc::new(trace)));
    }

    pub fn get(&mut self, path: &Path) -> Result<(Arc<RunConfig>, Arc<RunTrace>)> {
        if let Some(hit) = self.runs.get(path) {
            return Ok(hit.clone());
        }
        let config = RunConfig::load(path)?;
        let trace = if self.persist {
            let dir = output_dir(&config);
            match load_outputs(&dir, &config)? {
                Some(t) => t,
                None => {
                    let t = execute(&config)?;
                    write_outputs(&dir, &config, &t)?;
                    t
                }
            }
        } else {
            execute(&config)?
        };
        let entry = (Arc::new(config), Arc::new(trace));
        self.runs.insert(path.to_path_buf(), entry.clone());
        Ok(entry)
    }
}

/// Report plus the reasons of checks that could not be evaluated.
#[derive(Debug, Clone, Default)]
pub struct Validation {
    pub report: ValidationReport,
    pub notes: Vec<String>,
}

impl Validation {
    fn record(&mut self, name: &str, target: Target, value: Result<f64>) {
        match value {
            Ok(v) => self.report.add(name, v, target),
            Err(e) => {
                self.notes.push(format!("{name}: {e}"));
                self.report.push(Check::new(name, f64::NAN, target));
            }
        }
    }
}

/// Solver failures of reference runs abort the validation; analysis errors
/// become failing checks with a note.
fn split<T>(r: Result<T>) -> Result<Result<T>> {
    match r {
        Err(
            e @ (Error::NewtonDivergence { .. }
            | Error::DtUnderflow { .. }
            | Error::CflViolation { .. }
            | Error::Io(_)
            | Error::ConfigSyntax { .. }
            | Error::ConfigValue { .. }),
        ) => Err(e),
        other => Ok(other),
    }
}

fn nearest(series: &[(f64, f64)], t: f64) -> Result<f64> {
    series
        .iter()
        .min_by(|a, b| (a.0 / t).ln().abs().total_cmp(&(b.0 / t).ln().abs()))
        .map(|p| p.1)
        .ok_or_else(|| Error::Insufficient("empty series".into()))
}

/// `m - 1` for the PME, `p - 2` for the p-Laplacian.
fn degree_gap(trace: &RunTrace) -> f64 {
    let p = trace.problem.params();
    p.m().map_or_else(|| p.p().expect("one exponent is set") - 2.0, |m| m - 1.0)
}

fn offset(trace: &RunTrace, window: (f64, f64)) -> Result<f64> {
    let gamma = trace.problem.params().front_rate();
    Ok(analysis::fit_offset(&trace.times(), &trace.fronts(), window, gamma)?.intercept)
}

fn l1_on(problem: &Problem, u: &[f64], v: &[f64]) -> (f64, f64) {
    let mut diff = 0.0;
    let mut norm = 0.0;
    for (i, vol) in problem.measure().iter().enumerate() {
        let a = u.get(i).copied().unwrap_or(0.0);
        let b = v.get(i).copied().unwrap_or(0.0);
        diff += vol * (a - b).abs();
        norm += vol * b.abs();
    }
    (diff, norm)
}

fn barenblatt_error(config: &RunConfig, trace: &RunTrace) -> Result<f64> {
    let spec = require_problem(config)?;
    if spec.init != InitialData::Barenblatt {
        return Err(Error::Incompatible(
            "consistency runs need barenblatt initial data".into(),
        ));
    }
    let k = trace
        .checkpoints
        .len()
        .checked_sub(1)
        .ok_or_else(|| Error::Insufficient("no checkpoints".into()))?;
    let t = trace.checkpoints[k].t;
    let bb = Barenblatt::new(&spec.params)?;
    let exact = cell_averages(&trace.problem, |x| Ok(bb.eval(x, t)), Some(bb.support_radius(t)))?;
    Ok(analysis::cell_l1_error(trace, k, &exact))
}

fn checkpoint_at(trace: &RunTrace, t: f64) -> Result<usize> {
    trace
        .checkpoints
        .iter()
        .position(|c| (c.t - t).abs() <= 1e-9 * t)
        .ok_or_else(|| Error::Insufficient(format!("no checkpoint at t = {t}")))
}

/// Evaluates the configured checks; `trace` is the config's own run.
pub fn validate(
    config: &RunConfig,
    trace: Option<&RunTrace>,
    store: &mut TraceStore,
) -> Result<Validation> {
    let v = &config.validate;
    let mut out = Validation::default();
    let need = |c: CheckName| -> Result<&RunTrace> {
        trace.ok_or_else(|| Error::Incompatible(format!("'{}' needs a run", c.name())))
    };
    let quarter = (v.static_samples / 4).max(1);
    for &check in &v.checks {
        match check {
            CheckName::Mass => {
                let t = need(check)?;
                out.record("mass", Target::AtMost(v.mass_drift), Ok(t.mass_drift()));
            }
            CheckName::LogGrowth => {
                let t = need(check)?;
                let slope = analysis::fit_log_growth(&t.times(), &t.fronts(), v.fit_window)
                    .map(|f| f.slope);
                let (lo, hi) = v.gamma_bracket;
                out.record("log-growth", Target::Bracket { lo, hi }, slope);
            }
            CheckName::Profile => {
                let t = need(check)?;
                let ratio = (|| {
                    let b = offset(t, v.offset_window)?;
                    let (x0, x1) = v.profile_xi;
                    let n = v.profile_points;
                    let xi: Vec<f64> = (0..n)
                        .map(|k| x0 + (x1 - x0) * k as f64 / (n - 1) as f64)
                        .collect();
                    let pc = analysis::profile_convergence(t, b, &xi)?;
                    let early = pc.distance_near(v.profile_times.0);
                    let late = pc.distance_near(v.profile_times.1);
                    match (early, late) {
                        (Some(e), Some(l)) if e > 0.0 => Ok(l / e),
                        _ => Err(Error::Insufficient("profile times not covered".into())),
                    }
                })();
                out.record("profile", Target::AtMost(v.profile_ratio), ratio);
            }
            CheckName::SupLaw => {
                let t = need(check)?;
                let r = analysis::sup_norm_law(t, v.sup_window).map(|s| s.1);
                out.record("sup-law", Target::AtMost(v.sup_ratio), r);
            }
            CheckName::Benilan => {
                let t = need(check)?;
                let h = config.grid.width();
                let m = analysis::benilan_margin(t, v.benilan_from);
                out.record("benilan", Target::AtLeast(-v.benilan_factor * h * h), m);
            }
            CheckName::Retention => {
                let t = need(check)?;
                let r = analysis::retention(t);
                out.record("retention", Target::AtMost(0.0), Ok(r.lost_cells as f64));
            }
            CheckName::Darcy => {
                let t = need(check)?;
                let d = analysis::darcy_check(t, v.darcy_window, v.darcy_band).and_then(|pts| {
                    if pts.is_empty() {
                        Err(Error::Insufficient("no resolved fronts in the Darcy window".into()))
                    } else {
                        Ok(pts.iter().map(|p| p.deviation).fold(0.0, f64::max))
                    }
                });
                out.record("darcy", Target::AtMost(v.darcy_tolerance), d);
            }
            CheckName::Dominance => {
                let t = need(check)?;
                let d = analysis::cone_dominance(t, v.dominance_time).map(|d| d.max_violation);
                out.record("dominance", Target::AtMost(v.dominance_tolerance), d);
            }
            CheckName::SmallTime => {
                let t = need(check)?;
                let r = analysis::small_time_barenblatt(t).and_then(|s| {
                    let early = nearest(&s, v.small_times.0)?;
                    let late = nearest(&s, v.small_times.1)?;
                    Ok(early / late)
                });
                out.record("small-time", Target::AtMost(1.0), r);
            }
            CheckName::Transform => {
                let t = need(check)?;
                let path = v.transform_reference.as_deref().expect("checked at parse");
                let (_, other) = store.get(path)?;
                let series = split(match t.problem.kind() {
                    ProblemKind::WeightedEuclidean => analysis::compare_transform(&other, t),
                    _ => analysis::compare_transform(t, &other),
                })?;
                let worst = series.and_then(|s| {
                    let mut worst: f64 = 0.0;
                    for &tt in &v.transform_times {
                        let d = s
                            .iter()
                            .find(|p| (p.0 - tt).abs() <= 1e-9 * tt)
                            .ok_or_else(|| {
                                Error::Insufficient(format!("no matched checkpoint at t = {tt}"))
                            })?;
                        worst = worst.max(d.1);
                    }
                    Ok(worst)
                });
                out.record("transform", Target::AtMost(v.transform_tolerance), worst);
            }
            CheckName::WeightedSupport => {
                let t = need(check)?;
                match analysis::validate_weighted_support(t, v.weighted_window) {
                    Ok(ws) => {
                        out.record(
                            "weighted-support",
                            Target::AtMost(v.weighted_variation),
                            Ok(ws.variation),
                        );
                        out.record(
                            "weighted-energy",
                            Target::AtMost(v.energy_tolerance),
                            Ok((ws.a_fit - ws.a_energy).abs() / ws.a_energy),
                        );
                        out.record(
                            "weighted-sup-law",
                            Target::AtMost(v.sup_ratio),
                            Ok(ws.sup_ratio),
                        );
                    }
                    Err(e) => out.record("weighted-support", Target::AtMost(v.weighted_variation), Err(e)),
                }
            }
            CheckName::TwoD => {
                let t = need(check)?;
                let (lo, hi) = v.gamma_bracket;
                match analysis::validate_2d(t, v.fit_window, v.sup_window) {
                    Ok(r) => {
                        out.record("two-d-slope", Target::Bracket { lo, hi }, Ok(r.fit.slope));
                        out.record("two-d-sup-law", Target::AtMost(v.sup_ratio), Ok(r.sup_ratio));
                        out.record(
                            "two-d-dominance",
                            Target::AtMost(v.dominance_tolerance),
                            Ok(r.dominance.max_violation),
                        );
                    }
                    Err(e) => out.record("two-d-slope", Target::Bracket { lo, hi }, Err(e)),
                }
            }
            CheckName::MassScaling => {
                let t = need(check)?;
                let path = v.mass_reference.as_deref().expect("checked at parse");
                let (_, reference) = store.get(path)?;
                let p = t.problem.params();
                let m_ref = reference.problem.params().mass;
                let expected = p.front_rate() * degree_gap(t) * (p.mass / m_ref).ln();
                let diff = (|| Ok(offset(t, v.offset_window)? - offset(&reference, v.offset_window)?))();
                out.record(
                    "mass-scaling",
                    Target::Within {
                        value: expected,
                        tol: v.mass_tolerance,
                    },
                    diff,
                );
            }
            CheckName::Consistency => {
                let t = need(check)?;
                let path = v.consistency_reference.as_deref().expect("checked at parse");
                let (ref_config, reference) = store.get(path)?;
                let ratio = (|| {
                    let coarse = barenblatt_error(config, t)?;
                    let fine = barenblatt_error(&ref_config, &reference)?;
                    if fine > 0.0 {
                        Ok(coarse / fine)
                    } else {
                        Err(Error::Insufficient("reference error vanishes".into()))
                    }
                })();
                let (lo, hi) = v.consistency_bracket;
                out.record("consistency", Target::Bracket { lo, hi }, ratio);
            }
            CheckName::DiracWidth => {
                let t = need(check)?;
                let path = v.width_reference.as_deref().expect("checked at parse");
                let (_, reference) = store.get(path)?;
                let rel = (|| {
                    let a = checkpoint_at(t, v.width_time)?;
                    let b = checkpoint_at(&reference, v.width_time)?;
                    let (fine, coarse) = if reference.problem.grid().len() >= t.problem.grid().len() {
                        (&*reference, t)
                    } else {
                        (t, &*reference)
                    };
                    if !fine.problem.grid().faces().starts_with(coarse.problem.grid().faces()) {
                        return Err(Error::Incompatible("width runs use different grids".into()));
                    }
                    let (d, n) = l1_on(&fine.problem, &t.checkpoints[a].u, &reference.checkpoints[b].u);
                    Ok(d / n)
                })();
                out.record("dirac-width", Target::AtMost(v.width_tolerance), rel);
            }
            CheckName::StaticGtw => {
                let r = split(statics::gtw_exactness(quarter, v.static_seed))?;
                out.record("static-gtw", Target::AtMost(v.gtw_tolerance), r);
            }
            CheckName::StaticCone => {
                let r = split(statics::log_cone_supersolution(quarter, v.static_seed))?;
                out.record("static-cone", Target::AtLeast(-v.cone_tolerance), r);
            }
            CheckName::StaticMap => {
                let (lo, hi) = v.map_range;
                match statics::coordinate_map_accuracy(lo, hi, v.static_samples / 2, v.static_seed) {
                    Ok(acc) => {
                        out.record("static-map", Target::AtMost(v.map_tolerance), Ok(acc.closed_form));
                        out.record(
                            "static-map-roundtrip",
                            Target::AtMost(v.roundtrip_tolerance),
                            Ok(acc.round_trip),
                        );
                    }
                    Err(e) => out.record("static-map", Target::AtMost(v.map_tolerance), Err(e)),
                }
            }
            CheckName::StaticHeat => match statics::heat_kernel_checks(&v.heat_times) {
                Ok(h) => {
                    let dev = |s: &[(f64, f64)]| s.iter().map(|(_, m)| (m - 1.0).abs()).fold(0.0, f64::max);
                    out.record(
                        "static-heat-mass3",
                        Target::AtMost(v.heat_mass3_tolerance),
                        Ok(dev(&h.mass3)),
                    );
                    out.record(
                        "static-heat-residual",
                        Target::AtMost(v.heat_residual_tolerance),
                        Ok(h.residual3),
                    );
                    out.record(
                        "static-heat-mass2",
                        Target::AtMost(v.heat_mass2_tolerance),
                        Ok(dev(&h.mass2)),
                    );
                    out.record("static-heat-positive", Target::AtLeast(f64::MIN_POSITIVE), Ok(h.min2));
                }
                Err(e) => out.record("static-heat-mass3", Target::AtMost(v.heat_mass3_tolerance), Err(e)),
            },
            CheckName::StaticPlap => {
                let r = split(statics::plap_profile_exactness(quarter, v.static_seed))?;
                out.record("static-plap", Target::AtMost(v.plap_tolerance), r);
            }
            CheckName::StaticSubsolution => {
                let (m, n) = config
                    .problem
                    .as_ref()
                    .and_then(|p| p.params.m().map(|m| (m, p.params.n)))
                    .unwrap_or((2.0, 3));
                let r = statics::subsolution_margin(m, n, v.subsolution_time);
                out.record("static-subsolution", Target::AtLeast(0.0), r);
            }
        }
    }
    Ok(out)
}
