//! Subcommand definitions and dispatch.

use std::ffi::OsString;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use hypme::analysis::{fit_log_growth, fit_offset, trailing_window};
use hypme::exact::{
    log_cone_offset_for_mass, Barenblatt, ClosedFormSolution, SolutionKind, Subsolution,
};
use hypme::geometry::CoordinateMap;
use hypme::{Error, ModelParams};

use crate::config::{RunConfig, CONFIG_HELP};
use crate::io::{self, num};
use crate::plot::{Chart, Series};
use crate::scenario::{self, TraceStore};

pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "hypme", version, about = "Porous medium flow on hyperbolic space: solver, exact solutions and checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a configured scenario and write its trace, profiles and meta.
    #[command(after_help = CONFIG_HELP)]
    Run(RunArgs),
    /// Evaluate a closed-form solution on a grid.
    Exact(ExactArgs),
    /// Evaluate the configured checks and write report.csv.
    #[command(after_help = CONFIG_HELP)]
    Validate(ValidateArgs),
    /// Tabulate the radial change of variables r -> s with its weights.
    TransformTable(TableArgs),
    /// Run a Cartesian grid of config overrides in parallel (HYPME_THREADS caps workers).
    Sweep(SweepArgs),
    /// Fit R(t) = gamma log t + b on a stored trace.
    Fit(FitArgs),
    /// Render CSV columns as an SVG line chart.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (default: the config's `output`, else out/<config stem>).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed of the optional initial-data perturbation.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ExactArgs {
    /// barenblatt-euclidean | heat-kernel-h3 | heat-kernel-h2 | gtw-halfspace |
    /// log-cone | singular-barenblatt | plap-cone | subsolution-matched
    #[arg(long)]
    pub kind: String,
    /// Evaluation nodes as start:end:count.
    #[arg(long)]
    pub grid: String,
    #[arg(long)]
    pub time: f64,
    #[arg(long, default_value_t = 2.0)]
    pub m: f64,
    /// p-Laplacian exponent, for plap-cone.
    #[arg(long, default_value_t = 3.0)]
    pub p: f64,
    #[arg(long, default_value_t = 3)]
    pub n: u32,
    #[arg(long, default_value_t = 1.0)]
    pub mass: f64,
    /// Free constant: b for the cones (default: the mass-matched offset),
    /// c for the wave (default 1), A for the singular family (default 1).
    #[arg(long)]
    pub param: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Run directory; defaults to the config's output directory.
    #[arg(long)]
    pub dir: Option<PathBuf>,
    /// Config file; defaults to the one recorded in the run directory.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[arg(long)]
    pub n: u32,
    /// Nodes as start:end:count, log-spaced when start > 0 and --linear is absent.
    #[arg(long, default_value = "0.01:15:200")]
    pub grid: String,
    #[arg(long)]
    pub linear: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Override as section.key=v1,v2,...; repeat for more axes.
    #[arg(long = "set", required = true)]
    pub sets: Vec<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Run directory containing trace.csv.
    #[arg(long)]
    pub dir: PathBuf,
    /// Window lo:hi (default: last 1.5 decades).
    #[arg(long)]
    pub window: Option<String>,
    /// Hold the slope fixed and fit only the offset.
    #[arg(long)]
    pub slope: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// CSV files to draw from.
    #[arg(long = "input", required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub x: String,
    /// Columns to draw against x; repeat for several.
    #[arg(long = "y", required = true)]
    pub ys: Vec<String>,
    #[arg(long)]
    pub logx: bool,
    #[arg(long)]
    pub logy: bool,
    #[arg(long, default_value = "")]
    pub title: String,
    #[arg(long)]
    pub out: PathBuf,
}

/// Error with the exit status it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NewtonDivergence { .. }
            | Error::CflViolation { .. }
            | Error::DtUnderflow { .. }
            | Error::DomainTooSmall { .. }
            | Error::NoSupport
            | Error::MatchingInfeasible { .. } => EXIT_SOLVER,
            _ => EXIT_USAGE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::usage(e.to_string())
    }
}

type CmdResult = std::result::Result<i32, Failure>;

/// Parses arguments and runs the subcommand; returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

pub fn dispatch(command: Command) -> CmdResult {
    match command {
        Command::Run(a) => cmd_run(a),
        Command::Exact(a) => cmd_exact(a),
        Command::Validate(a) => cmd_validate(a),
        Command::TransformTable(a) => cmd_table(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Plot(a) => cmd_plot(a),
    }
}

fn emit(out: Option<&Path>, text: &str) -> std::result::Result<(), Failure> {
    match out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(p, text)?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

fn cmd_run(a: RunArgs) -> CmdResult {
    let mut config = RunConfig::load(&a.config)?;
    let Some(problem) = config.problem.as_mut() else {
        return Err(Failure::usage("catalog configs have nothing to run; use validate"));
    };
    if let Some(seed) = a.seed {
        problem.seed = seed;
    }
    let dir = a.out.unwrap_or_else(|| scenario::output_dir(&config));
    let trace = scenario::execute(&config)?;
    let mut meta = scenario::meta_entries(&config);
    if let Some(src) = &config.source {
        let abs = fs::canonicalize(src)?;
        meta.insert("config_path".into(), abs.display().to_string());
    }
    io::write_run(&dir, &config.hash, &config.text, &trace, meta)?;
    println!(
        "wrote {} checkpoints to {} (steps {}, mass drift {:.3e})",
        trace.checkpoints.len(),
        dir.display(),
        trace.steps.len(),
        trace.mass_drift()
    );
    Ok(0)
}

fn parse_range(spec: &str) -> std::result::Result<(f64, f64, usize), Failure> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || Failure::usage(format!("expected start:end:count, got '{spec}'"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let a: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let b: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if n < 2 || !(b > a) || !a.is_finite() || !b.is_finite() {
        return Err(bad());
    }
    Ok((a, b, n))
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| if k == n - 1 { b } else { a + (b - a) * k as f64 / (n - 1) as f64 })
        .collect()
}

fn cmd_exact(a: ExactArgs) -> CmdResult {
    let kind: SolutionKind = a
        .kind
        .parse()
        .map_err(|e: Error| Failure::usage(e.to_string()))?;
    let (x0, x1, count) = parse_range(&a.grid)?;
    let porous = || ModelParams::porous(a.m, a.n, a.mass);
    let solution = match kind {
        SolutionKind::BarenblattEuclidean => ClosedFormSolution::Barenblatt(Barenblatt::new(&porous()?)?),
        SolutionKind::HeatKernelH3 => ClosedFormSolution::HeatKernel { n: 3 },
        SolutionKind::HeatKernelH2 => ClosedFormSolution::HeatKernel { n: 2 },
        SolutionKind::GtwHalfspace => ClosedFormSolution::Gtw {
            params: porous()?,
            c: a.param.unwrap_or(1.0),
        },
        SolutionKind::LogCone => {
            let params = porous()?;
            let b = match a.param {
                Some(b) => b,
                None => log_cone_offset_for_mass(&params)?,
            };
            ClosedFormSolution::LogCone { params, b }
        }
        SolutionKind::SingularBarenblatt => ClosedFormSolution::SingularBarenblatt {
            params: porous()?,
            a: a.param.unwrap_or(1.0),
        },
        SolutionKind::PlapCone => ClosedFormSolution::PlapCone {
            params: ModelParams::p_laplacian(a.p, a.n, a.mass)?,
            b: a.param.unwrap_or(0.0),
        },
        SolutionKind::SubsolutionMatched => {
            ClosedFormSolution::Subsolution(Subsolution::new(&porous()?)?)
        }
    };
    let mut rows = Vec::with_capacity(count);
    for x in linspace(x0, x1, count) {
        rows.push(vec![x, solution.eval(x, a.time)?, solution.pressure(x, a.time)?]);
    }
    let hash = crate::config::config_hash(&format!(
        "exact {} {} {} m={} p={} n={} mass={} param={:?}",
        a.kind, a.grid, a.time, a.m, a.p, a.n, a.mass, a.param
    ));
    emit(a.out.as_deref(), &io::csv_text(&hash, &["coord", "u", "pressure"], rows))?;
    Ok(0)
}

fn cmd_validate(a: ValidateArgs) -> CmdResult {
    let config_path = match (&a.config, &a.dir) {
        (Some(c), _) => c.clone(),
        (None, Some(dir)) => {
            let meta = io::read_meta(&dir.join(io::META_FILE))?;
            match meta.get("config_path").map(PathBuf::from) {
                Some(p) if p.exists() => p,
                _ => dir.join(io::CONFIG_FILE),
            }
        }
        (None, None) => return Err(Failure::usage("validate needs --dir or --config")),
    };
    let config = RunConfig::load(&config_path)?;
    let dir = a.dir.unwrap_or_else(|| scenario::output_dir(&config));
    let mut store = TraceStore::persistent();
    let trace = if config.problem.is_some() {
        match scenario::load_outputs(&dir, &config)? {
            Some(t) => Some(t),
            None => {
                return Err(Failure::usage(format!(
                    "no run matching this config in {}; run it first",
                    dir.display()
                )))
            }
        }
    } else {
        None
    };
    let v = scenario::validate(&config, trace.as_ref(), &mut store)?;
    fs::create_dir_all(&dir)?;
    let path = io::write_report(&dir, &config.hash, &v.report)?;
    for c in &v.report.checks {
        println!("{c}");
    }
    for n in &v.notes {
        eprintln!("note: {n}");
    }
    println!("report: {}", path.display());
    Ok(if v.report.all_pass() { 0 } else { EXIT_CHECK_FAILED })
}

fn cmd_table(a: TableArgs) -> CmdResult {
    let (r0, r1, count) = parse_range(&a.grid)?;
    let map = CoordinateMap::new(a.n)?;
    let nodes = if a.linear || r0 <= 0.0 {
        linspace(r0, r1, count)
    } else {
        hypme::solver::log_spaced(r0, r1, count)?
    };
    let mut rows = Vec::with_capacity(count);
    for r in nodes {
        let s = map.s_of_r(r)?;
        rows.push(vec![r, s, map.rho(s)?, map.mu(s)?]);
    }
    let hash = crate::config::config_hash(&format!("transform-table {} {} {}", a.n, a.grid, a.linear));
    emit(a.out.as_deref(), &io::csv_text(&hash, &["r", "s", "rho", "mu"], rows))?;
    Ok(0)
}

/// One sweep axis: dotted key and its values as TOML literals.
fn parse_axis(spec: &str) -> std::result::Result<(String, Vec<toml::Value>), Failure> {
    let (key, values) = spec
        .split_once('=')
        .ok_or_else(|| Failure::usage(format!("expected section.key=v1,v2 in '{spec}'")))?;
    let mut out = Vec::new();
    for v in values.split(',') {
        let doc: toml::Table = format!("v = {}", v.trim())
            .parse()
            .or_else(|_| format!("v = \"{}\"", v.trim()).parse())
            .map_err(|e: toml::de::Error| Failure::usage(e.to_string()))?;
        out.push(doc["v"].clone());
    }
    Ok((key.trim().to_string(), out))
}

fn set_dotted(table: &mut toml::Table, key: &str, value: toml::Value) -> std::result::Result<(), Failure> {
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().filter(|s| !s.is_empty()).ok_or_else(|| Failure::usage("empty key"))?;
    let mut t = table;
    for p in parts {
        t = t
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| Failure::usage(format!("'{p}' in '{key}' is not a section")))?;
    }
    t.insert(last.to_string(), value);
    Ok(())
}

fn cmd_sweep(a: SweepArgs) -> CmdResult {
    let base_text = fs::read_to_string(&a.config)?;
    let base: toml::Table = base_text.parse().map_err(|e: toml::de::Error| Failure::usage(e.to_string()))?;
    let axes = a.sets.iter().map(|s| parse_axis(s)).collect::<std::result::Result<Vec<_>, _>>()?;
    let mut combos: Vec<Vec<toml::Value>> = vec![Vec::new()];
    for (_, values) in &axes {
        combos = combos
            .into_iter()
            .flat_map(|c| {
                values.iter().map(move |v| {
                    let mut c = c.clone();
                    c.push(v.clone());
                    c
                })
            })
            .collect();
    }
    let mut configs = Vec::with_capacity(combos.len());
    for (k, combo) in combos.iter().enumerate() {
        let mut t = base.clone();
        for ((key, _), v) in axes.iter().zip(combo) {
            set_dotted(&mut t, key, v.clone())?;
        }
        t.remove("output");
        let text = toml::to_string(&t).map_err(|e| Failure::usage(e.to_string()))?;
        let mut config = RunConfig::parse_at(&text, Some(&a.config))?;
        config.output = Some(a.out.join(format!("run_{k:03}")));
        if config.problem.is_none() {
            return Err(Failure::usage("sweeps need a solver config"));
        }
        configs.push(config);
    }
    let threads = std::env::var("HYPME_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|n| *n > 0)
        .unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Failure::usage(e.to_string()))?;
    let results: Vec<std::result::Result<(f64, f64), String>> = pool.install(|| {
        configs
            .par_iter()
            .map(|c| {
                let dir = c.output.clone().expect("set above");
                let trace = scenario::execute(c).map_err(|e| e.to_string())?;
                scenario::write_outputs(&dir, c, &trace).map_err(|e| e.to_string())?;
                let front = trace.checkpoints.last().map_or(f64::NAN, |cp| cp.front);
                Ok((trace.mass_drift(), front))
            })
            .collect()
    });
    fs::create_dir_all(&a.out)?;
    let keys: Vec<&str> = axes.iter().map(|(k, _)| k.as_str()).collect();
    let mut summary = format!(
        "# config_hash={}\nrun,{},status,mass_drift,R_final\n",
        crate::config::config_hash(&base_text),
        keys.join(",")
    );
    let mut failed = 0;
    for (k, (combo, res)) in combos.iter().zip(&results).enumerate() {
        let vals: Vec<String> = combo.iter().map(|v| v.to_string().trim_matches('"').to_string()).collect();
        let (status, drift, front) = match res {
            Ok((d, f)) => ("ok".to_string(), num(*d), num(*f)),
            Err(e) => {
                failed += 1;
                eprintln!("run_{k:03}: {e}");
                ("failed".to_string(), "NaN".into(), "NaN".into())
            }
        };
        summary.push_str(&format!("{k},{},{status},{drift},{front}\n", vals.join(",")));
    }
    fs::write(a.out.join("summary.csv"), summary)?;
    println!("{} runs, {} failed; summary in {}", results.len(), failed, a.out.join("summary.csv").display());
    Ok(if failed > 0 { EXIT_SOLVER } else { 0 })
}

fn cmd_fit(a: FitArgs) -> CmdResult {
    let table = io::read_table(&a.dir.join(io::TRACE_FILE))?;
    let (t, r) = match (table.column("t"), table.column("R")) {
        (Some(t), Some(r)) => (t, r),
        _ => return Err(Failure::usage("trace.csv needs t and R columns")),
    };
    let window = match &a.window {
        Some(w) => {
            let (lo, hi) = w
                .split_once(':')
                .and_then(|(l, h)| Some((l.trim().parse().ok()?, h.trim().parse().ok()?)))
                .ok_or_else(|| Failure::usage(format!("expected lo:hi, got '{w}'")))?;
            (lo, hi)
        }
        None => trailing_window(&t, 1.5).ok_or_else(|| Failure::usage("empty trace"))?,
    };
    let fit = match a.slope {
        Some(g) => fit_offset(&t, &r, window, g)?,
        None => fit_log_growth(&t, &r, window)?,
    };
    println!("slope={}", num(fit.slope));
    println!("intercept={}", num(fit.intercept));
    println!("window={}:{}", num(fit.window.0), num(fit.window.1));
    println!("points={}", fit.points);
    println!("max_residual={}", num(fit.max_residual));
    Ok(0)
}

fn cmd_plot(a: PlotArgs) -> CmdResult {
    let mut chart = Chart {
        title: a.title.clone(),
        x_label: a.x.clone(),
        y_label: a.ys.join(", "),
        log_x: a.logx,
        log_y: a.logy,
        series: Vec::new(),
    };
    for input in &a.inputs {
        let table = io::read_table(input)?;
        let x = table
            .column(&a.x)
            .ok_or_else(|| Failure::usage(format!("{} has no column '{}'", input.display(), a.x)))?;
        for y in &a.ys {
            let col = table
                .column(y)
                .ok_or_else(|| Failure::usage(format!("{} has no column '{y}'", input.display())))?;
            let name = input.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
            let label = if a.inputs.len() > 1 { format!("{name}:{y}") } else { y.clone() };
            chart.series.push(Series {
                label,
                points: x.iter().cloned().zip(col).collect(),
            });
        }
    }
    emit(Some(&a.out), &chart.render())?;
    Ok(0)
}
