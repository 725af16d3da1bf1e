use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hypme_cli::io;

fn hypme(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hypme"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SMALL: &str = r#"
[problem]
kind = "hyperbolic-radial"
m = 2
n = 3
mass = 1
dirac_width = 0.2

[grid]
h = 0.02
x_max = 2

[checkpoints]
times = [0.1, 1, 10]

[validate]
checks = ["mass", "benilan", "retention"]
"#;

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn run_small(tmp: &Path, name: &str) -> PathBuf {
    let config = write_config(tmp, &format!("{name}.toml"), SMALL);
    let out = tmp.join(name);
    let o = hypme(&["run", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    out
}

#[test]
fn run_then_validate_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_small(tmp.path(), "small");
    for f in [io::TRACE_FILE, io::CELLS_FILE, io::STEPS_FILE, io::META_FILE, io::CONFIG_FILE] {
        assert!(out.join(f).exists(), "missing {f}");
    }
    assert!(out.join(io::profile_file(2)).exists());
    let o = hypme(&["validate", "--dir", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report = fs::read_to_string(out.join(io::REPORT_FILE)).unwrap();
    assert!(report.contains("check,measured,target,tolerance,pass"));
    assert_eq!(report.lines().filter(|l| l.starts_with("mass,")).count(), 1);
}

#[test]
fn runs_are_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let a = run_small(tmp.path(), "a");
    let b = run_small(tmp.path(), "b");
    for f in [io::TRACE_FILE.to_string(), io::STEPS_FILE.into(), io::profile_file(2)] {
        assert_eq!(fs::read(a.join(&f)).unwrap(), fs::read(b.join(&f)).unwrap(), "{f} differs");
    }
}

#[test]
fn stored_run_reads_back() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_small(tmp.path(), "small");
    let config = hypme_cli::RunConfig::parse_at(SMALL, None).unwrap();
    let fresh = hypme_cli::scenario::execute(&config).unwrap();
    let stored = hypme_cli::scenario::load_outputs(&out, &config).unwrap().expect("hash matches");
    assert_eq!(fresh.checkpoints.len(), stored.checkpoints.len());
    for (a, b) in fresh.checkpoints.iter().zip(&stored.checkpoints) {
        assert_eq!(a.t, b.t);
        assert_eq!(a.u.len(), b.u.len());
        for (x, y) in a.u.iter().zip(&b.u) {
            assert!((x - y).abs() <= 1e-15 * x.abs().max(1e-300), "{x} vs {y}");
        }
    }
    assert!((fresh.mass_drift() - stored.mass_drift()).abs() < 1e-14);
}

#[test]
fn transform_table_matches_closed_form() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("map.csv");
    let o = hypme(&["transform-table", "--n", "3", "--grid", "0.01:5:50", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let t = io::read_table(&path).unwrap();
    let (r, s) = (t.column("r").unwrap(), t.column("s").unwrap());
    assert_eq!(r.len(), 50);
    for (r, s) in r.iter().zip(&s) {
        let exact = ((2.0 * r).exp() - 1.0) / 2.0;
        assert!((s - exact).abs() <= 1e-8 * exact.max(1.0), "r={r}: {s} vs {exact}");
    }
}

#[test]
fn exact_writes_profile() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("b.csv");
    let o = hypme(&[
        "exact", "--kind", "barenblatt-euclidean", "--grid", "0:3:31", "--time", "1", "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let t = io::read_table(&path).unwrap();
    let u = t.column("u").unwrap();
    assert_eq!(u.len(), 31);
    assert!(u[0] > 0.0 && *u.last().unwrap() == 0.0);
    assert!(u.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn sweep_fit_and_plot() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), "base.toml", SMALL);
    let out = tmp.path().join("sweep");
    let o = Command::new(env!("CARGO_BIN_EXE_hypme"))
        .env("HYPME_THREADS", "2")
        .args(["sweep", "--config", config.to_str().unwrap(), "--set", "problem.mass=1,2"])
        .args(["--out", out.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().filter(|l| l.contains(",ok,")).count(), 2, "{summary}");

    let run = out.join("run_001");
    let o = hypme(&["fit", "--dir", run.to_str().unwrap(), "--window", "0.1:10"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = String::from_utf8_lossy(&o.stdout);
    let slope: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("slope="))
        .and_then(|v| v.parse().ok())
        .expect("slope line");
    assert!(slope.is_finite() && slope > 0.0);

    let svg = tmp.path().join("r.svg");
    let trace = run.join(io::TRACE_FILE);
    let o = hypme(&[
        "plot", "--input", trace.to_str().unwrap(), "--x", "t", "--y", "R", "--logx", "--out",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(fs::read_to_string(svg).unwrap().starts_with("<svg"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&hypme(&["frobnicate"])), 2);
    let tmp = tempfile::tempdir().unwrap();
    let bad = write_config(tmp.path(), "fast.toml", &SMALL.replace("m = 2", "m = 0.5"));
    let o = hypme(&["run", "--config", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("m must exceed 1"), "{}", stderr(&o));
    let missing = tmp.path().join("absent.toml");
    assert_eq!(code(&hypme(&["run", "--config", missing.to_str().unwrap()])), 2);
}

#[test]
fn failed_check_exits_1() {
    let tmp = tempfile::tempdir().unwrap();
    let text = SMALL.replace(
        "checks = [\"mass\", \"benilan\", \"retention\"]",
        "checks = [\"mass\"]\nmass_drift = 1e-300",
    );
    let config = write_config(tmp.path(), "strict.toml", &text);
    let out = tmp.path().join("strict");
    let o = hypme(&["run", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = hypme(&["validate", "--dir", out.to_str().unwrap()]);
    assert_eq!(code(&o), 1, "{}", String::from_utf8_lossy(&o.stdout));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL mass"));
}

#[test]
fn solver_failure_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let text = format!("{SMALL}\n[solver]\nauto_extend = false\n").replace("x_max = 2", "x_max = 0.3");
    let config = write_config(tmp.path(), "tight.toml", &text);
    let o = hypme(&["run", "--config", config.to_str().unwrap(), "--out", tmp.path().join("t").to_str().unwrap()]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
}
