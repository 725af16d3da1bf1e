//! CSV and `key=value` files of a run directory.
//!
//! Numbers are written with 17 significant digits so that reading a file back
//! reproduces the stored doubles exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use hypme::analysis::ValidationReport;
use hypme::solver::{Problem, RunTrace, State};
use hypme::{Error, Result};

pub const TRACE_FILE: &str = "trace.csv";
pub const CELLS_FILE: &str = "cells.csv";
pub const STEPS_FILE: &str = "steps.csv";
pub const META_FILE: &str = "meta";
pub const CONFIG_FILE: &str = "config.toml";
pub const REPORT_FILE: &str = "report.csv";

pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn profile_file(k: usize) -> String {
    format!("profile_{k}.csv")
}

/// CSV text with a hash comment, a header row and formatted rows.
pub fn csv_text(hash: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut s = format!("# config_hash={hash}\n{}\n", header.join(","));
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(num).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

fn format_error(path: &Path, message: impl Into<String>) -> Error {
    Error::Format {
        path: path.display().to_string(),
        message: message.into(),
    }
}

/// Parsed numeric CSV: header names and rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub hash: Option<String>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }
}

pub fn read_table(path: &Path) -> Result<Table> {
    let text = fs::read_to_string(path)?;
    let mut hash = None;
    let mut header: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(c) = line.strip_prefix('#') {
            if let Some(h) = c.trim().strip_prefix("config_hash=") {
                hash = Some(h.to_string());
            }
            continue;
        }
        match &header {
            None => header = Some(line.split(',').map(|s| s.trim().to_string()).collect()),
            Some(h) => {
                let row = line
                    .split(',')
                    .map(|s| s.trim().parse::<f64>())
                    .collect::<std::result::Result<Vec<f64>, _>>()
                    .map_err(|e| format_error(path, format!("line {}: {e}", i + 1)))?;
                if row.len() != h.len() {
                    return Err(format_error(
                        path,
                        format!("line {}: {} fields, header has {}", i + 1, row.len(), h.len()),
                    ));
                }
                rows.push(row);
            }
        }
    }
    let header = header.ok_or_else(|| format_error(path, "no header row"))?;
    Ok(Table { header, rows, hash })
}

pub fn write_meta(path: &Path, hash: &str, entries: &BTreeMap<String, String>) -> Result<()> {
    let mut s = format!("# config_hash={hash}\n");
    for (k, v) in entries {
        let _ = writeln!(s, "{k}={v}");
    }
    fs::write(path, s)?;
    Ok(())
}

pub fn read_meta(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path)?;
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format_error(path, format!("line {}: expected key=value", i + 1)))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

pub fn meta_f64(meta: &BTreeMap<String, String>, key: &str, path: &Path) -> Result<f64> {
    meta.get(key)
        .ok_or_else(|| format_error(path, format!("missing key {key}")))?
        .parse()
        .map_err(|e| format_error(path, format!("{key}: {e}")))
}

/// Writes the trace, profiles, cells, step log and meta of a run.
pub fn write_run(
    dir: &Path,
    hash: &str,
    config_text: &str,
    trace: &RunTrace,
    mut meta: BTreeMap<String, String>,
) -> Result<()> {
    fs::create_dir_all(dir)?;
    let p = &trace.problem;
    let trace_rows = trace
        .checkpoints
        .iter()
        .map(|c| vec![c.t, c.mass, c.sup, c.front]);
    fs::write(
        dir.join(TRACE_FILE),
        csv_text(hash, &["t", "mass", "sup", "R"], trace_rows),
    )?;
    let grid = p.grid();
    for (k, c) in trace.checkpoints.iter().enumerate() {
        let rows = c
            .u
            .iter()
            .enumerate()
            .map(|(i, &u)| vec![grid.center(i), u, p.params().pressure_of(u)]);
        fs::write(
            dir.join(profile_file(k)),
            csv_text(hash, &["x", "u", "pressure"], rows),
        )?;
    }
    let faces = grid.faces();
    let cells = (0..grid.len()).map(|i| vec![grid.center(i), faces[i], faces[i + 1], p.measure()[i]]);
    fs::write(
        dir.join(CELLS_FILE),
        csv_text(hash, &["x", "face_lo", "face_hi", "measure"], cells),
    )?;
    let steps = trace
        .steps
        .iter()
        .map(|s| vec![s.t, s.dt, s.iterations as f64]);
    fs::write(
        dir.join(STEPS_FILE),
        csv_text(hash, &["t", "dt", "iterations"], steps),
    )?;
    meta.insert("config_hash".into(), hash.into());
    meta.insert("checkpoints".into(), trace.checkpoints.len().to_string());
    meta.insert("cells".into(), grid.len().to_string());
    meta.insert("x_max".into(), num(grid.x_max()));
    meta.insert("initial_mass".into(), num(trace.initial_mass));
    meta.insert("mass_drift".into(), num(trace.mass_drift()));
    meta.insert("steps".into(), trace.steps.len().to_string());
    meta.insert("rejected".into(), trace.rejected.to_string());
    meta.insert("extensions".into(), trace.extensions.to_string());
    meta.insert("weight_scale".into(), num(p.weight_scale()));
    write_meta(&dir.join(META_FILE), hash, &meta)?;
    fs::write(dir.join(CONFIG_FILE), config_text)?;
    Ok(())
}

/// Rebuilds a trace from a run directory on `problem`, whose grid is extended
/// to the stored domain and checked face by face.
pub fn read_run(dir: &Path, mut problem: Problem, front_threshold: f64) -> Result<RunTrace> {
    let meta_path = dir.join(META_FILE);
    let meta = read_meta(&meta_path)?;
    let x_max = meta_f64(&meta, "x_max", &meta_path)?;
    let initial_mass = meta_f64(&meta, "initial_mass", &meta_path)?;
    let grid = problem.grid().extended(x_max);
    problem.set_grid(grid)?;

    let cells_path = dir.join(CELLS_FILE);
    let cells = read_table(&cells_path)?;
    let stored: Vec<f64> = cells
        .column("face_hi")
        .ok_or_else(|| format_error(&cells_path, "missing face_hi column"))?;
    let faces = &problem.grid().faces()[1..];
    if stored.len() != faces.len()
        || stored.iter().zip(faces).any(|(a, b)| (a - b).abs() > 1e-12 * b.abs().max(1.0))
    {
        return Err(format_error(
            &cells_path,
            "grid does not match the configuration",
        ));
    }

    let trace_path = dir.join(TRACE_FILE);
    let table = read_table(&trace_path)?;
    let times = table
        .column("t")
        .ok_or_else(|| format_error(&trace_path, "missing t column"))?;
    let mut states = Vec::with_capacity(times.len());
    for (k, t) in times.into_iter().enumerate() {
        let path = dir.join(profile_file(k));
        let u = read_table(&path)?
            .column("u")
            .ok_or_else(|| format_error(&path, "missing u column"))?;
        states.push(State { u, t });
    }
    let mut trace = RunTrace::from_states(problem, states, front_threshold)?;
    trace.initial_mass = initial_mass;
    Ok(trace)
}

pub fn write_report(dir: &Path, hash: &str, report: &ValidationReport) -> Result<PathBuf> {
    let mut s = format!("# config_hash={hash}\ncheck,measured,target,tolerance,pass\n");
    for c in &report.checks {
        let (target, tol) = c.target.columns();
        let _ = writeln!(s, "{},{},{},{},{}", c.name, num(c.measured), target, tol, c.pass);
    }
    let path = dir.join(REPORT_FILE);
    fs::write(&path, s)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [0.1, 1.0 / 3.0, 6.02214076e23, -1e-300, 0.0, f64::NAN] {
            let back: f64 = num(v).parse().unwrap();
            assert!(back == v || (v.is_nan() && back.is_nan()), "{v}");
        }
    }

    #[test]
    fn table_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        fs::write(&path, csv_text("abc", &["a", "b"], vec![vec![1.0, 2.5], vec![3.0, f64::NAN]])).unwrap();
        let t = read_table(&path).unwrap();
        assert_eq!(t.header, vec!["a", "b"]);
        assert_eq!(t.hash.as_deref(), Some("abc"));
        assert_eq!(t.column("a").unwrap(), vec![1.0, 3.0]);
        assert!(t.column("b").unwrap()[1].is_nan());
        assert!(t.column("c").is_none());
    }

    #[test]
    fn ragged_rows_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        fs::write(&path, "a,b\n1,2\n3\n").unwrap();
        assert!(matches!(read_table(&path), Err(Error::Format { .. })));
    }

    #[test]
    fn meta_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("meta");
        let mut m = BTreeMap::new();
        m.insert("seed".to_string(), "7".to_string());
        m.insert("kind".to_string(), "euclidean".to_string());
        write_meta(&path, "h", &m).unwrap();
        assert_eq!(read_meta(&path).unwrap(), m);
    }
}
