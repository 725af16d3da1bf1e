//! Acceptance gate: every criterion evaluated from the committed configs.
//!
//! Each criterion restates its target here and compares it with the target
//! the config applied, so a loosened config fails the gate.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use hypme::analysis::{Target, ValidationReport};
use hypme_cli::scenario::{self, TraceStore};
use hypme_cli::RunConfig;

const CONFIGS: [&str; 10] = [
    "static",
    "barenblatt-h",
    "barenblatt-h2",
    "hyperbolic-m1",
    "hyperbolic-m4",
    "transform-hyperbolic",
    "transform-weighted",
    "weighted",
    "plap",
    "two-d",
];

fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(format!("{name}.toml"))
}

struct Evaluated {
    config: RunConfig,
    report: ValidationReport,
    notes: Vec<String>,
    seconds: f64,
}

/// Runs and validates every config, sharing reference runs.
fn evaluate_all() -> BTreeMap<&'static str, Evaluated> {
    let mut store = TraceStore::in_memory();
    let mut out = BTreeMap::new();
    for name in CONFIGS {
        let path = config_path(name);
        let start = Instant::now();
        let config = RunConfig::load(&path).unwrap_or_else(|e| panic!("{name}: {e}"));
        let trace = if config.problem.is_some() {
            Some(store.get(&path).unwrap_or_else(|e| panic!("{name}: {e}")).1)
        } else {
            None
        };
        let v = scenario::validate(&config, trace.as_deref(), &mut store)
            .unwrap_or_else(|e| panic!("{name}: {e}"));
        out.insert(
            name,
            Evaluated {
                config,
                report: v.report,
                notes: v.notes,
                seconds: start.elapsed().as_secs_f64(),
            },
        );
    }
    out
}

struct Criterion {
    id: u32,
    title: &'static str,
    budget_seconds: f64,
    /// Runs counted against the budget besides those holding the checks.
    also: Vec<&'static str>,
    items: Vec<(&'static str, &'static str, Target)>,
}

fn criteria(all: &BTreeMap<&'static str, Evaluated>) -> Vec<Criterion> {
    use Target::*;
    let main = "hyperbolic-m1";
    let mut retention = Vec::new();
    for name in CONFIGS.into_iter().filter(|n| *n != "static") {
        let h = all[name].config.grid.width();
        retention.push((name, "benilan", AtLeast(-10.0 * h * h)));
        retention.push((name, "retention", AtMost(0.0)));
    }
    vec![
        Criterion {
            id: 1,
            title: "half-space wave is exact",
            also: vec![],
            budget_seconds: 1.0,
            items: vec![("static", "static-gtw", AtMost(1e-8))],
        },
        Criterion {
            id: 2,
            title: "log-cone is a supersolution",
            also: vec![],
            budget_seconds: 1.0,
            items: vec![("static", "static-cone", AtLeast(-1e-10))],
        },
        Criterion {
            id: 3,
            title: "n = 3 coordinate map",
            also: vec![],
            budget_seconds: 1.0,
            items: vec![
                ("static", "static-map", AtMost(1e-8)),
                ("static", "static-map-roundtrip", AtMost(1e-10)),
            ],
        },
        Criterion {
            id: 4,
            title: "second-order consistency on Barenblatt data",
            also: vec!["barenblatt-h2"],
            budget_seconds: 60.0,
            items: vec![("barenblatt-h", "consistency", Bracket { lo: 3.2, hi: 4.8 })],
        },
        Criterion {
            id: 5,
            title: "mass conservation to t = 1e4",
            also: vec![],
            budget_seconds: 600.0,
            items: vec![(main, "mass", AtMost(1e-8))],
        },
        Criterion {
            id: 6,
            title: "free-boundary rate",
            also: vec![],
            budget_seconds: 600.0,
            items: vec![(main, "log-growth", Bracket { lo: 0.45, hi: 0.55 })],
        },
        Criterion {
            id: 7,
            title: "profile convergence",
            also: vec![],
            budget_seconds: 600.0,
            items: vec![(main, "profile", AtMost(0.5))],
        },
        Criterion {
            id: 8,
            title: "sup-norm law",
            also: vec![],
            budget_seconds: 600.0,
            items: vec![(main, "sup-law", AtMost(2.0))],
        },
        Criterion {
            id: 9,
            title: "hyperbolic vs weighted formulation",
            also: vec!["transform-weighted"],
            budget_seconds: 300.0,
            items: vec![("transform-hyperbolic", "transform", AtMost(0.01))],
        },
        Criterion {
            id: 10,
            title: "small-time Barenblatt limit",
            also: vec![],
            budget_seconds: 120.0,
            items: vec![(main, "small-time", AtMost(1.0))],
        },
        Criterion {
            id: 11,
            title: "weighted support growth",
            also: vec![],
            budget_seconds: 600.0,
            items: vec![("weighted", "weighted-support", AtMost(0.15))],
        },
        Criterion {
            id: 12,
            title: "Bénilan margin and retention on all runs",
            also: vec![],
            budget_seconds: f64::INFINITY,
            items: retention,
        },
        Criterion {
            id: 13,
            title: "heat kernels",
            also: vec![],
            budget_seconds: 30.0,
            items: vec![
                ("static", "static-heat-mass3", AtMost(1e-6)),
                ("static", "static-heat-residual", AtMost(1e-6)),
                ("static", "static-heat-mass2", AtMost(1e-4)),
                ("static", "static-heat-positive", AtLeast(f64::MIN_POSITIVE)),
            ],
        },
        Criterion {
            id: 14,
            title: "p-Laplacian profile and rate",
            also: vec![],
            budget_seconds: 600.0,
            items: vec![
                ("static", "static-plap", AtMost(1e-8)),
                ("plap", "log-growth", Bracket { lo: 0.4, hi: 0.6 }),
            ],
        },
        Criterion {
            id: 15,
            title: "two-dimensional rate",
            also: vec![],
            budget_seconds: 600.0,
            items: vec![("two-d", "two-d-slope", Bracket { lo: 0.85, hi: 1.15 })],
        },
        Criterion {
            id: 16,
            title: "mass-scaling of the offset",
            also: vec![main],
            budget_seconds: 1200.0,
            items: vec![(
                "hyperbolic-m4",
                "mass-scaling",
                Within {
                    value: 0.5 * 4f64.ln(),
                    tol: 0.1,
                },
            )],
        },
    ]
}

#[test]
fn acceptance_criteria() {
    let all = evaluate_all();
    let mut failed = Vec::new();
    println!();
    for c in criteria(&all) {
        let mut pass = true;
        let mut details = Vec::new();
        let mut configs: Vec<&str> = c.items.iter().map(|i| i.0).chain(c.also.iter().copied()).collect();
        configs.sort_unstable();
        configs.dedup();
        let seconds: f64 = configs.iter().map(|n| all[n].seconds).sum();
        for (config, check, expected) in &c.items {
            let ev = &all[config];
            match ev.report.get(check) {
                Some(found) if found.target == *expected => {
                    pass &= found.pass;
                    details.push(format!("{config}/{check} = {:.4e} vs {}", found.measured, expected));
                }
                Some(found) => {
                    pass = false;
                    details.push(format!(
                        "{config}/{check}: config target {} differs from {}",
                        found.target, expected
                    ));
                }
                None => {
                    pass = false;
                    details.push(format!("{config}/{check}: not evaluated {:?}", ev.notes));
                }
            }
        }
        if seconds > c.budget_seconds {
            pass = false;
            details.push(format!("over the {} s budget", c.budget_seconds));
        }
        let shown = if c.id == 12 {
            vec![format!("{} checks over {} runs", c.items.len(), c.items.len() / 2)]
        } else {
            details.clone()
        };
        println!(
            "criterion {:>2} {}: {} | {} ({:.2} s)",
            c.id,
            if pass { "PASS" } else { "FAIL" },
            c.title,
            shown.join("; "),
            seconds
        );
        if !pass {
            failed.push((c.id, details));
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
