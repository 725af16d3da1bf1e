//! Asymptotic fits, cross-formulation comparisons and theorem-level checks.

pub mod fit;
pub mod report;
pub mod statics;
pub mod trace;

pub use fit::{fit_line, fit_log_growth, fit_offset, trailing_window, FitResult};
pub use report::{Check, Target, ValidationReport};
pub use trace::{
    benilan_margin, cell_l1_error, compare_transform, cone_dominance, darcy_check,
    profile_convergence, reconstruct, retention, small_time_barenblatt, sup_norm_law,
    validate_2d, validate_weighted_support, ConeDominance, DarcyPoint, ProfileConvergence,
    ProfileRow, Retention, TwoDimensional, WeightedSupport,
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::exact::{log_cone, singular_barenblatt, Barenblatt};
    use crate::params::ModelParams;
    use crate::solver::{cell_averages, log_spaced, Grid, Problem, ProblemKind, RunTrace, State};

    fn sampled<F: Fn(f64, f64) -> f64>(problem: Problem, times: &[f64], f: F) -> RunTrace {
        let centers = problem.grid().centers();
        let states = times
            .iter()
            .map(|&t| State {
                t,
                u: centers.iter().map(|&x| f(x, t)).collect(),
            })
            .collect();
        RunTrace::from_states(problem, states, 1e-6).unwrap()
    }

    fn cone_trace(b: f64) -> RunTrace {
        let p = ModelParams::porous(2.0, 3, 1.0).unwrap();
        let prob =
            Problem::build(ProblemKind::HyperbolicRadial, p, Grid::uniform(0.005, 8.0).unwrap())
                .unwrap();
        let times = log_spaced(1e2, 1e4, 13).unwrap();
        sampled(prob, &times, |x, t| log_cone(x, t, &p, b).unwrap())
    }

    #[test]
    fn log_cone_front_fit() {
        let tr = cone_trace(0.0);
        let f = fit_log_growth(&tr.times(), &tr.fronts(), (1e2, 1e4)).unwrap();
        assert!((f.slope - 0.5).abs() < 2e-3, "{f:?}");
        assert!(f.intercept.abs() < 1e-2);
    }

    #[test]
    fn log_cone_profile_distance_is_interpolation_error() {
        let tr = cone_trace(0.4);
        let xi: Vec<f64> = (0..=40).map(|k| -1.0 + 0.05 * k as f64).collect();
        let pc = profile_convergence(&tr, 0.4, &xi).unwrap();
        assert_eq!(pc.rows.len(), 13);
        for row in &pc.rows {
            assert!(row.distance < 1e-3, "t={} d={}", row.t, row.distance);
            let at_edge = row.values[28];
            assert!(at_edge.abs() < 1e-3);
        }
    }

    #[test]
    fn log_cone_sup_law() {
        let tr = cone_trace(0.0);
        let (series, ratio) = sup_norm_law(&tr, (1e2, 1e4)).unwrap();
        for (t, q) in series {
            assert!((q - 0.125).abs() < 2e-3, "t={t} q={q}");
        }
        assert!(ratio < 1.01);
    }

    #[test]
    fn heat_decay_fails_sup_law() {
        let p = ModelParams::porous(2.0, 3, 1.0).unwrap();
        let prob =
            Problem::build(ProblemKind::HyperbolicRadial, p, Grid::uniform(0.05, 20.0).unwrap())
                .unwrap();
        let times = log_spaced(2.0, 40.0, 8).unwrap();
        let tr = sampled(prob, &times, |x, t| {
            crate::exact::heat_kernel(x, t, 3).unwrap()
        });
        let (_, ratio) = sup_norm_law(&tr, (2.0, 40.0)).unwrap();
        assert!(ratio > 2.0, "{ratio}");
    }

    #[test]
    fn darcy_on_log_cone() {
        let tr = cone_trace(0.3);
        let pts = darcy_check(&tr, (1e2, 1e4), 0.3).unwrap();
        for p in pts {
            assert!(p.deviation < 0.05, "{p:?}");
            assert!((p.pressure_slope * p.t - 0.5).abs() < 1e-6);
        }
    }

    #[test]
    fn benilan_on_exact_barenblatt() {
        let p = ModelParams::porous(2.0, 3, 1.0).unwrap();
        let bb = Barenblatt::new(&p).unwrap();
        let prob = Problem::build(ProblemKind::Euclidean, p, Grid::uniform(0.01, 3.0).unwrap())
            .unwrap();
        let times = log_spaced(0.1, 1.0, 10).unwrap();
        let tr = sampled(prob, &times, |x, t| bb.eval(x, t));
        assert!(benilan_margin(&tr, 0.1).unwrap() >= -1e-6);
        assert_eq!(retention(&tr).lost_cells, 0);
        let d = small_time_barenblatt(&tr).unwrap();
        assert!(d.iter().all(|(_, v)| *v >= 0.0 && *v < 2e-3), "{d:?}");
    }

    #[test]
    fn benilan_on_constant_state() {
        let p = ModelParams::porous(2.0, 3, 1.0).unwrap();
        let prob = Problem::build(ProblemKind::Euclidean, p, Grid::uniform(0.1, 1.0).unwrap())
            .unwrap();
        let tr = sampled(prob, &[1.0, 2.0], |_, _| 0.4);
        let m = benilan_margin(&tr, 0.5).unwrap();
        assert!((m - 0.4).abs() < 1e-15);
        let p = ModelParams::p_laplacian(4.0, 3, 1.0).unwrap();
        let prob = Problem::build(ProblemKind::PlapHyperbolic, p, Grid::uniform(0.1, 1.0).unwrap())
            .unwrap();
        let tr = sampled(prob, &[1.0, 2.0], |_, _| 0.4);
        assert!((benilan_margin(&tr, 0.5).unwrap() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn zero_traces_do_not_differ() {
        let p = ModelParams::porous(2.0, 3, 1.0).unwrap();
        let h = Problem::build(ProblemKind::HyperbolicRadial, p, Grid::uniform(0.05, 3.0).unwrap())
            .unwrap();
        let w = Problem::build(
            ProblemKind::WeightedEuclidean,
            p,
            Grid::graded(1e-3, 1.05, 50.0).unwrap(),
        )
        .unwrap();
        let scale = w.weight_scale();
        let ht = sampled(h, &[1.0, 10.0], |_, _| 0.0);
        let wt = sampled(w, &[1.0 / scale, 10.0 / scale], |_, _| 0.0);
        let d = compare_transform(&ht, &wt).unwrap();
        assert_eq!(d, vec![(1.0, 0.0), (10.0, 0.0)]);
        let bad = sampled(ht.problem.clone(), &[3.0], |_, _| 0.0);
        assert!(compare_transform(&bad, &wt).is_err());
    }

    #[test]
    fn transform_of_exact_pullback_is_small() {
        let p = ModelParams::porous(2.0, 3, 1.0).unwrap();
        let h = Problem::build(ProblemKind::HyperbolicRadial, p, Grid::uniform(0.01, 4.0).unwrap())
            .unwrap();
        let w = Problem::build(
            ProblemKind::WeightedEuclidean,
            p,
            Grid::graded(1e-3, 1.01, 2000.0).unwrap(),
        )
        .unwrap();
        let scale = w.weight_scale();
        let f = |r: f64, t: f64| log_cone(r, t, &p, 0.5).unwrap();
        let ht = sampled(h, &[10.0], f);
        let map = w.map().unwrap().clone();
        let wt = sampled(w, &[10.0 / scale], |s, t| {
            f(map.r_of_s(s).unwrap(), t * scale)
        });
        let d = compare_transform(&ht, &wt).unwrap();
        assert!(d[0].1 < 5e-3, "{d:?}");
    }

    #[test]
    fn singular_barenblatt_support_ratio() {
        let p = ModelParams::porous(2.0, 3, 1.0).unwrap();
        let w = Problem::build(
            ProblemKind::WeightedEuclidean,
            p,
            Grid::graded(1e-3, 1.01, 2000.0).unwrap(),
        )
        .unwrap();
        let a = 0.7;
        let times = log_spaced(1e2, 1e3, 9).unwrap();
        let tr = sampled(w, &times, |s, t| singular_barenblatt(s, t, &p, a).unwrap());
        let ws = validate_weighted_support(&tr, (1e2, 1e3)).unwrap();
        assert_eq!(ws.beta, 1.0);
        for (_, r) in &ws.ratio {
            assert!((r - a).abs() < 0.01 * a, "{r}");
        }
        assert!(ws.variation < 0.02);
    }

    #[test]
    fn dominance_of_cone_over_itself() {
        let tr = cone_trace(0.2);
        let d = cone_dominance(&tr, 1e2).unwrap();
        assert!((d.offset - 0.2).abs() < 1e-12);
        assert!(d.max_violation <= 1e-15);
    }

    #[test]
    fn two_dimensional_guard() {
        let tr = cone_trace(0.0);
        assert!(matches!(
            validate_2d(&tr, (1e2, 1e4), (1e3, 1e4)),
            Err(Error::Dimension { n: 3, .. })
        ));
    }

    #[test]
    fn exact_cell_error_vanishes_for_exact_data() {
        let p = ModelParams::porous(2.0, 3, 1.0).unwrap();
        let bb = Barenblatt::new(&p).unwrap();
        let prob = Problem::build(ProblemKind::Euclidean, p, Grid::uniform(0.02, 2.0).unwrap())
            .unwrap();
        let avg = cell_averages(&prob, |x| Ok(bb.eval(x, 1.0)), Some(bb.support_radius(1.0)))
            .unwrap();
        let tr = RunTrace::from_states(prob, vec![State { t: 1.0, u: avg.clone() }], 1e-6).unwrap();
        assert_eq!(cell_l1_error(&tr, 0, &avg), 0.0);
    }
}
