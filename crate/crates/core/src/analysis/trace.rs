//! Checks computed from solver traces.

use crate::analysis::fit::{fit_line, fit_log_growth, FitResult};
use crate::error::{Error, Result};
use crate::exact::{log_cone, singular_barenblatt_energy, Barenblatt};
use crate::geometry::sphere_area;
use crate::interp::MonotoneCubic;
use crate::params::ModelParams;
use crate::quadrature::{GL4_NODES, GL4_WEIGHTS};
use crate::solver::{ProblemKind, RunTrace};

/// Piecewise-linear reconstruction through cell centers: flat left of the first
/// center, zero right of the last.
pub fn reconstruct(centers: &[f64], u: &[f64], x: f64) -> f64 {
    let n = centers.len().min(u.len());
    if n == 0 || x > centers[n - 1] {
        return 0.0;
    }
    if x <= centers[0] {
        return u[0];
    }
    let k = centers[..n].partition_point(|&c| c <= x);
    if k >= n {
        return u[n - 1];
    }
    let w = (x - centers[k - 1]) / (centers[k] - centers[k - 1]);
    u[k - 1] + w * (u[k] - u[k - 1])
}

/// `∫ f(x) dx` over `[a, b]` by four-point Gauss on `pieces` equal parts.
fn gauss<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, pieces: usize) -> f64 {
    let mut s = 0.0;
    for k in 0..pieces {
        let lo = a + (b - a) * k as f64 / pieces as f64;
        let hi = a + (b - a) * (k + 1) as f64 / pieces as f64;
        let (c, h) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        for (x, w) in GL4_NODES.iter().zip(GL4_WEIGHTS.iter()) {
            s += w * h * f(c + h * x);
        }
    }
    s
}

fn porous_m(trace: &RunTrace) -> Result<f64> {
    trace
        .problem
        .params()
        .m()
        .ok_or_else(|| Error::Incompatible("check applies to porous medium runs".into()))
}

fn require_geodesic(trace: &RunTrace) -> Result<()> {
    if trace.problem.kind().is_geodesic() {
        Ok(())
    } else {
        Err(Error::Incompatible(format!(
            "check needs a geodesic-radius run, got {}",
            trace.problem.kind()
        )))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileRow {
    pub t: f64,
    /// `t u^(m-1)` at `r = γ log t + ξ`.
    pub values: Vec<f64>,
    /// `sup_ξ |t u^(m-1) - a(b - ξ)₊|`.
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileConvergence {
    pub xi: Vec<f64>,
    pub offset: f64,
    pub rows: Vec<ProfileRow>,
}

impl ProfileConvergence {
    /// Distance at the checkpoint closest to `t` in log scale.
    pub fn distance_near(&self, t: f64) -> Option<f64> {
        self.rows
            .iter()
            .min_by(|a, b| {
                (a.t / t).ln().abs().total_cmp(&(b.t / t).ln().abs())
            })
            .map(|r| r.distance)
    }
}

/// Profile along the moving frame `r = γ log t + ξ` against the limit cone
/// `a(b - ξ)₊`, for every checkpoint whose frame stays inside the domain.
///
/// Values are interpolated with a monotone cubic in `u^(m-1)`.
pub fn profile_convergence(trace: &RunTrace, offset: f64, xi: &[f64]) -> Result<ProfileConvergence> {
    require_geodesic(trace)?;
    let m = porous_m(trace)?;
    let params = trace.problem.params();
    let (a, gamma) = (params.cone_slope(), params.front_rate());
    let centers = trace.problem.grid().centers();
    let x_max = trace.problem.grid().x_max();
    let mut rows = Vec::new();
    for (k, c) in trace.checkpoints.iter().enumerate() {
        if c.t <= 1.0 {
            continue;
        }
        let base = gamma * c.t.ln();
        if xi.iter().any(|x| base + x < 0.0 || base + x > x_max) {
            continue;
        }
        let v: Vec<f64> = trace.padded(k).iter().map(|u| u.powf(m - 1.0)).collect();
        let spline = MonotoneCubic::new(centers.clone(), v);
        let values: Vec<f64> = xi.iter().map(|x| c.t * spline.eval(base + x)).collect();
        let distance = values
            .iter()
            .zip(xi)
            .map(|(v, x)| (v - a * (offset - x).max(0.0)).abs())
            .fold(0.0, f64::max);
        rows.push(ProfileRow {
            t: c.t,
            values,
            distance,
        });
    }
    if rows.is_empty() {
        return Err(Error::Domain(
            "the ξ-grid leaves the domain at every checkpoint".into(),
        ));
    }
    Ok(ProfileConvergence {
        xi: xi.to_vec(),
        offset,
        rows,
    })
}

/// `(t, ‖u‖^(m-1) t / log t)` for checkpoints in `window` (with `t > 1`), and
/// the max/min ratio of the series.
pub fn sup_norm_law(trace: &RunTrace, window: (f64, f64)) -> Result<(Vec<(f64, f64)>, f64)> {
    let m = porous_m(trace)?;
    let series: Vec<(f64, f64)> = trace
        .checkpoints
        .iter()
        .filter(|c| c.t > 1.0 && c.t >= window.0 * (1.0 - 1e-9) && c.t <= window.1 * (1.0 + 1e-9))
        .map(|c| (c.t, c.sup.powf(m - 1.0) * c.t / c.t.ln()))
        .collect();
    if series.len() < 2 {
        return Err(Error::Insufficient("sup-norm law needs two checkpoints".into()));
    }
    let max = series.iter().map(|s| s.1).fold(f64::MIN, f64::max);
    let min = series.iter().map(|s| s.1).fold(f64::MAX, f64::min);
    Ok((series, if min > 0.0 { max / min } else { f64::INFINITY }))
}

/// `min (u_(k+1) - u_k)/(t_(k+1) - t_k) + u_k/((m-1) t_k)` over cells and
/// consecutive checkpoints with `t_k ≥ t_min`; for the p-Laplacian `m - 1`
/// becomes `p - 2`, the operator being homogeneous of degree `p - 1`.
///
/// The left-point form is nonnegative for exact solutions: integrating the
/// estimate gives `u(t₂) ≥ u(t₁)(t₁/t₂)^(1/(m-1))`, and that power is convex.
pub fn benilan_margin(trace: &RunTrace, t_min: f64) -> Result<f64> {
    let params = trace.problem.params();
    let m = params.m().or(params.p().map(|p| p - 1.0)).expect("one exponent is set");
    let mut margin = f64::INFINITY;
    let cps = &trace.checkpoints;
    for k in 0..cps.len().saturating_sub(1) {
        let (a, b) = (&cps[k], &cps[k + 1]);
        if a.t < t_min || a.t <= 0.0 {
            continue;
        }
        let dt = b.t - a.t;
        for (i, &ua) in a.u.iter().enumerate() {
            let ub = b.u.get(i).copied().unwrap_or(0.0);
            let v = (ub - ua) / dt + ua / ((m - 1.0) * a.t);
            margin = margin.min(v);
        }
    }
    if margin.is_infinite() {
        return Err(Error::Insufficient(
            "Bénilan check needs two checkpoints past t_min".into(),
        ));
    }
    Ok(margin)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Retention {
    /// Cells positive at one checkpoint and zero at the next.
    pub lost_cells: usize,
    /// Largest backward step of the outer support edge.
    pub edge_retreat: f64,
}

pub fn retention(trace: &RunTrace) -> Retention {
    let faces = trace.problem.grid().faces();
    let mut lost = 0;
    let mut retreat: f64 = 0.0;
    let edge = |u: &[f64]| {
        u.iter()
            .rposition(|v| *v > 0.0)
            .map(|i| faces[i + 1])
            .unwrap_or(0.0)
    };
    for w in trace.checkpoints.windows(2) {
        for (i, &v) in w[0].u.iter().enumerate() {
            if v > 0.0 && w[1].u.get(i).copied().unwrap_or(0.0) <= 0.0 {
                lost += 1;
            }
        }
        retreat = retreat.max(edge(&w[0].u) - edge(&w[1].u));
    }
    Retention {
        lost_cells: lost,
        edge_retreat: retreat,
    }
}

/// Relative `L¹(ℍⁿ)` discrepancy between a hyperbolic run and a weighted run
/// pulled back through the coordinate map, at every pair of checkpoints
/// related by the weight's time rescale.
pub fn compare_transform(hyper: &RunTrace, weighted: &RunTrace) -> Result<Vec<(f64, f64)>> {
    if hyper.problem.kind() != ProblemKind::HyperbolicRadial
        || weighted.problem.kind() != ProblemKind::WeightedEuclidean
    {
        return Err(Error::Incompatible(
            "compare_transform needs a hyperbolic-radial and a weighted-euclidean trace".into(),
        ));
    }
    if hyper.problem.params().n != weighted.problem.params().n
        || hyper.problem.params().diffusion != weighted.problem.params().diffusion
    {
        return Err(Error::Incompatible("traces have different parameters".into()));
    }
    let map = weighted.problem.map().expect("weighted problem has a map");
    let scale = weighted.problem.weight_scale();
    let nm1 = hyper.problem.params().n as i32 - 1;
    let hc = hyper.problem.grid().centers();
    let wc = weighted.problem.grid().centers();
    let faces = hyper.problem.grid().faces();
    let mut out = Vec::new();
    for (kh, ch) in hyper.checkpoints.iter().enumerate() {
        let Some(kw) = weighted
            .checkpoints
            .iter()
            .position(|c| (c.t * scale - ch.t).abs() <= 1e-9 * ch.t.max(1e-300))
        else {
            continue;
        };
        let (uh, uw) = (hyper.padded(kh), weighted.padded(kw));
        let (mut diff, mut norm) = (0.0, 0.0);
        for i in 0..hc.len() {
            let (a, b) = (faces[i], faces[i + 1]);
            let err = std::cell::RefCell::new(None);
            let d = gauss(
                |r| {
                    let s = match map.s_of_r(r) {
                        Ok(s) => s,
                        Err(e) => {
                            err.borrow_mut().get_or_insert(e);
                            return 0.0;
                        }
                    };
                    (reconstruct(&hc, &uh, r) - reconstruct(&wc, &uw, s)).abs()
                        * r.sinh().powi(nm1)
                },
                a,
                b,
                2,
            );
            if let Some(e) = err.into_inner() {
                return Err(e);
            }
            diff += d;
            norm += gauss(|r| reconstruct(&hc, &uh, r).abs() * r.sinh().powi(nm1), a, b, 2);
        }
        out.push((ch.t, if norm > 0.0 { diff / norm } else { diff }));
    }
    if out.is_empty() && !hyper.checkpoints.is_empty() {
        return Err(Error::Incompatible(
            "no checkpoint pair satisfies t_hyperbolic = scale · t_weighted".into(),
        ));
    }
    Ok(out)
}

/// `L¹(ℝⁿ)` distance between the run, read as a function of Euclidean radius,
/// and the Barenblatt solution of the same mass, per checkpoint.
pub fn small_time_barenblatt(trace: &RunTrace) -> Result<Vec<(f64, f64)>> {
    let kind = trace.problem.kind();
    if !matches!(kind, ProblemKind::HyperbolicRadial | ProblemKind::Euclidean) {
        return Err(Error::Incompatible(format!(
            "small-time comparison needs a hyperbolic-radial or euclidean run, got {kind}"
        )));
    }
    porous_m(trace)?;
    let params = *trace.problem.params();
    let bb = Barenblatt::new(&params)?;
    let omega = sphere_area(params.n);
    let nm1 = params.n as i32 - 1;
    let centers = trace.problem.grid().centers();
    let faces = trace.problem.grid().faces();
    let mut out = Vec::new();
    for (k, c) in trace.checkpoints.iter().enumerate() {
        let u = trace.padded(k);
        let edge = bb.support_radius(c.t);
        let mut dist = 0.0;
        for i in 0..centers.len() {
            let (a, b) = (faces[i], faces[i + 1]);
            let f = |r: f64| (reconstruct(&centers, &u, r) - bb.eval(r, c.t)).abs() * r.powi(nm1);
            dist += if edge > a && edge < b {
                gauss(f, a, edge, 2) + gauss(f, edge, b, 2)
            } else {
                gauss(f, a, b, 2)
            };
        }
        // Mass of the Barenblatt solution beyond the grid.
        if edge > trace.problem.grid().x_max() {
            dist += gauss(
                |r| bb.eval(r, c.t) * r.powi(nm1),
                trace.problem.grid().x_max(),
                edge,
                64,
            );
        }
        out.push((c.t, omega * dist));
    }
    Ok(out)
}

/// Discrete `L¹` error of checkpoint `k` against the exact cell averages of `exact`.
pub fn cell_l1_error(trace: &RunTrace, k: usize, exact: &[f64]) -> f64 {
    let u = trace.padded(k);
    trace
        .problem
        .measure()
        .iter()
        .zip(u.iter().zip(exact))
        .map(|(v, (a, b))| v * (a - b).abs())
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DarcyPoint {
    pub t: f64,
    /// Centered difference of the front series.
    pub speed: f64,
    /// `-∂ₓp` fitted over the band behind the front.
    pub pressure_slope: f64,
    pub deviation: f64,
}

/// Front speed against the pressure gradient behind the front, at checkpoints in `window`.
///
/// The slope is a least-squares line through the pressure at cell centers in
/// `[R - band, R - skip)`, where `skip` is two cells.
pub fn darcy_check(trace: &RunTrace, window: (f64, f64), band: f64) -> Result<Vec<DarcyPoint>> {
    let m = porous_m(trace)?;
    let grid = trace.problem.grid();
    let centers = grid.centers();
    let cps = &trace.checkpoints;
    let mut out = Vec::new();
    for k in 1..cps.len().saturating_sub(1) {
        let c = &cps[k];
        if c.t < window.0 * (1.0 - 1e-9) || c.t > window.1 * (1.0 + 1e-9) {
            continue;
        }
        let (r0, r1) = (cps[k - 1].front, cps[k + 1].front);
        if !(r0.is_finite() && r1.is_finite() && c.front.is_finite()) {
            continue;
        }
        let speed = (r1 - r0) / (cps[k + 1].t - cps[k - 1].t);
        let i_front = grid.locate(c.front);
        let skip = 2.0 * grid.width(i_front);
        let (mut xs, mut ps) = (Vec::new(), Vec::new());
        for (i, &x) in centers.iter().enumerate().take(c.u.len()) {
            if x >= c.front - band && x < c.front - skip && c.u[i] > 0.0 {
                xs.push(x);
                ps.push(m / (m - 1.0) * c.u[i].powf(m - 1.0));
            }
        }
        if xs.len() < 3 {
            return Err(Error::Insufficient(format!(
                "front unresolved at t = {}: {} cells in the Darcy band",
                c.t,
                xs.len()
            )));
        }
        let (slope, _) = fit_line(&xs, &ps)?;
        let pressure_slope = -slope;
        out.push(DarcyPoint {
            t: c.t,
            speed,
            pressure_slope,
            deviation: ((speed - pressure_slope) / pressure_slope).abs(),
        });
    }
    if out.is_empty() {
        return Err(Error::Insufficient(
            "Darcy check needs three checkpoints with fronts in the window".into(),
        ));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSupport {
    pub beta: f64,
    /// `(t, R(t) t^(-β))` over the window.
    pub ratio: Vec<(f64, f64)>,
    /// `(max - min)/final` of the ratio over the last decade.
    pub variation: f64,
    /// `(t, ‖u‖^(m-1) t / log t)`.
    pub sup: Vec<(f64, f64)>,
    pub sup_ratio: f64,
    /// Final value of the ratio.
    pub a_fit: f64,
    /// `A` predicted from the energy via `E = k A^(n-2)`.
    pub a_energy: f64,
}

/// Support and upper-bound theorems for the weighted problem.
pub fn validate_weighted_support(trace: &RunTrace, window: (f64, f64)) -> Result<WeightedSupport> {
    if trace.problem.kind() != ProblemKind::WeightedEuclidean {
        return Err(Error::Incompatible(
            "weighted support check needs a weighted-euclidean run".into(),
        ));
    }
    let params = *trace.problem.params();
    let beta = params.weighted_beta()?;
    let ratio: Vec<(f64, f64)> = trace
        .checkpoints
        .iter()
        .filter(|c| {
            c.front.is_finite() && c.t >= window.0 * (1.0 - 1e-9) && c.t <= window.1 * (1.0 + 1e-9)
        })
        .map(|c| (c.t, c.front * c.t.powf(-beta)))
        .collect();
    let Some(&(t_last, a_fit)) = ratio.last() else {
        return Err(Error::Insufficient("no fronts in the weighted window".into()));
    };
    let decade: Vec<f64> = ratio
        .iter()
        .filter(|(t, _)| *t >= 0.1 * t_last * (1.0 - 1e-9))
        .map(|r| r.1)
        .collect();
    if decade.len() < 2 {
        return Err(Error::Insufficient("last decade has fewer than two fronts".into()));
    }
    let max = decade.iter().cloned().fold(f64::MIN, f64::max);
    let min = decade.iter().cloned().fold(f64::MAX, f64::min);
    let (sup, sup_ratio) = sup_norm_law(trace, window)?;
    let energy = trace.initial_mass;
    let k = singular_barenblatt_energy(&params, 1.0)?;
    let a_energy = (energy / k).powf(1.0 / (params.n as f64 - 2.0));
    Ok(WeightedSupport {
        beta,
        ratio,
        variation: (max - min) / a_fit,
        sup,
        sup_ratio,
        a_fit,
        a_energy,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeDominance {
    pub calibration_time: f64,
    pub offset: f64,
    /// `max (u - Ũ)` over cells and later checkpoints.
    pub max_violation: f64,
}

/// Calibrates the log-cone offset so the cone covers the run at the first
/// checkpoint at or after `t0`, then measures how far later checkpoints exceed it.
pub fn cone_dominance(trace: &RunTrace, t0: f64) -> Result<ConeDominance> {
    require_geodesic(trace)?;
    let m = porous_m(trace)?;
    let params: ModelParams = *trace.problem.params();
    let (a, gamma) = (params.cone_slope(), params.front_rate());
    let centers = trace.problem.grid().centers();
    let k0 = trace
        .checkpoints
        .iter()
        .position(|c| c.t >= t0 * (1.0 - 1e-9))
        .ok_or_else(|| Error::Insufficient(format!("no checkpoint at or after {t0}")))?;
    let c0 = &trace.checkpoints[k0];
    let offset = c0
        .u
        .iter()
        .zip(&centers)
        .filter(|(u, _)| **u > 0.0)
        .map(|(u, x)| c0.t * u.powf(m - 1.0) / a + x)
        .fold(f64::MIN, f64::max)
        - gamma * c0.t.ln();
    if offset == f64::MIN {
        return Err(Error::NoSupport);
    }
    let mut worst = f64::MIN;
    for c in &trace.checkpoints[k0 + 1..] {
        for (u, x) in c.u.iter().zip(&centers) {
            worst = worst.max(u - log_cone(*x, c.t, &params, offset)?);
        }
    }
    Ok(ConeDominance {
        calibration_time: c0.t,
        offset,
        max_violation: if worst == f64::MIN { 0.0 } else { worst },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoDimensional {
    pub fit: FitResult,
    pub target_slope: f64,
    pub sup_ratio: f64,
    pub dominance: ConeDominance,
}

/// Logarithmic growth with rate `1/(m-1)`, the sup-norm bracket and upper-cone
/// dominance for a two-dimensional run.
pub fn validate_2d(
    trace: &RunTrace,
    window: (f64, f64),
    sup_window: (f64, f64),
) -> Result<TwoDimensional> {
    let params = trace.problem.params();
    if params.n != 2 {
        return Err(Error::Dimension {
            n: params.n,
            reason: "the two-dimensional theorem needs n = 2",
        });
    }
    if trace.problem.kind() != ProblemKind::HyperbolicRadial {
        return Err(Error::Incompatible(
            "the two-dimensional theorem needs a hyperbolic-radial run".into(),
        ));
    }
    let m = porous_m(trace)?;
    let fit = fit_log_growth(&trace.times(), &trace.fronts(), window)?;
    let (_, sup_ratio) = sup_norm_law(trace, sup_window)?;
    let dominance = cone_dominance(trace, window.0)?;
    Ok(TwoDimensional {
        fit,
        target_slope: 1.0 / (m - 1.0),
        sup_ratio,
        dominance,
    })
}

