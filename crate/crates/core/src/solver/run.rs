use crate::error::{Error, Result};
use crate::solver::front::free_boundary;
use crate::solver::problem::Problem;
use crate::solver::step::{
    effective_conductance, explicit_dt_bound_with, explicit_step_with, implicit_step_with,
    NewtonConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Implicit,
    Explicit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub scheme: Scheme,
    pub newton: NewtonConfig,
    /// First step, and the floor of the `dt ≤ dt_fraction · t` cap.
    pub dt_init: f64,
    pub dt_min: f64,
    pub dt_fraction: f64,
    pub growth: f64,
    /// Grow `dt` at or below this many Newton iterations.
    pub target_low: usize,
    /// Shrink `dt` above this many Newton iterations.
    pub target_high: usize,
    pub cfl: f64,
    /// Steps of exactly this size (except to land on checkpoints); no adaptation.
    pub fixed_dt: Option<f64>,
    pub front_threshold: f64,
    pub auto_extend: bool,
    pub extend_trigger: f64,
    pub extend_factor: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::Implicit,
            newton: NewtonConfig::default(),
            dt_init: 1e-6,
            dt_min: 1e-14,
            dt_fraction: 0.05,
            growth: 1.3,
            target_low: 3,
            target_high: 5,
            cfl: 0.9,
            fixed_dt: None,
            front_threshold: 1e-6,
            auto_extend: true,
            extend_trigger: 0.9,
            extend_factor: 1.5,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("dt_init", self.dt_init),
            ("dt_min", self.dt_min),
            ("dt_fraction", self.dt_fraction),
            ("newton_tol", self.newton.tol),
            ("cfl", self.cfl),
            ("front_threshold", self.front_threshold),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Parameter {
                    name,
                    reason: format!("must be positive (got {v})"),
                });
            }
        }
        if !(self.growth > 1.0 && self.growth <= 1.3) {
            return Err(Error::Parameter {
                name: "growth",
                reason: format!("must lie in (1, 1.3] (got {})", self.growth),
            });
        }
        if self.front_threshold >= 1.0 {
            return Err(Error::Parameter {
                name: "front_threshold",
                reason: "must be below 1".into(),
            });
        }
        if self.target_low == 0 || self.target_low > self.target_high {
            return Err(Error::Parameter {
                name: "target_iterations",
                reason: "need 0 < low <= high".into(),
            });
        }
        if self.newton.max_iterations <= self.target_high {
            return Err(Error::Parameter {
                name: "max_iterations",
                reason: "must exceed the upper iteration target".into(),
            });
        }
        if !(self.extend_trigger > 0.0 && self.extend_trigger < 1.0) || !(self.extend_factor > 1.0) {
            return Err(Error::Parameter {
                name: "extend",
                reason: "need 0 < trigger < 1 and factor > 1".into(),
            });
        }
        if let Some(dt) = self.fixed_dt {
            if !(dt > 0.0) {
                return Err(Error::Parameter {
                    name: "fixed_dt",
                    reason: format!("must be positive (got {dt})"),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub u: Vec<f64>,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub t: f64,
    /// Cell values on a prefix of the trace's final grid.
    pub u: Vec<f64>,
    pub mass: f64,
    pub sup: f64,
    /// Free-boundary radius in the grid coordinate; NaN without support.
    pub front: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub t: f64,
    pub dt: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub struct RunTrace {
    pub problem: Problem,
    pub checkpoints: Vec<Checkpoint>,
    pub steps: Vec<StepRecord>,
    pub rejected: usize,
    pub extensions: usize,
    pub initial_mass: f64,
}

impl RunTrace {
    pub fn times(&self) -> Vec<f64> {
        self.checkpoints.iter().map(|c| c.t).collect()
    }

    pub fn fronts(&self) -> Vec<f64> {
        self.checkpoints.iter().map(|c| c.front).collect()
    }

    pub fn sups(&self) -> Vec<f64> {
        self.checkpoints.iter().map(|c| c.sup).collect()
    }

    pub fn masses(&self) -> Vec<f64> {
        self.checkpoints.iter().map(|c| c.mass).collect()
    }

    /// Largest `|M(t) - M(0)| / M(0)` over the checkpoints; 0 for a massless run.
    pub fn mass_drift(&self) -> f64 {
        if self.initial_mass == 0.0 {
            return 0.0;
        }
        self.checkpoints
            .iter()
            .map(|c| ((c.mass - self.initial_mass) / self.initial_mass).abs())
            .fold(0.0, f64::max)
    }

    /// Trace of given states on `problem`'s grid (prefixes allowed), with the
    /// mass, sup and front series recomputed; no step diagnostics. States whose
    /// support reaches the last cell get a NaN front.
    pub fn from_states(problem: Problem, states: Vec<State>, front_threshold: f64) -> Result<Self> {
        let mut checkpoints = Vec::with_capacity(states.len());
        for s in states {
            if s.u.len() > problem.grid().len() {
                return Err(Error::Domain(format!(
                    "state at t = {} has {} cells, grid has {}",
                    s.t,
                    s.u.len(),
                    problem.grid().len()
                )));
            }
            let mut u = s.u;
            let n = u.len();
            u.resize(problem.grid().len(), 0.0);
            let mut c = match record(&problem, &u, s.t, front_threshold) {
                Err(Error::DomainTooSmall { .. }) => record(&problem, &[], s.t, front_threshold)?,
                other => other?,
            };
            c.u = u;
            c.mass = problem.mass(&c.u);
            c.sup = c.u.iter().cloned().fold(0.0, f64::max);
            c.u.truncate(n);
            checkpoints.push(c);
        }
        let initial_mass = checkpoints.first().map_or(0.0, |c| c.mass);
        Ok(Self {
            problem,
            checkpoints,
            steps: Vec::new(),
            rejected: 0,
            extensions: 0,
            initial_mass,
        })
    }

    /// Checkpoint values padded with zeros to the final grid.
    pub fn padded(&self, k: usize) -> Vec<f64> {
        let mut u = self.checkpoints[k].u.clone();
        u.resize(self.problem.grid().len(), 0.0);
        u
    }
}

fn record(problem: &Problem, u: &[f64], t: f64, threshold: f64) -> Result<Checkpoint> {
    let front = match free_boundary(problem.grid(), u, threshold, problem.front_power()) {
        Ok(r) => r,
        Err(Error::NoSupport) => f64::NAN,
        Err(e) => return Err(e),
    };
    Ok(Checkpoint {
        t,
        u: u.to_vec(),
        mass: problem.mass(u),
        sup: u.iter().cloned().fold(0.0, f64::max),
        front,
    })
}

/// Grows the grid while the support reaches past `trigger · x_max`.
fn ensure_room(
    problem: &mut Problem,
    u: &mut Vec<f64>,
    cond: &mut Vec<f64>,
    cfg: &SolverConfig,
) -> Result<usize> {
    let mut grown = 0;
    loop {
        let last = match u.iter().rposition(|v| *v > 0.0) {
            Some(i) => i,
            None => return Ok(grown),
        };
        let edge = problem.grid().faces()[last + 1];
        let x_max = problem.grid().x_max();
        if edge < cfg.extend_trigger * x_max {
            return Ok(grown);
        }
        if !cfg.auto_extend {
            if last + 1 >= u.len() {
                return Err(Error::DomainTooSmall { x_max });
            }
            return Ok(grown);
        }
        let grid = problem.grid().extended(x_max * cfg.extend_factor);
        problem.set_grid(grid)?;
        u.resize(problem.grid().len(), 0.0);
        *cond = effective_conductance(problem);
        grown += 1;
    }
}

/// Advances to each checkpoint in turn, landing on it exactly.
pub fn run(
    mut problem: Problem,
    initial: State,
    cfg: &SolverConfig,
    checkpoints: &[f64],
) -> Result<RunTrace> {
    cfg.validate()?;
    if initial.u.len() != problem.grid().len() {
        return Err(Error::Domain(format!(
            "initial state has {} cells, grid has {}",
            initial.u.len(),
            problem.grid().len()
        )));
    }
    if initial.u.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
        return Err(Error::Domain(
            "initial state must be finite and nonnegative".into(),
        ));
    }
    if !checkpoints.windows(2).all(|w| w[1] > w[0]) {
        return Err(Error::Domain("checkpoints must be strictly increasing".into()));
    }
    if checkpoints.first().is_some_and(|t0| *t0 < initial.t) {
        return Err(Error::Domain(
            "first checkpoint precedes the initial time".into(),
        ));
    }
    let mut u = initial.u;
    let mut t = initial.t;
    let initial_mass = problem.mass(&u);
    let mut cond = effective_conductance(&problem);
    let mut trace = RunTrace {
        problem: problem.clone(),
        checkpoints: Vec::with_capacity(checkpoints.len()),
        steps: Vec::new(),
        rejected: 0,
        extensions: 0,
        initial_mass,
    };
    trace.extensions += ensure_room(&mut problem, &mut u, &mut cond, cfg)?;
    let mut dt = cfg.fixed_dt.unwrap_or(cfg.dt_init);
    let empty = initial_mass == 0.0;

    for &target in checkpoints {
        while t < target && !empty {
            let remain = target - t;
            let nominal = match cfg.fixed_dt {
                Some(h) => h.min(dt),
                None => dt.min((cfg.dt_fraction * t).max(cfg.dt_init)),
            };
            let mut h = nominal;
            if cfg.scheme == Scheme::Explicit {
                h = h.min(cfg.cfl * explicit_dt_bound_with(&problem, &cond, &u));
            }
            let landing = h >= remain * (1.0 - 1e-12);
            if landing {
                h = remain;
            } else if cfg.fixed_dt.is_none() && 2.0 * h > remain {
                h = 0.5 * remain;
            }
            let outcome = match cfg.scheme {
                Scheme::Implicit => implicit_step_with(&problem, &cond, &u, h, &cfg.newton),
                Scheme::Explicit => {
                    explicit_step_with(&problem, &cond, &u, h, cfg.cfl).map(|next| (next, 0))
                }
            };
            match outcome {
                Ok((next, iterations)) => {
                    u = next;
                    t = if landing { target } else { t + h };
                    trace.steps.push(StepRecord { t, dt: h, iterations });
                    if cfg.fixed_dt.is_none() && cfg.scheme == Scheme::Implicit {
                        if iterations <= cfg.target_low && h >= 0.999 * nominal {
                            dt = nominal * cfg.growth;
                        } else if iterations > cfg.target_high {
                            dt = nominal * 0.7;
                        } else {
                            dt = nominal;
                        }
                    } else if cfg.scheme == Scheme::Explicit && cfg.fixed_dt.is_none() {
                        dt = (h * cfg.growth).max(dt);
                    }
                    trace.extensions += ensure_room(&mut problem, &mut u, &mut cond, cfg)?;
                }
                Err(Error::NewtonDivergence { .. }) => {
                    trace.rejected += 1;
                    dt = 0.5 * h;
                    if dt < cfg.dt_min {
                        return Err(Error::DtUnderflow { t, dt });
                    }
                }
                Err(e) => return Err(e),
            }
        }
        t = t.max(target);
        trace
            .checkpoints
            .push(record(&problem, &u, target, cfg.front_threshold)?);
    }
    trace.problem = problem;
    Ok(trace)
}

/// Log-spaced times `t0 · (t1/t0)^(k/(count-1))`, endpoints exact.
pub fn log_spaced(t0: f64, t1: f64, count: usize) -> Result<Vec<f64>> {
    if !(t0 > 0.0) || !(t1 > t0) || count < 2 {
        return Err(Error::Domain(format!(
            "log-spaced checkpoints need 0 < t0 < t1 and count >= 2 (got {t0}, {t1}, {count})"
        )));
    }
    let ratio = (t1 / t0).ln();
    let mut times: Vec<f64> = (0..count)
        .map(|k| t0 * (ratio * k as f64 / (count - 1) as f64).exp())
        .collect();
    times[0] = t0;
    times[count - 1] = t1;
    Ok(times)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ModelParams;
    use crate::solver::grid::Grid;
    use crate::solver::init::dirac_init;
    use crate::solver::problem::ProblemKind;

    fn hyper(x_max: f64) -> Problem {
        let p = ModelParams::porous(2.0, 3, 1.0).unwrap();
        Problem::build(ProblemKind::HyperbolicRadial, p, Grid::uniform(0.02, x_max).unwrap()).unwrap()
    }

    #[test]
    fn zero_data_gives_zero_trace() {
        let p = hyper(2.0);
        let n = p.grid().len();
        let trace = run(
            p,
            State { u: vec![0.0; n], t: 0.0 },
            &SolverConfig::default(),
            &[0.5, 1.0],
        )
        .unwrap();
        assert_eq!(trace.times(), vec![0.5, 1.0]);
        for c in &trace.checkpoints {
            assert!(c.u.iter().all(|v| *v == 0.0));
            assert!(c.front.is_nan());
        }
    }

    #[test]
    fn lands_on_checkpoints_and_conserves_mass() {
        let p = hyper(1.0);
        let u = dirac_init(&p, 0.2).unwrap();
        let times = log_spaced(0.01, 10.0, 7).unwrap();
        let trace = run(p, State { u, t: 0.0 }, &SolverConfig::default(), &times).unwrap();
        assert_eq!(trace.times(), times);
        assert!(trace.mass_drift() < 1e-10, "{}", trace.mass_drift());
        assert!(trace.extensions > 0);
        let fronts = trace.fronts();
        assert!(fronts.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        assert!(trace.steps.len() > 10);
    }

    #[test]
    fn explicit_matches_implicit_roughly() {
        let p = hyper(2.0);
        let u = dirac_init(&p, 0.3).unwrap();
        let explicit = SolverConfig {
            scheme: Scheme::Explicit,
            ..SolverConfig::default()
        };
        let a = run(p.clone(), State { u: u.clone(), t: 0.0 }, &explicit, &[0.5]).unwrap();
        let b = run(p, State { u, t: 0.0 }, &SolverConfig::default(), &[0.5]).unwrap();
        assert!(a.mass_drift() < 1e-12);
        let (ua, ub) = (a.padded(0), b.padded(0));
        let diff: f64 = a
            .problem
            .measure()
            .iter()
            .zip(ua.iter().zip(&ub))
            .map(|(v, (x, y))| v * (x - y).abs())
            .sum();
        assert!(diff < 0.02, "{diff}");
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = hyper(2.0);
        let n = p.grid().len();
        let st = State { u: vec![0.0; n], t: 1.0 };
        assert!(run(p.clone(), st.clone(), &SolverConfig::default(), &[0.5]).is_err());
        assert!(run(p.clone(), st.clone(), &SolverConfig::default(), &[2.0, 1.5]).is_err());
        let bad = SolverConfig {
            growth: 2.0,
            ..SolverConfig::default()
        };
        assert!(run(p, st, &bad, &[2.0]).is_err());
    }

    #[test]
    fn log_spacing() {
        let t = log_spaced(1e2, 1e4, 5).unwrap();
        assert_eq!(t[0], 1e2);
        assert_eq!(t[4], 1e4);
        assert!((t[2] - 1e3).abs() < 1e-9);
    }
}
