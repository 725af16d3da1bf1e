//! Initial data on a problem's grid.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::quadrature::{GL4_NODES, GL4_WEIGHTS};
use crate::solver::problem::Problem;

/// Cell averages `∫A f / ∫A`, with the cell split at `kink` when it falls inside.
pub fn cell_averages<F>(problem: &Problem, f: F, kink: Option<f64>) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<f64>,
{
    let faces = problem.grid().faces();
    let mut out = Vec::with_capacity(problem.grid().len());
    for i in 0..problem.grid().len() {
        let (a, b) = (faces[i], faces[i + 1]);
        let mut pieces = vec![a];
        if let Some(k) = kink.filter(|k| *k > a && *k < b) {
            pieces.push(k);
        }
        pieces.push(b);
        let (mut num, mut den) = (0.0, 0.0);
        for w in pieces.windows(2) {
            for sub in 0..4 {
                let lo = w[0] + (w[1] - w[0]) * sub as f64 / 4.0;
                let hi = w[0] + (w[1] - w[0]) * (sub + 1) as f64 / 4.0;
                let (c, h) = (0.5 * (lo + hi), 0.5 * (hi - lo));
                for (x, wt) in GL4_NODES.iter().zip(GL4_WEIGHTS.iter()) {
                    let y = c + h * x;
                    let weight = problem.cell_weight(y)?;
                    num += wt * h * weight * f(y)?;
                    den += wt * h * weight;
                }
            }
        }
        out.push(if den > 0.0 { num / den } else { f(0.5 * (a + b))? });
    }
    Ok(out)
}

/// Scales `u` so that its discrete mass is `mass`.
pub fn normalize_mass(problem: &Problem, u: &mut [f64], mass: f64) -> Result<()> {
    let current = problem.mass(u);
    if !(current > 0.0) {
        return Err(Error::Domain("cannot rescale data without mass".into()));
    }
    let k = mass / current;
    u.iter_mut().for_each(|v| *v *= k);
    Ok(())
}

/// Smooth bump `(1 - (r/w)²)³₊` in the geodesic radius, scaled to the model mass.
///
/// On the weighted kind the bump is laid out in `r(s)`, matching the hyperbolic
/// datum under the change of variables, and the target mass is divided by the
/// weight normalization.
pub fn dirac_init(problem: &Problem, width: f64) -> Result<Vec<f64>> {
    let grid = problem.grid();
    let reach = if problem.kind().is_geodesic() {
        width
    } else {
        match problem.map() {
            Some(map) => map.s_of_r(width)?,
            None => width,
        }
    };
    if grid.len() < 4 || reach < grid.faces()[3] * (1.0 - 1e-12) {
        return Err(Error::Parameter {
            name: "width",
            reason: format!("Dirac width {width} spans fewer than 3 cells"),
        });
    }
    if reach >= grid.x_max() {
        return Err(Error::Parameter {
            name: "width",
            reason: format!("Dirac width {width} exceeds the domain"),
        });
    }
    let bump = |x: f64| -> Result<f64> {
        let r = problem.geodesic_radius(x)?;
        let z = 1.0 - (r / width).powi(2);
        Ok(if z > 0.0 { z * z * z } else { 0.0 })
    };
    let mut u = cell_averages(problem, bump, Some(reach))?;
    normalize_mass(problem, &mut u, problem.params().mass / problem.weight_scale())?;
    Ok(u)
}

/// Multiplies each cell by `1 + amplitude·ξ`, `ξ` uniform on `[-1, 1]`, then restores the mass.
pub fn perturb(problem: &Problem, u: &mut [f64], amplitude: f64, seed: u64) -> Result<()> {
    if !(0.0..1.0).contains(&amplitude) {
        return Err(Error::Parameter {
            name: "perturbation",
            reason: format!("amplitude must lie in [0, 1) (got {amplitude})"),
        });
    }
    let mass = problem.mass(u);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for v in u.iter_mut() {
        let xi: f64 = rng.random_range(-1.0..=1.0);
        *v *= 1.0 + amplitude * xi;
    }
    normalize_mass(problem, u, mass)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ModelParams;
    use crate::solver::grid::Grid;
    use crate::solver::problem::ProblemKind;

    fn hyper() -> Problem {
        let p = ModelParams::porous(2.0, 3, 1.0).unwrap();
        Problem::build(ProblemKind::HyperbolicRadial, p, Grid::uniform(0.01, 2.0).unwrap()).unwrap()
    }

    #[test]
    fn dirac_mass_and_support() {
        let p = hyper();
        let u = dirac_init(&p, 0.1).unwrap();
        assert!((p.mass(&u) - 1.0).abs() < 1e-14);
        let last = u.iter().rposition(|v| *v > 0.0).unwrap();
        assert!(p.grid().faces()[last] < 0.1);
        assert!(dirac_init(&p, 0.02).is_err());
    }

    #[test]
    fn weighted_dirac_mass() {
        let params = ModelParams::porous(2.0, 3, 1.0).unwrap();
        let p = Problem::build(
            ProblemKind::WeightedEuclidean,
            params,
            Grid::graded(1e-3, 1.02, 50.0).unwrap(),
        )
        .unwrap();
        let u = dirac_init(&p, 0.3).unwrap();
        assert!((p.mass(&u) - 1.0 / p.weight_scale()).abs() < 1e-13);
        assert!((p.mass(&u) - 4.0).abs() < 1e-6);
    }

    #[test]
    fn perturbation_is_seeded_and_mass_preserving() {
        let p = hyper();
        let base = dirac_init(&p, 0.1).unwrap();
        let (mut a, mut b, mut c) = (base.clone(), base.clone(), base.clone());
        perturb(&p, &mut a, 0.1, 7).unwrap();
        perturb(&p, &mut b, 0.1, 7).unwrap();
        perturb(&p, &mut c, 0.1, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!((p.mass(&a) - 1.0).abs() < 1e-14);
        assert!(a.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn averages_of_constant() {
        let p = hyper();
        let u = cell_averages(&p, |_| Ok(2.5), None).unwrap();
        assert!(u.iter().all(|v| (v - 2.5).abs() < 1e-14));
    }
}
