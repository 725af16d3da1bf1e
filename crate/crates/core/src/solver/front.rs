use crate::error::{Error, Result};
use crate::solver::grid::Grid;

/// Radius where `u` drops below `threshold · max u`, outermost crossing.
///
/// The crossing is located on a straight line in `v = u^q`, the variable that is
/// linear across a porous-medium front. When the next cell is empty the line is
/// continued from the two cells behind the front, clamped to the cell spacing.
pub fn free_boundary(grid: &Grid, u: &[f64], threshold: f64, q: f64) -> Result<f64> {
    let sup = u.iter().cloned().fold(0.0, f64::max);
    if !(sup > 0.0) {
        return Err(Error::NoSupport);
    }
    let level = threshold * sup;
    let i = match u.iter().rposition(|&v| v > level) {
        Some(i) => i,
        None => return Err(Error::NoSupport),
    };
    if i + 1 >= u.len() || i + 1 >= grid.len() {
        return Err(Error::DomainTooSmall {
            x_max: grid.x_max(),
        });
    }
    let v = |w: f64| w.max(0.0).powf(q);
    let (xi, xn) = (grid.center(i), grid.center(i + 1));
    let (vi, vn, vl) = (v(u[i]), v(u[i + 1]), v(level));
    if vn > 0.0 {
        return Ok(xi + (vi - vl) / (vi - vn) * (xn - xi));
    }
    if i == 0 {
        return Ok(grid.faces()[1]);
    }
    let xp = grid.center(i - 1);
    let slope = (vi - v(u[i - 1])) / (xi - xp);
    if !(slope < 0.0) {
        return Ok(0.5 * (xi + xn));
    }
    Ok((xi + (vl - vi) / slope).clamp(xi, xn))
}
