use crate::error::{Error, Result};

/// Least-squares record for `R(t) ≈ γ log t + b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub window: (f64, f64),
    pub max_residual: f64,
    pub points: usize,
}

pub const MIN_FIT_POINTS: usize = 8;

fn in_window(t: f64, window: (f64, f64)) -> bool {
    t >= window.0 * (1.0 - 1e-9) && t <= window.1 * (1.0 + 1e-9)
}

fn window_points(times: &[f64], fronts: &[f64], window: (f64, f64)) -> Result<Vec<(f64, f64)>> {
    if !(window.0 > 0.0) || !(window.1 > window.0) {
        return Err(Error::Insufficient(format!(
            "fit window [{}, {}] is empty",
            window.0, window.1
        )));
    }
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(fronts)
        .filter(|(t, r)| in_window(**t, window) && r.is_finite())
        .map(|(t, r)| (t.ln(), *r))
        .collect();
    if pts.len() < MIN_FIT_POINTS {
        return Err(Error::Insufficient(format!(
            "{} usable checkpoints in [{}, {}], need {MIN_FIT_POINTS}",
            pts.len(),
            window.0,
            window.1
        )));
    }
    Ok(pts)
}

/// Ordinary least squares `y ≈ slope·x + intercept`.
pub fn fit_line(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return Err(Error::Insufficient("a line needs two points".into()));
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Insufficient("abscissae coincide".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

fn finish(pts: &[(f64, f64)], slope: f64, intercept: f64, window: (f64, f64)) -> FitResult {
    let max_residual = pts
        .iter()
        .map(|(x, y)| (y - slope * x - intercept).abs())
        .fold(0.0, f64::max);
    FitResult {
        slope,
        intercept,
        window,
        max_residual,
        points: pts.len(),
    }
}

/// Regression of the front radius on `log t` over the checkpoints in `window`.
pub fn fit_log_growth(times: &[f64], fronts: &[f64], window: (f64, f64)) -> Result<FitResult> {
    let pts = window_points(times, fronts, window)?;
    let (x, y): (Vec<f64>, Vec<f64>) = pts.iter().cloned().unzip();
    let (slope, intercept) = fit_line(&x, &y)?;
    Ok(finish(&pts, slope, intercept, window))
}

/// Offset `b` with the slope held at `gamma`: the mean of `R - γ log t`.
pub fn fit_offset(
    times: &[f64],
    fronts: &[f64],
    window: (f64, f64),
    gamma: f64,
) -> Result<FitResult> {
    let pts = window_points(times, fronts, window)?;
    let b = pts.iter().map(|(x, y)| y - gamma * x).sum::<f64>() / pts.len() as f64;
    Ok(finish(&pts, gamma, b, window))
}

/// The last `decades` decades of a time series.
pub fn trailing_window(times: &[f64], decades: f64) -> Option<(f64, f64)> {
    let last = *times.last()?;
    Some((last * 10f64.powf(-decades), last))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn synthetic(gamma: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
        let t: Vec<f64> = (0..13).map(|k| 100.0 * 10f64.powf(k as f64 / 6.0)).collect();
        let r = t.iter().map(|t| gamma * t.ln() + b).collect();
        (t, r)
    }

    #[test]
    fn exact_data_recovered() {
        let (t, r) = synthetic(0.5, 1.0);
        let f = fit_log_growth(&t, &r, (1e2, 1e4)).unwrap();
        assert!((f.slope - 0.5).abs() < 1e-12);
        assert!((f.intercept - 1.0).abs() < 1e-11);
        assert!(f.max_residual < 1e-12);
        assert_eq!(f.points, 13);
        let g = fit_offset(&t, &r, (1e2, 1e4), 0.5).unwrap();
        assert!((g.intercept - 1.0).abs() < 1e-12);
    }

    #[test]
    fn underdetermined_window_rejected() {
        let (t, r) = synthetic(0.5, 1.0);
        assert!(matches!(
            fit_log_growth(&t, &r, (1e2, 2e2)),
            Err(Error::Insufficient(_))
        ));
        let mut r2 = r.clone();
        r2.iter_mut().take(6).for_each(|v| *v = f64::NAN);
        assert!(fit_log_growth(&t, &r2, (1e2, 1e4)).is_err());
    }

    #[test]
    fn trailing() {
        let w = trailing_window(&[1.0, 10.0, 1e4], 1.5).unwrap();
        assert!((w.0 - 10f64.powf(2.5)).abs() < 1e-9);
        assert_eq!(w.1, 1e4);
    }

    proptest! {
        #[test]
        fn affine_equivariance(shift in -5.0f64..5.0, gamma in 0.1f64..2.0, b in -2.0f64..2.0,
                               noise in proptest::collection::vec(-0.05f64..0.05, 13)) {
            let (t, r) = synthetic(gamma, b);
            let r: Vec<f64> = r.iter().zip(&noise).map(|(a, e)| a + e).collect();
            let shifted: Vec<f64> = r.iter().map(|v| v + shift).collect();
            let f = fit_log_growth(&t, &r, (1e2, 1e4)).unwrap();
            let g = fit_log_growth(&t, &shifted, (1e2, 1e4)).unwrap();
            prop_assert!((g.slope - f.slope).abs() < 1e-9);
            prop_assert!((g.intercept - f.intercept - shift).abs() < 1e-9);
        }
    }
}
