//! Shape-preserving (Fritsch–Carlson) cubic Hermite interpolation.

/// Monotone piecewise-cubic interpolant through `(x_i, y_i)`.
///
/// Node slopes use the weighted harmonic mean of the neighbouring secants, so
/// the interpolant is monotone on every interval where the data are.
/// Outside `[x_0, x_last]` the end values are held constant.
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl MonotoneCubic {
    /// # Panics
    /// Panics if fewer than two nodes are given or `x` is not strictly increasing.
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        assert!(x.len() >= 2 && x.len() == y.len(), "need >= 2 matching nodes");
        assert!(
            x.windows(2).all(|w| w[1] > w[0]),
            "abscissae must be strictly increasing"
        );
        let n = x.len();
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        let mut d = vec![0.0; n];
        if n == 2 {
            d[0] = delta[0];
            d[1] = delta[0];
        } else {
            for i in 1..n - 1 {
                if delta[i - 1] * delta[i] <= 0.0 {
                    d[i] = 0.0;
                } else {
                    let w1 = 2.0 * h[i] + h[i - 1];
                    let w2 = h[i] + 2.0 * h[i - 1];
                    d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
                }
            }
            d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
            d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
        Self { x, y, d }
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    fn interval(&self, t: f64) -> usize {
        match self.x.partition_point(|&xi| xi <= t) {
            0 => 0,
            k => (k - 1).min(self.x.len() - 2),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        if t <= self.x[0] {
            return self.y[0];
        }
        if t >= self.x[n - 1] {
            return self.y[n - 1];
        }
        let i = self.interval(t);
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.y[i] + h10 * h * self.d[i] + h01 * self.y[i + 1] + h11 * h * self.d[i + 1]
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let n = self.x.len();
        if t < self.x[0] || t > self.x[n - 1] {
            return 0.0;
        }
        let i = self.interval(t);
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let s2 = s * s;
        let dh00 = (6.0 * s2 - 6.0 * s) / h;
        let dh10 = 3.0 * s2 - 4.0 * s + 1.0;
        let dh01 = (-6.0 * s2 + 6.0 * s) / h;
        let dh11 = 3.0 * s2 - 2.0 * s;
        dh00 * self.y[i] + dh10 * self.d[i] + dh01 * self.y[i + 1] + dh11 * self.d[i + 1]
    }
}

fn end_slope(h0: f64, h1: f64, del0: f64, del1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
    if d.signum() != del0.signum() {
        0.0
    } else if del0.signum() != del1.signum() && d.abs() > 3.0 * del0.abs() {
        3.0 * del0
    } else {
        d
    }
}

/// Piecewise-linear interpolation on sorted abscissae; zero outside the range.
pub fn linear_or_zero(x: &[f64], y: &[f64], t: f64) -> f64 {
    let n = x.len();
    if n == 0 || t < x[0] || t > x[n - 1] {
        return 0.0;
    }
    let k = x.partition_point(|&xi| xi <= t);
    if k == n {
        return y[n - 1];
    }
    let i = k.saturating_sub(1);
    let w = (t - x[i]) / (x[i + 1] - x[i]);
    y[i] + w * (y[i + 1] - y[i])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reproduces_linear_data() {
        let x: Vec<f64> = (0..10).map(|i| i as f64 * 0.3).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v - 1.0).collect();
        let p = MonotoneCubic::new(x, y);
        for t in [0.05, 0.7, 1.33, 2.6] {
            assert!((p.eval(t) - (2.0 * t - 1.0)).abs() < 1e-14);
            assert!((p.derivative(t) - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn smooth_data_accuracy() {
        let x: Vec<f64> = (0..200).map(|i| i as f64 * 0.01).collect();
        let y: Vec<f64> = x.iter().map(|v| v.exp()).collect();
        let p = MonotoneCubic::new(x, y);
        assert!((p.eval(1.2345) - 1.2345f64.exp()).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn monotone_data_gives_monotone_interpolant(
            steps in proptest::collection::vec(0.0f64..5.0, 3..30),
            gaps in proptest::collection::vec(0.01f64..2.0, 30),
        ) {
            let mut x = vec![0.0];
            let mut y = vec![0.0];
            for (i, s) in steps.iter().enumerate() {
                x.push(x[i] + gaps[i]);
                y.push(y[i] + s);
            }
            let p = MonotoneCubic::new(x.clone(), y);
            let last = *x.last().unwrap();
            let mut prev = p.eval(0.0);
            for k in 1..=500 {
                let v = p.eval(last * k as f64 / 500.0);
                prop_assert!(v >= prev - 1e-12);
                prev = v;
            }
        }
    }
}
