//! Numerical differentiation.
//!
//! Fixed-step fourth-order central stencils, and Ridders' polynomial
//! extrapolation of central differences. All stencils sample `f` only inside
//! `[x - h, x + h]`, so callers control how close they get to a kink.

/// Fourth-order central first derivative with step `h`.
pub fn central4_first<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

/// Fourth-order central second derivative with step `h`.
pub fn central4_second<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (-f(x - 2.0 * h) + 16.0 * f(x - h) - 30.0 * f(x) + 16.0 * f(x + h) - f(x + 2.0 * h))
        / (12.0 * h * h)
}

#[derive(Debug, Clone, Copy)]
pub struct Derivative {
    pub value: f64,
    pub error: f64,
}

const RIDDERS_SHRINK: f64 = 1.4;
const RIDDERS_TABLE: usize = 12;

fn ridders<G: Fn(f64) -> f64>(estimate: G, h0: f64) -> Derivative {
    let con2 = RIDDERS_SHRINK * RIDDERS_SHRINK;
    let mut table = [[0.0f64; RIDDERS_TABLE]; RIDDERS_TABLE];
    let mut h = h0;
    table[0][0] = estimate(h);
    let mut best = Derivative {
        value: table[0][0],
        error: f64::MAX,
    };
    for i in 1..RIDDERS_TABLE {
        h /= RIDDERS_SHRINK;
        table[0][i] = estimate(h);
        let mut fac = con2;
        for j in 1..=i {
            table[j][i] = (table[j - 1][i] * fac - table[j - 1][i - 1]) / (fac - 1.0);
            fac *= con2;
            let err = (table[j][i] - table[j - 1][i])
                .abs()
                .max((table[j][i] - table[j - 1][i - 1]).abs());
            if err <= best.error {
                best = Derivative {
                    value: table[j][i],
                    error: err,
                };
            }
        }
        if (table[i][i] - table[i - 1][i - 1]).abs() >= 2.0 * best.error {
            break;
        }
    }
    best
}

/// First derivative by Ridders' extrapolation, starting from step `h0`.
pub fn ridders_first<F: Fn(f64) -> f64>(f: F, x: f64, h0: f64) -> Derivative {
    ridders(|h| (f(x + h) - f(x - h)) / (2.0 * h), h0)
}

/// Second derivative by Ridders' extrapolation, starting from step `h0`.
pub fn ridders_second<F: Fn(f64) -> f64>(f: F, x: f64, h0: f64) -> Derivative {
    let fx = f(x);
    ridders(|h| (f(x + h) - 2.0 * fx + f(x - h)) / (h * h), h0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ridders_matches_analytic() {
        let d = ridders_first(f64::sin, 0.7, 0.1);
        assert!((d.value - 0.7f64.cos()).abs() < 1e-12, "{:?}", d);
        let d2 = ridders_second(f64::exp, 1.3, 0.1);
        assert!((d2.value - 1.3f64.exp()).abs() < 1e-9, "{:?}", d2);
    }

    #[test]
    fn central4_order() {
        let e1 = (central4_second(f64::exp, 0.0, 1e-1) - 1.0).abs();
        let e2 = (central4_second(f64::exp, 0.0, 5e-2) - 1.0).abs();
        assert!(e1 / e2 > 12.0, "{e1} {e2}");
        assert!((central4_first(f64::cos, 0.4, 1e-3) + 0.4f64.sin()).abs() < 1e-12);
    }
}
