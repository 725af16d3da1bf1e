//! Adaptive Gauss–Kronrod integration and fixed Gauss–Legendre rules.
//!
//! The adaptive driver uses the 7-point Gauss / 15-point Kronrod pair and
//! bisects the interval with the largest error estimate until the summed
//! estimate falls under `max(abs_tol, rel_tol * |I|)`.

use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            abs_tol: 0.0,
            rel_tol: 1e-13,
            max_intervals: 2000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let sum = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * sum;
        // Gauss nodes are the odd-indexed Kronrod nodes.
        if j % 2 == 1 {
            gauss += WG[j / 2] * sum;
        }
    }
    let value = kronrod * half;
    let err = ((kronrod - gauss) * half).abs();
    (value, err)
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Integrate `f` over the finite interval `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: QuadConfig) -> QuadResult {
    if a == b {
        return QuadResult {
            value: 0.0,
            error: 0.0,
            intervals: 0,
        };
    }
    let (value, error) = gk15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error });
    let mut total = value;
    let mut total_err = error;
    while heap.len() < cfg.max_intervals {
        let tol = cfg.abs_tol.max(cfg.rel_tol * total.abs());
        if total_err <= tol {
            break;
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk15(&f, worst.a, mid);
        let (v2, e2) = gk15(&f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }
    // Re-sum to shed the drift of the running updates.
    let (value, error) = heap
        .iter()
        .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
    QuadResult {
        value,
        error,
        intervals: heap.len(),
    }
}

/// Integrate over `[a, ∞)` through the map `x = a + τ/(1-τ)`.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(f: F, a: f64, cfg: QuadConfig) -> QuadResult {
    let g = |tau: f64| {
        if tau >= 1.0 {
            return 0.0;
        }
        let one_minus = 1.0 - tau;
        let x = a + tau / one_minus;
        let v = f(x);
        if v == 0.0 {
            0.0
        } else {
            v / (one_minus * one_minus)
        }
    };
    integrate(g, 0.0, 1.0, cfg)
}

/// Integrate over `[a, b]` split at the interior `breaks` (which must be sorted).
pub fn integrate_piecewise<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    cfg: QuadConfig,
) -> f64 {
    let mut lo = a;
    let mut sum = 0.0;
    for &x in breaks.iter().filter(|&&x| x > a && x < b) {
        sum += integrate(&f, lo, x, cfg).value;
        lo = x;
    }
    sum + integrate(&f, lo, b, cfg).value
}

/// Four-point Gauss–Legendre nodes on `[-1, 1]`.
pub const GL4_NODES: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_3,
    0.339_981_043_584_856_3,
    0.861_136_311_594_052_6,
];
pub const GL4_WEIGHTS: [f64; 4] = [
    0.347_854_845_137_453_9,
    0.652_145_154_862_546_1,
    0.652_145_154_862_546_1,
    0.347_854_845_137_453_9,
];

/// Four-point Gauss–Legendre rule on `[a, b]`; exact through degree 7.
pub fn gauss_legendre4<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    GL4_NODES
        .iter()
        .zip(GL4_WEIGHTS.iter())
        .map(|(x, w)| w * f(c + h * x))
        .sum::<f64>()
        * h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| x.powi(5) - 3.0 * x * x, -1.0, 2.0, QuadConfig::default());
        assert!((r.value - (64.0 / 6.0 - 1.0 / 6.0 - 9.0)).abs() < 1e-13);
    }

    #[test]
    fn endpoint_singularity() {
        // ∫₀¹ x^{-1/2} dx = 2
        let r = integrate(|x| x.powf(-0.5), 0.0, 1.0, QuadConfig::default());
        assert!((r.value - 2.0).abs() < 1e-9, "{}", r.value);
    }

    #[test]
    fn semi_infinite() {
        let r = integrate_to_infinity(|x| (-x).exp(), 0.0, QuadConfig::default());
        assert!((r.value - 1.0).abs() < 1e-12);
        let r = integrate_to_infinity(|x| 1.0 / (1.0 + x * x), 0.0, QuadConfig::default());
        assert!((r.value - std::f64::consts::FRAC_PI_2).abs() < 1e-10);
    }

    #[test]
    fn gl4_exact_for_cubic() {
        let v = gauss_legendre4(|x| x * x * x + x, 0.0, 2.0);
        assert!((v - 6.0).abs() < 1e-14);
    }
}
