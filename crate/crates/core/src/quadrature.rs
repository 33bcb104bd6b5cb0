//! Gauss-Legendre rules, composite panels, Simpson weights and
//! finite-difference stencils.

use std::f64::consts::PI;

use num_complex::Complex64;

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

const GK15_X: [f64; 8] = [
    0.991_455_371_120_812_639,
    0.949_107_912_342_758_525,
    0.864_864_423_359_769_073,
    0.741_531_185_599_394_440,
    0.586_087_235_467_691_130,
    0.405_845_151_377_397_167,
    0.207_784_955_007_898_468,
    0.0,
];
const GK15_WK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_553,
    0.104_790_010_322_250_184,
    0.140_653_259_715_525_919,
    0.169_004_726_639_267_903,
    0.190_350_578_064_785_410,
    0.204_432_940_075_298_892,
    0.209_482_141_084_727_828,
];
const GK15_WG: [f64; 4] = [
    0.129_484_966_168_869_693,
    0.279_705_391_489_276_668,
    0.381_830_050_505_118_945,
    0.417_959_183_673_469_388,
];

fn gk15(f: &impl Fn(f64) -> Complex64, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * GK15_WK[7];
    let mut g = fc * GK15_WG[3];
    for i in 0..7 {
        let d = h * GK15_X[i];
        let s = f(c - d) + f(c + d);
        k += s * GK15_WK[i];
        if i % 2 == 1 {
            g += s * GK15_WG[i / 2];
        }
    }
    (k * h, ((k - g) * h).norm())
}

/// Adaptive Gauss-Kronrod (7/15) integration of a complex integrand over
/// consecutive panels given by `breaks`. Panels are bisected until the
/// Gauss/Kronrod difference drops below `abs_tol` times the panel's share of
/// the range. Returns the integral and the summed error estimate.
///
/// Features narrower than a panel can be missed entirely by all 15 nodes, so
/// callers place breakpoints around known peaks.
pub fn adaptive_gk15(f: impl Fn(f64) -> Complex64, breaks: &[f64], abs_tol: f64, max_depth: usize) -> (Complex64, f64) {
    let total = breaks[breaks.len() - 1] - breaks[0];
    let mut sum = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    let mut stack: Vec<(f64, f64, usize)> = breaks.windows(2).rev().map(|w| (w[0], w[1], 0)).collect();
    while let Some((a, b, depth)) = stack.pop() {
        if b <= a {
            continue;
        }
        let (v, e) = gk15(&f, a, b);
        let allowed = abs_tol * ((b - a) / total).max(1e-3);
        if e <= allowed || depth >= max_depth {
            sum += v;
            err += e;
        } else {
            let m = 0.5 * (a + b);
            stack.push((m, b, depth + 1));
            stack.push((a, m, depth + 1));
        }
    }
    (sum, err)
}

/// A fixed set of nodes and weights for integrals over an interval.
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    /// Composite Gauss-Legendre rule over the given breakpoints.
    pub fn composite(breaks: &[f64], order: usize) -> Rule {
        let (gx, gw) = gauss_legendre(order);
        let mut nodes = Vec::with_capacity(order * breaks.len());
        let mut weights = Vec::with_capacity(order * breaks.len());
        for w in breaks.windows(2) {
            let (a, b) = (w[0], w[1]);
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            for (x, wt) in gx.iter().zip(&gw) {
                nodes.push(mid + half * x);
                weights.push(half * wt);
            }
        }
        Rule { nodes, weights }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Breakpoints of `pieces` equal panels on [a, b].
pub fn uniform_breaks(a: f64, b: f64, pieces: usize) -> Vec<f64> {
    let pieces = pieces.max(1);
    (0..=pieces).map(|i| a + (b - a) * i as f64 / pieces as f64).collect()
}

/// Composite Simpson weights on `n` equal intervals (n even) of width h.
pub fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    assert!(n >= 2 && n % 2 == 0, "Simpson needs an even number of intervals");
    let mut w = vec![0.0; n + 1];
    for (i, wi) in w.iter_mut().enumerate() {
        *wi = if i == 0 || i == n {
            h / 3.0
        } else if i % 2 == 1 {
            4.0 * h / 3.0
        } else {
            2.0 * h / 3.0
        };
    }
    w
}

/// Finite-difference weights for derivatives 0..=max_order at `x0` from
/// values at `xs` (Fornberg's recursion). Row d holds the weights for the
/// d-th derivative.
pub fn fornberg_weights(x0: f64, xs: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; max_order + 1];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Central stencil weights (unit spacing, offsets -half..=half) for
/// derivatives 0..=max_order.
pub fn central_stencil(half: usize, max_order: usize) -> Vec<Vec<f64>> {
    let xs: Vec<f64> = (-(half as i64)..=half as i64).map(|i| i as f64).collect();
    fornberg_weights(0.0, &xs, max_order)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(16);
        for p in 0..32 {
            let exact = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
            let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p)).sum();
            assert!((got - exact).abs() < 1e-14, "p={p} got={got}");
        }
    }

    #[test]
    fn adaptive_handles_narrow_peak() {
        let w = 1e-4;
        let (v, _) = adaptive_gk15(
            |x| Complex64::new((-(x - 0.3) * (x - 0.3) / (w * w)).exp(), 0.0),
            &[-1.0, 0.3 - 64.0 * w, 0.3 - 8.0 * w, 0.3 - w, 0.3, 0.3 + w, 0.3 + 8.0 * w, 0.3 + 64.0 * w, 1.0],
            1e-16,
            40,
        );
        assert!((v.re - w * PI.sqrt()).abs() < 1e-15, "{} {}", v.re, w * PI.sqrt());
    }

    #[test]
    fn simpson_exact_for_cubics() {
        let n = 10;
        let h = 0.1;
        let w = simpson_weights(n, h);
        let got: f64 = w.iter().enumerate().map(|(i, w)| w * (i as f64 * h).powi(3)).sum();
        assert!((got - 0.25).abs() < 1e-14);
    }

    #[test]
    fn second_derivative_stencil_matches_table() {
        let c = central_stencil(4, 2);
        let table = [-1.0 / 560.0, 8.0 / 315.0, -1.0 / 5.0, 8.0 / 5.0, -205.0 / 72.0];
        for (i, t) in table.iter().enumerate() {
            assert!((c[2][i] - t).abs() < 1e-13);
            assert!((c[2][8 - i] - t).abs() < 1e-13);
        }
    }
}
