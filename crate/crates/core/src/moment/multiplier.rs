//! The multiplier H(z) = C int_{-1}^{1} sigma(t) e^{-i a t z} dt built from
//! the bump sigma(t) = exp(-theta / (1 - t^2)).

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::adaptive_gk15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MultiplierParams {
    pub delta: f64,
    pub a: f64,
    pub theta: f64,
}

impl MultiplierParams {
    /// a = T(1 - delta)/2, theta = (2 + sqrt 2)(1 + delta)^2 / (kappa^2 T (1 - delta)).
    pub fn new(t_final: f64, delta: f64, kappa: f64) -> Result<MultiplierParams> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::domain(format!("delta must lie in (0, 1), got {delta}")));
        }
        if !(t_final > 0.0 && t_final.is_finite()) {
            return Err(Error::domain(format!("T must be positive, got {t_final}")));
        }
        if !(kappa > 0.0 && kappa <= 1.0) {
            return Err(Error::domain(format!("kappa must lie in (0, 1], got {kappa}")));
        }
        let a = 0.5 * t_final * (1.0 - delta);
        let theta = (2.0 + 2f64.sqrt()) * (1.0 + delta) * (1.0 + delta) / (kappa * kappa * t_final * (1.0 - delta));
        Ok(MultiplierParams { delta, a, theta })
    }
}

/// exp(-theta / (1 - t^2)) on (-1, 1), zero outside.
pub fn sigma_bump(theta: f64, t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (-theta / (1.0 - t * t)).exp()
    }
}

/// Evaluates H with the t-contour moved through a saddle point of the
/// exponent, so tiny values of |H| far from the origin keep full relative
/// precision instead of drowning in cancellation.
#[derive(Debug, Clone)]
pub struct Multiplier {
    pub params: MultiplierParams,
    /// ln int_{-1}^{1} sigma
    ln_mass: f64,
}

const HEIGHT_GRID: usize = 256;
const PATH_TOL: f64 = 1e-15;
const MAX_DEPTH: usize = 60;

impl Multiplier {
    pub fn new(params: MultiplierParams) -> Multiplier {
        let theta = params.theta;
        let w = 1.0 / (2.0 * theta).sqrt();
        let breaks = graded_breaks(0.0, w, 0.0, 1.0);
        let (v, _) = adaptive_gk15(
            |t| {
                if t >= 1.0 {
                    return Complex64::new(0.0, 0.0);
                }
                Complex64::new((-theta * t * t / (1.0 - t * t)).exp(), 0.0)
            },
            &breaks,
            1e-17,
            MAX_DEPTH,
        );
        Multiplier { params, ln_mass: -theta + (2.0 * v.re).ln() }
    }

    /// ln of the normalising mass int sigma.
    pub fn ln_mass(&self) -> f64 {
        self.ln_mass
    }

    /// The exponent phi(t) = -theta/(1-t^2) - i a t z of the integrand.
    #[inline]
    fn phi(&self, t: Complex64, z: Complex64) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        -self.params.theta / (one - t * t) - Complex64::i() * self.params.a * t * z
    }

    fn path_height(&self, cp: f64, z: Complex64) -> f64 {
        let mut m = f64::NEG_INFINITY;
        for j in 0..HEIGHT_GRID {
            let u = (std::f64::consts::PI * (j as f64 + 0.5) / HEIGHT_GRID as f64).cos();
            let t = Complex64::new(u, cp * (1.0 - u * u));
            m = m.max(self.phi(t, z).re);
        }
        m
    }

    /// ln H(z); the imaginary part is a phase (not reduced mod 2 pi).
    pub fn log_h(&self, z: Complex64) -> Complex64 {
        if z == Complex64::new(0.0, 0.0) {
            return Complex64::new(0.0, 0.0);
        }
        let theta = self.params.theta;
        let c = Complex64::i() * self.params.a * z;
        let saddles: Vec<Complex64> = if c.norm() < 1e-12 * theta {
            vec![Complex64::new(0.0, 0.0)]
        } else {
            saddle_points(2.0 * theta / c)
                .into_iter()
                .filter(|t| t.re.abs() < 1.0 && t.is_finite())
                .collect()
        };

        let mut best_cp = 0.0;
        let mut best_h = self.path_height(0.0, z);
        for s in &saddles {
            let cp = s.im / (1.0 - s.re * s.re);
            if !cp.is_finite() {
                continue;
            }
            let h = self.path_height(cp, z).max(self.phi(*s, z).re);
            if h < best_h {
                best_h = h;
                best_cp = cp;
            }
        }

        let mut breaks = vec![-1.0, 1.0];
        for s in &saddles {
            let one = Complex64::new(1.0, 0.0);
            let q = one - *s * *s;
            let d2 = -2.0 * theta / (q * q) - 8.0 * theta * *s * *s / (q * q * q);
            let w = (1.0 / d2.norm().sqrt()).min(0.5);
            breaks.extend(graded_breaks(s.re, w, -1.0, 1.0));
        }
        breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        breaks.dedup();

        let cp = best_cp;
        let shift = best_h;
        let (v, _) = adaptive_gk15(
            |u| {
                let t = Complex64::new(u, cp * (1.0 - u * u));
                let e = self.phi(t, z) - shift;
                if e.re < -745.0 {
                    return Complex64::new(0.0, 0.0);
                }
                e.exp() * Complex64::new(1.0, -2.0 * cp * u)
            },
            &breaks,
            PATH_TOL,
            MAX_DEPTH,
        );
        let ln_v = v.ln();
        Complex64::new(shift + ln_v.re - self.ln_mass, ln_v.im)
    }

    pub fn h(&self, z: Complex64) -> Complex64 {
        self.log_h(z).exp()
    }

    /// ln H(iy) for real y (H is positive on the imaginary axis).
    pub fn ln_h_imag(&self, y: f64) -> f64 {
        self.log_h(Complex64::new(0.0, y)).re
    }
}

impl MultiplierParams {
    /// ln of the lower bound exp(a|x|/(2 sqrt(theta+1))) / (11 sqrt(theta+1)) for H(ix).
    pub fn ln_lower_imag(&self, x: f64) -> f64 {
        let r = (self.theta + 1.0).sqrt();
        self.a * x.abs() / (2.0 * r) - (11.0 * r).ln()
    }

    /// ln of the upper bound e^{a |Im z|}.
    pub fn ln_upper(&self, z: Complex64) -> f64 {
        self.a * z.im.abs()
    }

    /// ln of sqrt(theta+1) sqrt(a theta |x|) exp(3 theta/4 - sqrt(a theta |x|)),
    /// the decay envelope of H on the real axis for |x| > 1 without its constant.
    pub fn ln_real_envelope(&self, x: f64) -> f64 {
        let q = (self.a * self.theta * x.abs()).sqrt();
        0.5 * (self.theta + 1.0).ln() + q.ln() + 0.75 * self.theta - q
    }

    /// ln C(T, alpha, delta) = ln c + ln sqrt(theta+1)
    /// + ln[exp(sqrt(2+sqrt 2)/(sqrt 2 kappa)) + sqrt(theta+1) kappa^2 delta^{-3} exp(3 theta/4)].
    pub fn ln_interpolant_constant(&self, kappa: f64, c: f64) -> f64 {
        let r = (self.theta + 1.0).sqrt();
        let e1 = (2.0 + 2f64.sqrt()).sqrt() / (2f64.sqrt() * kappa);
        let e2 = r.ln() + 2.0 * kappa.ln() - 3.0 * self.delta.ln() + 0.75 * self.theta;
        let m = e1.max(e2);
        c.ln() + r.ln() + m + ((e1 - m).exp() + (e2 - m).exp()).ln()
    }
}

/// Breakpoints c, c +- w, c +- 2w, c +- 4w, ... clipped to [lo, hi].
fn graded_breaks(c: f64, w: f64, lo: f64, hi: f64) -> Vec<f64> {
    let mut out = vec![lo, hi];
    if c > lo && c < hi {
        out.push(c);
    }
    let mut step = 0.5 * w;
    while step < 2.0 * (hi - lo) {
        for p in [c - step, c + step] {
            if p > lo && p < hi {
                out.push(p);
            }
        }
        step *= 2.0;
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out.dedup();
    out
}

/// Roots of t^4 - 2 t^2 + b t + 1, i.e. of phi'(t) = 0 after clearing
/// denominators, by Aberth iteration followed by Newton polishing.
fn saddle_points(b: Complex64) -> Vec<Complex64> {
    let coef = [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(-2.0, 0.0),
        b,
        Complex64::new(1.0, 0.0),
    ];
    let eval = |t: Complex64| -> (Complex64, Complex64) {
        let mut p = coef[0];
        let mut d = Complex64::new(0.0, 0.0);
        for c in &coef[1..] {
            d = d * t + p;
            p = p * t + c;
        }
        (p, d)
    };
    let radius = b.norm().cbrt().max(1.0);
    let mut roots: Vec<Complex64> =
        (0..4).map(|k| Complex64::from_polar(radius, 0.4 + k as f64 * std::f64::consts::FRAC_PI_2)).collect();
    // The small root sits near -1/b when |b| is large.
    roots[3] = -Complex64::new(1.0, 0.0) / b;
    for _ in 0..500 {
        let mut moved: f64 = 0.0;
        for i in 0..4 {
            let (p, d) = eval(roots[i]);
            if p == Complex64::new(0.0, 0.0) {
                continue;
            }
            let ratio = p / d;
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..4 {
                if j != i {
                    s += Complex64::new(1.0, 0.0) / (roots[i] - roots[j]);
                }
            }
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * s);
            if step.is_finite() {
                roots[i] -= step;
                moved = moved.max(step.norm() / roots[i].norm().max(1e-300));
            }
        }
        if moved < 1e-15 {
            break;
        }
    }
    for r in roots.iter_mut() {
        for _ in 0..5 {
            let (p, d) = eval(*r);
            if d.norm() == 0.0 {
                break;
            }
            let step = p / d;
            if !step.is_finite() {
                break;
            }
            *r -= step;
        }
    }
    roots
}
