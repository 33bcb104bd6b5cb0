use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::central_stencil;

use super::basis::{eigenfunction, Mode, ModalBasis, WeightedQuadrature};
use super::params::{DerivedParams, Regime, RhoConstants};

/// int_0^1 f g x^beta dx on the graded rule.
pub fn weighted_inner_product(
    f: impl Fn(f64) -> f64,
    g: impl Fn(f64) -> f64,
    beta: f64,
    quad: &WeightedQuadrature,
) -> Result<f64> {
    let vals: Vec<f64> = quad.x.iter().map(|&x| f(x) * g(x)).collect();
    quad.integrate_sampled(&vals, beta)
}

/// Coefficients a_k = <u0, Phi_k>_beta for k = 1..K.
pub fn project_initial_data(u0: impl Fn(f64) -> f64, basis: &ModalBasis) -> Result<Vec<f64>> {
    let u: Vec<f64> = basis.quad.x.iter().map(|&x| u0(x)).collect();
    project_sampled(&u, basis)
}

/// Projection of a function already sampled at the basis quadrature nodes.
pub fn project_sampled(u: &[f64], basis: &ModalBasis) -> Result<Vec<f64>> {
    let beta = basis.derived.beta;
    (1..=basis.len())
        .map(|k| {
            let phi = basis.sample_mode(k)?;
            let prod: Vec<f64> = u.iter().zip(&phi).map(|(a, b)| a * b).collect();
            basis.quad.integrate_sampled(&prod, beta)
        })
        .collect()
}

/// ||u||_beta^2 on the basis rule.
pub fn weighted_norm_sq(u: impl Fn(f64) -> f64, basis: &ModalBasis) -> Result<f64> {
    let vals: Vec<f64> = basis.quad.x.iter().map(|&x| u(x) * u(x)).collect();
    basis.quad.integrate_sampled(&vals, basis.derived.beta)
}

/// (e^{-lambda_k^2 t} a_k).
pub fn semigroup_coeffs(a: &[f64], basis: &ModalBasis, t: f64) -> Result<Vec<f64>> {
    if !(t >= 0.0) {
        return Err(Error::domain(format!("time must be nonnegative, got {t}")));
    }
    if a.len() > basis.len() {
        return Err(Error::Dimension(format!("{} coefficients for {} modes", a.len(), basis.len())));
    }
    Ok(a.iter().zip(&basis.modes).map(|(a, m)| a * (-m.lambda_sq * t).exp()).collect())
}

/// Max over `grid` of |A^2 Phi_k - lambda_k^2 Phi_k| / (lambda_k^2 max|Phi_k|),
/// with derivatives from 11-point central differences. The step shrinks with
/// the local oscillation rate and stays inside (0,1).
pub fn apply_a2_residual(m: &Mode, d: &DerivedParams, rho: &RhoConstants, grid: &[f64]) -> Result<f64> {
    const HALF: usize = 5;
    let c = central_stencil(HALF, 4);
    let a2 = 2.0 * d.alpha;
    let p = d.power();
    let mut max_res: f64 = 0.0;
    let mut max_phi: f64 = 0.0;
    for &x in grid {
        if !(x > 0.0 && x < 1.0) {
            return Err(Error::domain(format!("residual grid point {x} outside (0,1)")));
        }
        let omega = m.zero * d.kappa * x.powf(d.kappa - 1.0) + (p.abs() + 4.0) / x;
        let h = (0.15 / omega).min(0.01).min(0.9 * x.min(1.0 - x) / HALF as f64);
        let vals = (0..=2 * HALF)
            .map(|i| eigenfunction(m, d, x + (i as f64 - HALF as f64) * h))
            .collect::<Result<Vec<f64>>>()?;
        let der = |order: usize| -> f64 {
            c[order].iter().zip(&vals).map(|(c, v)| c * v).sum::<f64>() / h.powi(order as i32)
        };
        let phi = vals[HALF];
        let lhs = x.powf(a2) * der(4)
            + rho.rho1 * x.powf(a2 - 1.0) * der(3)
            + rho.rho2 * x.powf(a2 - 2.0) * der(2)
            + rho.rho3 * x.powf(a2 - 3.0) * der(1)
            + rho.rho4 * x.powf(a2 - 4.0) * phi;
        max_res = max_res.max((lhs - m.lambda_sq * phi).abs());
        max_phi = max_phi.max(phi.abs());
    }
    Ok(max_res / (m.lambda_sq * max_phi))
}

/// Both sides of the generalized Hardy inequality
/// mu(a+b) int u^2 / x^{2-a-b} <= int x^{a+b} u'^2 and of the weighted
/// Poincare inequality int u^2 x^b <= C int x^{a+b} u'^2 with
/// C = 1 / ((2 - a) |1 - a - b|).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HardyPoincare {
    pub lhs_hardy: f64,
    pub rhs_hardy: f64,
    pub lhs_poincare: f64,
    pub rhs_poincare: f64,
}

pub fn verify_hardy_poincare(
    u: impl Fn(f64) -> f64,
    du: impl Fn(f64) -> f64,
    d: &DerivedParams,
    quad: &WeightedQuadrature,
) -> Result<HardyPoincare> {
    let s = d.alpha + d.beta;
    let u_sq: Vec<f64> = quad.x.iter().map(|&x| u(x) * u(x)).collect();
    let du_sq: Vec<f64> = quad.x.iter().map(|&x| du(x) * du(x)).collect();
    let energy = quad.integrate_sampled(&du_sq, s)?;
    let hardy = quad.integrate_sampled(&u_sq, s - 2.0)?;
    let l2 = quad.integrate_sampled(&u_sq, d.beta)?;
    let poincare_const = if d.regime == Regime::EqualOne {
        f64::INFINITY
    } else {
        1.0 / ((2.0 - d.alpha) * (1.0 - s).abs())
    };
    Ok(HardyPoincare {
        lhs_hardy: d.mu_crit * hardy,
        rhs_hardy: energy,
        lhs_poincare: l2,
        rhs_poincare: poincare_const * energy,
    })
}

/// Which power of lambda_k weighs the negative-order norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum InterpConvention {
    /// sum lambda_k^{-2s} |a_k|^2
    #[default]
    Lambda,
    /// sum lambda_k^{-4s} |a_k|^2
    LambdaSquared,
}

/// ||u||_{-s} from the coefficients a_k = <u, Phi_k>.
pub fn interp_norm(a: &[f64], basis: &ModalBasis, s: f64, convention: InterpConvention) -> f64 {
    let power = match convention {
        InterpConvention::Lambda => -2.0 * s,
        InterpConvention::LambdaSquared => -4.0 * s,
    };
    a.iter()
        .zip(&basis.modes)
        .map(|(a, m)| (power * m.lambda.ln()).exp() * a * a)
        .sum::<f64>()
        .sqrt()
}
