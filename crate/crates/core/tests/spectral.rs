use std::f64::consts::{PI, SQRT_2};

use degnull::spectral::*;
use proptest::prelude::*;

fn basis(alpha: f64, beta: f64, mu: f64, k: usize) -> ModalBasis {
    ModalBasis::new(DerivedParams::spectral(alpha, beta, mu).unwrap(), k).unwrap()
}

const GRAM_SETS: [(f64, f64, f64); 5] =
    [(0.0, 0.0, 0.0), (0.5, 0.0, -0.5), (1.0, 1.0, -1.0), (1.0, 0.0, -0.25), (1.5, 0.2, 0.1)];

#[test]
fn classical_modes_are_sines() {
    let b = basis(0.0, 0.0, 0.0, 6);
    for m in &b.modes {
        let kpi = m.k as f64 * PI;
        assert!((m.lambda_sq - kpi.powi(4)).abs() < 1e-12 * kpi.powi(4));
        for i in 1..=100 {
            let x = i as f64 / 100.0;
            let phi = eigenfunction(m, &b.derived, x).unwrap();
            assert!((phi - SQRT_2 * (kpi * x).sin()).abs() < 1e-10);
        }
        assert!((m.trace_const - SQRT_2 * kpi).abs() < 1e-12 * kpi);
    }
}

#[test]
fn eigenfunction_reference_value() {
    // alpha = 1, beta = 0, mu = 0: nu = 0, kappa = 1/2, Phi_1(1/4) = J_0(j/2)/J_1(j).
    let b = basis(1.0, 0.0, 0.0, 1);
    let v = eigenfunction(b.mode(1), &b.derived, 0.25).unwrap();
    assert!((v - 1.29044200825839554542).abs() < 1e-13);
    assert!(eigenfunction(b.mode(1), &b.derived, 0.0).is_err());
    assert!(eigenfunction(b.mode(1), &b.derived, 1.5).is_err());
    assert!(eigenfunction(b.mode(1), &b.derived, 1.0).unwrap().abs() < 1e-14);
}

#[test]
fn gram_matrices_are_identity() {
    for &(a, be, mu) in &GRAM_SETS {
        let b = basis(a, be, mu, 20);
        let phis: Vec<Vec<f64>> = (1..=20).map(|k| b.sample_mode(k).unwrap()).collect();
        for j in 0..20 {
            for k in 0..=j {
                let prod: Vec<f64> = phis[j].iter().zip(&phis[k]).map(|(u, v)| u * v).collect();
                let g = b.quad.integrate_sampled(&prod, be).unwrap();
                let target = if j == k { 1.0 } else { 0.0 };
                assert!((g - target).abs() < 1e-8, "set=({a},{be},{mu}) j={} k={} g={g}", j + 1, k + 1);
            }
        }
    }
}

#[test]
fn trace_matches_reference_and_extrapolation() {
    let b = basis(1.0, 1.0, -1.0, 3);
    let refs = [11.3189614414951402976, 40.4919125993100526485, 94.7037084631950766092];
    for (m, r) in b.modes.iter().zip(refs) {
        assert!((m.trace_const - r).abs() < 1e-11 * r);
    }
    for &(a, be, mu) in &GRAM_SETS[..4] {
        let b = basis(a, be, mu, 5);
        let d = b.derived;
        let ell = d.ell;
        let expo = a + be + d.gamma - ell as f64;
        for m in &b.modes {
            let probe = |x: f64| {
                let f = if ell == 1 {
                    eigenfunction(m, &d, x).unwrap()
                } else {
                    eigenfunction_derivative(m, &d, x).unwrap()
                };
                x.powf(expo) * f
            };
            let (x1, x2) = (1e-6f64, 1e-8f64);
            let q = 2.0 * d.kappa;
            let (v1, v2) = (probe(x1), probe(x2));
            let limit = (v2 * x1.powf(q) - v1 * x2.powf(q)) / (x1.powf(q) - x2.powf(q));
            assert!(
                (limit - m.trace_const).abs() < 1e-4 * m.trace_const,
                "set=({a},{be},{mu}) k={} limit={limit} trace={}",
                m.k,
                m.trace_const
            );
        }
    }
}

#[test]
fn eigen_residuals() {
    let grid: Vec<f64> = (0..=90).map(|i| 0.05 + 0.01 * i as f64).collect();
    let b = basis(0.0, 0.0, 0.0, 1);
    let rho = rho_constants(0.0, 0.0, 0.0);
    assert!(apply_a2_residual(b.mode(1), &b.derived, &rho, &grid).unwrap() < 1e-6);
    for &(a, be, mu) in &[(1.0, 0.0, 0.0), (1.0, 1.0, -1.0), (0.5, 0.0, -0.5), (1.0, 0.0, -0.25), (1.5, 0.2, 0.1)] {
        let b = basis(a, be, mu, 10);
        let rho = rho_constants(a, be, mu);
        for m in &b.modes {
            let r = apply_a2_residual(m, &b.derived, &rho, &grid).unwrap();
            assert!(r < 1e-5, "set=({a},{be},{mu}) k={} residual={r}", m.k);
        }
    }
}

#[test]
fn projection_of_parabola() {
    let b = basis(0.0, 0.0, 0.0, 12);
    let a = project_initial_data(|x| x * (1.0 - x), &b).unwrap();
    for (i, ak) in a.iter().enumerate() {
        let k = (i + 1) as f64;
        let sign = if (i + 1) % 2 == 0 { 1.0 } else { -1.0 };
        let exact = 2.0 * SQRT_2 * (1.0 - sign) / (k * PI).powi(3);
        assert!((ak - exact).abs() < 1e-12, "k={k}");
    }
    let norm_sq = weighted_norm_sq(|x| x * (1.0 - x), &b).unwrap();
    assert!((norm_sq - 1.0 / 30.0).abs() < 1e-14);
    let partial: f64 = a.iter().map(|a| a * a).sum();
    assert!(norm_sq - partial >= -1e-8);
}

#[test]
fn projection_of_a_mode_and_zero() {
    let b = basis(1.0, 1.0, -1.0, 8);
    let m3 = *b.mode(3);
    let d = b.derived;
    let a = project_initial_data(|x| eigenfunction(&m3, &d, x).unwrap(), &b).unwrap();
    for (i, ak) in a.iter().enumerate() {
        let target = if i == 2 { 1.0 } else { 0.0 };
        assert!((ak - target).abs() < 1e-8);
    }
    let z = project_initial_data(|_| 0.0, &b).unwrap();
    assert!(z.iter().all(|v| *v == 0.0));
}

#[test]
fn parseval_gap_shrinks_with_k() {
    let u0 = |x: f64| x * (1.0 - x) * (1.0 + x);
    let mut prev = f64::INFINITY;
    for k in [2usize, 4, 8, 16] {
        let b = basis(0.5, 0.0, -0.5, k);
        let a = project_initial_data(u0, &b).unwrap();
        let gap = weighted_norm_sq(u0, &b).unwrap() - a.iter().map(|a| a * a).sum::<f64>();
        assert!(gap >= -1e-8);
        assert!(gap <= prev + 1e-12);
        prev = gap;
    }
    assert!(prev < 1e-4);
}

#[test]
fn inner_product_of_constants() {
    let b = basis(0.0, 0.0, 0.0, 2);
    assert!((weighted_inner_product(|_| 1.0, |_| 1.0, 0.0, &b.quad).unwrap() - 1.0).abs() < 1e-14);
    // x^-1 is not integrable at 0.
    assert!(weighted_inner_product(|x| 1.0 / x, |_| 1.0, 0.0, &b.quad).is_err());
}

#[test]
fn hardy_and_poincare() {
    let b = basis(0.0, 0.0, 0.0, 2);
    let hp = verify_hardy_poincare(|x| x * (1.0 - x), |x| 1.0 - 2.0 * x, &b.derived, &b.quad).unwrap();
    assert!((hp.lhs_hardy - 1.0 / 12.0).abs() < 1e-12);
    assert!((hp.rhs_hardy - 1.0 / 3.0).abs() < 1e-12);
    assert!(hp.lhs_hardy <= hp.rhs_hardy);

    let hp = verify_hardy_poincare(
        |x| SQRT_2 * (PI * x).sin(),
        |x| SQRT_2 * PI * (PI * x).cos(),
        &b.derived,
        &b.quad,
    )
    .unwrap();
    assert!((hp.lhs_poincare - 1.0).abs() < 1e-12);
    assert!((hp.rhs_poincare - PI * PI / 2.0).abs() < 1e-10);

    let b = basis(0.5, 0.0, 0.0, 2);
    let hp = verify_hardy_poincare(|x| (PI * x).sin(), |x| PI * (PI * x).cos(), &b.derived, &b.quad).unwrap();
    assert!(hp.lhs_hardy <= hp.rhs_hardy * (1.0 + 1e-6));
    assert!(hp.lhs_poincare <= hp.rhs_poincare * (1.0 + 1e-6));

    // Functions of the Neumann-type space in the super-critical regime.
    let b = basis(1.0, 0.5, 0.0, 2);
    let hp = verify_hardy_poincare(|x| 1.0 - x * x, |x| -2.0 * x, &b.derived, &b.quad).unwrap();
    assert!(hp.lhs_hardy <= hp.rhs_hardy * (1.0 + 1e-6));
}

#[test]
fn semigroup_examples() {
    let b = basis(0.0, 0.0, 0.0, 4);
    let a = vec![1.0, 0.0, 0.0, 0.0];
    assert_eq!(semigroup_coeffs(&a, &b, 0.0).unwrap(), a);
    let s = semigroup_coeffs(&a, &b, 1.0).unwrap();
    assert!((s[0] - (-PI.powi(4)).exp()).abs() < 1e-50);
    assert!(semigroup_coeffs(&a, &b, -1.0).is_err());
}

#[test]
fn interp_norm_examples() {
    let b = basis(0.0, 0.0, 0.0, 4);
    let a = vec![1.0, 0.0, 0.0, 0.0];
    let l1 = b.mode(1).lambda;
    assert!((interp_norm(&a, &b, 1.0, InterpConvention::Lambda) - 1.0 / l1).abs() < 1e-15);
    assert!((interp_norm(&a, &b, 0.5, InterpConvention::LambdaSquared) - 1.0 / l1).abs() < 1e-15);
    let v = vec![0.3, -1.2, 0.7, 2.0];
    let e = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    assert!((interp_norm(&v, &b, 0.0, InterpConvention::Lambda) - e).abs() < 1e-15);
}

#[test]
fn lambda_ordering() {
    for &(a, be, mu) in &GRAM_SETS {
        let b = basis(a, be, mu, 30);
        for w in b.modes.windows(2) {
            assert!(w[1].lambda > w[0].lambda);
        }
        for m in &b.modes {
            assert_eq!(m.lambda, b.derived.kappa * b.derived.kappa * m.zero * m.zero);
            assert_eq!(m.lambda_sq, m.lambda * m.lambda);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn semigroup_is_a_contraction_semigroup(
        a in proptest::collection::vec(-5.0f64..5.0, 6),
        t in 0.0f64..0.01,
        s in 0.0f64..0.01,
    ) {
        let b = basis(0.7, 0.1, -0.3, 6);
        let st = semigroup_coeffs(&semigroup_coeffs(&a, &b, s).unwrap(), &b, t).unwrap();
        let sts = semigroup_coeffs(&a, &b, t + s).unwrap();
        for (x, y) in st.iter().zip(&sts) {
            prop_assert!((x - y).abs() <= 1e-12 * (1.0 + y.abs()));
        }
        let n0: f64 = a.iter().map(|x| x * x).sum();
        let n1: f64 = sts.iter().map(|x| x * x).sum();
        prop_assert!(n1 <= n0 + 1e-15);
    }

    #[test]
    fn interp_norm_decreases_in_s(a in proptest::collection::vec(-5.0f64..5.0, 5), s in 0.0f64..2.0) {
        let b = basis(0.0, 0.0, 0.0, 5);
        let n1 = interp_norm(&a, &b, s, InterpConvention::Lambda);
        let n2 = interp_norm(&a, &b, s + 0.25, InterpConvention::Lambda);
        prop_assert!(n2 <= n1 + 1e-15);
    }

    #[test]
    fn projection_is_linear(c in -10.0f64..10.0) {
        let b = basis(0.5, 0.0, -0.5, 6);
        let a = project_initial_data(|x| x * (1.0 - x), &b).unwrap();
        let ac = project_initial_data(|x| c * (x * (1.0 - x)), &b).unwrap();
        for (x, y) in a.iter().zip(&ac) {
            prop_assert!((c * x - y).abs() <= 1e-13 * (1.0 + y.abs()));
        }
    }

    #[test]
    fn derived_params_invariants(alpha in 0.0f64..1.99, beta in -0.9f64..2.0, frac in 0.0f64..1.0) {
        let s = alpha + beta;
        prop_assume!((s - 1.0).abs() > 1e-6);
        let mu = mu_critical(s) - frac * 3.0 - 1e-9;
        let p = ProblemParams { alpha, beta, mu, r: 0, t_final: 1.0 };
        let d = derive_params(&p).unwrap();
        prop_assert_eq!(d.ell, if s > 1.0 { 1 } else { 0 });
        prop_assert!(d.kappa > 0.0 && d.kappa <= 1.0);
        prop_assert!(d.nu >= 0.0);
        prop_assert!((d.kappa * d.nu - (mu_critical(s) - mu).sqrt()).abs() < 1e-12);
    }
}
