//! Problem parameters, the Bessel eigenbasis of A in L^2((0,1), x^beta dx),
//! boundary traces, projections and operator checks.

mod basis;
mod ops;
mod params;

pub use basis::{
    eigenfunction, eigenfunction_derivative, Mode, ModalBasis, WeightedQuadrature, DEFAULT_QUAD_TOL, DYADIC_PANELS,
    PANEL_ORDER,
};
pub use ops::{
    apply_a2_residual, interp_norm, project_initial_data, project_sampled, semigroup_coeffs, verify_hardy_poincare,
    weighted_inner_product, weighted_norm_sq, HardyPoincare, InterpConvention,
};
pub use params::{derive_params, mu_critical, rho_constants, DerivedParams, ProblemParams, Regime, RhoConstants};

/// Weighted boundary trace of Phi_k at the degenerate end.
pub fn boundary_trace(m: &Mode) -> crate::logscale::LogScaled {
    m.trace()
}
