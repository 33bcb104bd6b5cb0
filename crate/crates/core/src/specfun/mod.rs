//! Gamma, Bessel J and I, and zeros of J_nu.

mod bessel;
mod gamma;
mod zeros;

pub use bessel::{bessel_i_scaled, bessel_j, bessel_j_prime, ln_bessel_i, BesselOrder};
pub use gamma::{gamma, ln_gamma, GAMMA_MAX_ARG};
pub use zeros::{bessel_zeros, mcmahon_zero, ZeroTable};
