//! Null controllability of the degenerate fourth-order equation
//! u_t + A^2 u = 0 on (0,1) with
//! A u = -(x^alpha u_x)_x - beta x^(alpha-1) u_x - mu x^(alpha-2) u,
//! controlled through the weighted boundary trace at the degenerate end.
//!
//! The crate builds the Bessel eigenbasis of A, a biorthogonal family to the
//! exponentials exp(-lambda_k^2 t) by the moment method, the resulting
//! null control, and explicit upper and lower bounds for the control cost.

pub mod cli;
pub mod control;
pub mod cost;
pub mod error;
pub mod logscale;
pub mod moment;
pub mod quadrature;
pub mod specfun;
pub mod spectral;

pub use error::{Error, Result};
