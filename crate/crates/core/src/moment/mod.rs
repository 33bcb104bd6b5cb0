//! Biorthogonal family to the exponentials e^{-lambda_k^2 t} on (0, T).

pub mod family;
pub mod multiplier;
pub mod product;

pub use family::{BiorthogonalFamily, DefectMatrix, FamilyConfig, Interpolants, LineInfo, PsiMode};
pub use multiplier::{sigma_bump, Multiplier, MultiplierParams};
pub use product::{lambda_prime_log, LambdaPrime, LambdaProduct};
