//! Numerical laboratory for the complex random energy model.
//!
//! The partition function `Z_N(β) = Σ_k exp(√n (σ X_k + i τ Y_k))` with
//! `n = log N` and correlated standard Gaussian pairs `(X_k, Y_k)` is
//! evaluated, its complex zeros are localized, and its fluctuations are
//! compared against the limiting laws (complex Gaussian, isotropic stable,
//! Poisson zeta function, plane Gaussian analytic function).

pub mod analytic;
pub mod cli;
pub mod error;
pub mod fluct;
pub mod partition;
pub mod phase;
pub mod quad;
pub mod sampling;
pub mod specfun;
pub mod stats;
pub mod xi;
pub mod zeros;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use phase::{classify, limit_p, ComplexParam, PhaseLabel, RemConfig};
