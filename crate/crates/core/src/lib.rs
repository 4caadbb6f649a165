//! Resonances of narrow slits in a perfectly conducting slab.
//!
//! Lengths are in units of the slab thickness. The crate provides special
//! functions, the mode-matching kernels, asymptotic resonance formulas and a
//! direct solver for the truncated mode-matching system.

pub mod asymptotic;
pub mod direct;
pub mod error;
pub mod kernels;
pub mod linalg;
pub mod quadrature;
pub mod specfun;

pub use num_complex::Complex64;

pub use asymptotic::{
    alpha_closed, alpha_truncated, delta_fn, mode_coefficients, resonance_asym, s_matrix, Method,
    ModeCoefficients, ModeLabel, Order, Resonance, SearchRegion, SlitArray,
};
pub use direct::{
    assemble_multi, assemble_single, find_resonances, operator_norm_check, refine_root,
    resonance_direct, sigma_min, CrossMode, DirectOptions, OperatorNorms, RootSolveReport,
    TruncatedSystem,
};
pub use error::{Error, Result};
pub use kernels::{c_cross, c_single, Backend, KernelValue, Parity, QuadratureConfig};
pub use linalg::CMatrix;
