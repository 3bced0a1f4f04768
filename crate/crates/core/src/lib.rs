//! Numerical laboratory for the trace coefficients of `(A + tB)^m`.
//!
//! * [`matrix`]: dense complex matrices, a Jacobi Hermitian eigensolver, PSD
//!   projection, pseudo-inverse and the matrix JSON format.
//! * [`rng`]: seeded, platform-stable random matrices.
//! * [`hurwitz`]: Hurwitz products `S_{m,k}(A,B)` by recurrence and by word
//!   enumeration, trace coefficients, word traces.
//! * [`variational`]: gradients of `Tr S_{m,k}` and the stationarity residuals.
//! * [`search`]: multistart optimization, diagnostics and `(m,k)` sweeps.

pub mod error;
pub mod hurwitz;
pub mod matrix;
pub mod rng;
pub mod search;
pub mod variational;

pub use error::{LabError, Result};
pub use hurwitz::{
    binomial, check_trace_lemmas, coefficients, hurwitz_enum, hurwitz_table, negative_word_search,
    word_trace, CoeffVector, HurwitzTable, WordSearchResult, WordSpec,
};
pub use matrix::{
    congruence, frob_norm, herm_eig, psd_project, pseudo_inverse, rel_err, rel_err_mat, ComplexMat,
    HermitianMat, PsdUnit, Spectrum, C64,
};
pub use rng::{random_psd_unit, LabRng};
pub use search::{
    diagnostics, maximize_hermitian, minimize, optimize, product_eigen_check, sweep, Diagnostics,
    KRule, Mode, OptimConfig, RunReport, SweepReport,
};
pub use variational::{
    el_consequence_check, el_residual, grad_a, grad_b, normalized_congruence_derivative, Direction,
    ELResidual,
};
