//! Numerical implementation of the QuEST function (Quantized Eigenvalues
//! Sampling Transform).
//!
//! Given population covariance eigenvalues `τ` and a sample size `n`,
//! [`quest`] returns the `p` sample eigenvalues predicted by large-dimensional
//! asymptotics, together with the analytic Jacobian `∂λ/∂τ`. [`invert`]
//! estimates population eigenvalues from observed sample eigenvalues, and the
//! [`sim`] module runs seeded Monte Carlo convergence studies.
//!
//! The evaluation pipeline runs in six stages, one module each:
//! [`support`] → [`grid`] → [`density`] (MP solve and density mapping) →
//! [`cdf`] (integration and quantization).

pub mod cdf;
pub mod cli;
pub mod density;
pub mod error;
pub mod eval;
pub mod grid;
pub mod invert;
pub mod root;
pub mod sim;
pub mod spectrum;
pub mod support;

pub use error::{QuestError, Result, Stage};
pub use eval::{
    compare_jacobians, quest, quest_fd_jacobian, quest_with, FdJacobian, FdStep, JacobianCheck,
    QuestOptions, QuestOutput,
};
pub use invert::{invert, InversionResult, InvertOptions};
pub use spectrum::{group_spectrum, GroupedSpectrum, PopulationSpectrum};
pub use support::SupportU;
