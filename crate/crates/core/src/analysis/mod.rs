//! Convergence studies, reference solutions and the quantitative checks on
//! the kernel approximations.

pub mod convergence;
pub mod mgf;
pub mod moment_poly;
pub mod reference;
pub mod stability;
pub mod survival;

pub use convergence::{estimate_order, fcrk_convergence, ConvergenceReport, ErrorNorm};
pub use mgf::{mgf_error, mgf_error_order};
pub use moment_poly::{fm_polynomial, gm_checks, GmCheckReport, MomentPolynomial};
pub use reference::{linear_test_reference, logistic_test_reference};
pub use stability::{dominant_eigenvalue, growth_rate, linear_chain_matrix};
pub use survival::{integer_jump, survival_compare};
