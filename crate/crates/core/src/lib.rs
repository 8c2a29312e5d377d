//! Numerical tools for gamma distributed delay differential equations.
//!
//! The crate solves equations of the form
//!
//! ```text
//! X'(t) = F(X(t), ∫₀^∞ X(t - s) g(s) ds),    X(s) = ψ(s) for s ≤ t₀,
//! ```
//!
//! where `g` is a gamma density, using a 4th order functionally continuous
//! Runge-Kutta method ([`fcrk`]) whose convolution is evaluated on a compact
//! domain after a change of variables ([`quadrature`]).  It also builds the
//! finite dimensional ODE approximations obtained by replacing the gamma kernel
//! with an Erlang or a two-moment hypoexponential kernel ([`approximations`],
//! [`chain`]), and the analysis and epidemic-likelihood layers on top.
//!
//! Runnable walkthroughs of every capability live in the crate's `examples/`
//! directory.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod approximations;
pub mod chain;
pub mod cli;
pub mod distributions;
pub mod epi;
pub mod error;
pub mod fcrk;
pub mod ode;
pub mod optim;
pub mod problems;
pub mod quadrature;
pub mod special;

pub use approximations::{ApproxConfig, ChainParams, Variant};
pub use chain::{ChainOdeProblem, HistoryFunction, InitMode};
pub use distributions::{GammaKernel, HypoexpKernel, Rng};
pub use error::{Error, Result};
pub use fcrk::{fcrk4_solve, DdeProblem, FcrkTableau, Solution};
pub use quadrature::{QuadConfig, TransformParams};
