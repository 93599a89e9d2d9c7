//! Monotone overlapping domain decomposition for nonlinear integro-parabolic
//! equations with a Volterra memory term,
//!
//! ```text
//! u_t - (a u_xx + b u_x) = f(t, x, u) + ∫₀ᵗ g₀(t, x, s, u(t, x), u(s, x)) ds   on (0, T) × (x_l, x_r)
//! α₀ ∂u/∂ν + β₀ u = h                                                      at x_l, x_r
//! u(0, x) = u₀(x)
//! ```
//!
//! The solver starts from an ordered subsolution/supersolution pair and runs
//! four bracketing sequences over two overlapping subintervals. Every linear
//! subproblem is an implicit-Euler, upwinded finite-difference system whose
//! matrix is an M-matrix, so the discrete comparison principle holds and the
//! lower and upper iterates squeeze monotonically onto the discrete solution.
//!
//! Module map:
//!
//! * [`model`]: the continuous problem, its hypotheses and the named catalog.
//! * [`discretization`]: grids, fields, stencil assembly and the time stepper.
//! * [`volterra`]: memory quadrature, stabilizing coefficients and `F1`.
//! * [`iteration`]: the two-subdomain sweep and the single-domain oracle.
//! * [`verify`]: residual, chain, M-matrix and convergence-order checks.
//! * [`cli`]: JSON config, CSV output and exit codes.

// `!(x > 0.0)` is used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod discretization;
pub mod error;
pub mod iteration;
pub mod model;
pub mod verify;
pub mod volterra;

pub use error::{Error, Result};
