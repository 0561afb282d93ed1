//! Pseudo-spectral operator-splitting solvers for active scalar equations
//!
//! ```text
//! u_t + div(u v(u)) = A(u)
//! ```
//!
//! on the periodic torus `[0, 2π)^N`, `N = 1, 2, 3`. `A` is a linear Fourier
//! multiplier (derivatives, fractional Laplacians, mixtures) and `v` a linear
//! velocity operator (Burgers, SQG, aggregation, or a user table). The
//! equation is advanced by Godunov or Strang splitting into an exact linear
//! flow and an RK4-integrated transport flow, and [`diagnostics`] measures
//! the convergence order of either scheme against a certified fine reference.

pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod harness;
pub mod operators;
pub mod splitting;
pub mod subflows;

pub use error::{Error, Result};
