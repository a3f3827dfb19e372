//! Matrix-free second-order optimization built around the saddle-free Newton
//! step `-α|H|⁻¹∇f`.
//!
//! The absolute-value Hessian is never formed. Instead `|H| = (H²)^½` is
//! applied to a vector by integrating an initial value problem whose right-hand
//! side needs only products with `H²` and inner conjugate-gradient solves, so
//! the whole step costs `O(m·l·k)` products and `O(m)` memory for `m`
//! parameters, `l` integration steps, and `k` CG iterations.
//!
//! Modules:
//! - [`linalg`]: dense vectors, the matrix-free symmetric operator, power
//!   iteration for spectral norms.
//! - [`krylov`]: conjugate gradients with early stopping.
//! - [`sqrt_ode`]: `A^½v` by fixed-step Runge-Kutta integration.
//! - [`dense`]: dense eigendecomposition ground truth and the dense Newton /
//!   saddle-free Newton baselines (dimension-capped).
//! - [`objectives`]: benchmark objectives with exact Hessian-vector products,
//!   including a forward-over-reverse (R-operator) implementation for a small
//!   multilayer perceptron.
//! - [`optim`]: the saddle-free Hessian-free step, baselines, and the outer
//!   loop with trace capture.
//!
//! The crate is `no_std`-compatible (requires `alloc`); the `std` feature
//! (default) enables wall-clock timing in traces.

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(unsafe_code)]
#![warn(missing_docs)]

extern crate alloc;

pub mod dense;
mod error;
mod fmath;
pub mod krylov;
pub mod linalg;
pub mod objectives;
pub mod optim;
pub mod sqrt_ode;

pub use error::Error;
pub use linalg::{SymmetricOperator, Vector};
