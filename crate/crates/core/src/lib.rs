//! Solvers and verifiers for the coupled critical system
//! `-Δu = u^α v^β`, `-Δv = u^β v^α` with `α + β = (n+2)/(n-2)`.
//!
//! The crate integrates the radial ODE form, checks solutions against the
//! explicit bubble family, runs shooting sweeps over `u(0)/v(0)`, evaluates the
//! Newtonian potential and HLS functionals, and checks the moving-plane
//! estimates on sampled fields.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bubble;
pub mod cli;
pub mod config;
pub mod error;
pub mod grid;
pub mod moving_plane;
pub mod norm;
pub mod ode;
pub mod potential;
pub mod quadrature;
pub mod shooting;
pub mod verify;

pub use bubble::{bubble_residual, eval_bubble, make_bubble, BubbleParams};
pub use config::{validate_config, ExponentConfig, RunConfig};
pub use error::{Error, Result};
pub use grid::{GridSpec, RadialGrid, RadialProfilePair};
pub use norm::{lp_norm_radial, LpNorm};
pub use shooting::{classify, integrate_radial, uniqueness_sweep, ShootInput, ShootKind, ShootOutcome};
