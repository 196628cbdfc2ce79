//! Green-function fixed-point solver for
//!
//! ```text
//! -Δu + V_ω u = b u|u|^(p-1) + g   in U,   u = 0 on ∂U,
//! ```
//!
//! on a ball `U ⊂ ℝⁿ`, with a random potential `V_ω = f * μ_ω` built from a
//! random finite measure, plus Monte Carlo tools for studying the solution
//! norm `‖u_ω‖∞` across realizations.

#[cfg(feature = "cli")]
pub mod cli;
pub mod domain;
pub mod ensemble;
pub mod error;
pub mod experiment;
pub mod measures;
pub mod operator;
pub mod potential;
pub mod solver;
pub mod stats;

pub use error::{Error, Result};
