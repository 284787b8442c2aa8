//! Primal-dual learning for contextual bandits with linear (packing and
//! covering) constraints.
//!
//! The crate is organised around the repeated Lagrangian game:
//!
//! - [`env`] describes problem instances and samples outcome matrices.
//! - [`lagrangian`] computes the per-round Lagrange payoffs the two players
//!   exchange.
//! - [`duals`] holds the full-feedback learners over resources (Hedge and
//!   Fixed-Share).
//! - [`primal_bandit`] and [`primal_squarecb`] are the arm-choosing learners,
//!   the latter driven by online [`regression`] oracles.
//! - [`orchestrator`] runs the game loop and records a [`orchestrator::RunLog`].
//! - [`benchmark`] solves the linear-programming benchmarks and turns run logs
//!   into metrics and saddle-point diagnostics.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod benchmark;
pub mod duals;
pub mod env;
mod error;
pub mod lagrangian;
pub mod orchestrator;
pub mod primal_bandit;
pub mod primal_squarecb;
pub mod regression;
mod util;

pub use error::{Error, Result};
