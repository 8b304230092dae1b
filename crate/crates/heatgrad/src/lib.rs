//! heatgrad: a numerical laboratory for sharp gradient bounds on positive
//! solutions of the heat equation.
//!
//! The crate evaluates the classical and sharp bound profiles for
//! |grad u|^2 / u^2 in terms of the log-ratio s = log(M/u), provides exact
//! solution families and a positivity-preserving finite-difference solver
//! on model geometries, and drives verification batteries: upper-bound
//! certification with empirical constants, extremal lower-bound search,
//! pseudo-Harnack and modulus-of-continuity checks, and heat-kernel
//! anchors. Reports serialize deterministically to CSV and JSON.
//!
//! Start with the runnable programs under `examples/`; the `heatgrad`
//! binary exposes the same capabilities as batch subcommands.

pub mod auxfn;
pub mod bounds;
pub mod cli;
mod error;
pub mod pde;
pub mod report;
pub mod solutions;
pub mod sweep;
pub mod verify;

pub use error::{Error, Result};
