//! Semiclassical wave equations on the periodic lattice `hbar Z^n` with
//! time-dependent, possibly irregular or degenerate, propagation speed.

pub mod coefficients;
pub mod config;
pub mod energy_verifier;
pub mod error;
pub mod lattice_fourier;
pub mod mode_ode;
pub mod rk;
pub mod runner;
pub mod selftest;
pub mod semiclassical;
pub mod wave_solver;

pub use error::{Error, Result};
