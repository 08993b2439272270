//! Simulation and analysis of interrupted spin measurements.
//!
//! Two models are implemented side by side:
//!
//! * the stochastic-process (SP) model, in which the spin-up intensity `A = a/N`
//!   performs a lazy ±1 random walk on the lattice `{0, …, N}` with absorbing
//!   endpoints ([`sp`]), and a target passing a partial absorber `D1` followed by
//!   a rotated detector `D2` is simulated trajectory by trajectory ([`experiment`]);
//! * a three-outcome conventional extrapolation with a closed-form detector
//!   fraction ([`cqm`]).
//!
//! [`analytic`] holds the geometry (angle/intensity maps, frame rotation), the
//! exact short-walk law and the Gaussian approximations. [`harness`] runs
//! reproducible parallel ensembles and parameter sweeps, and [`io`] covers the
//! configuration files and output tables used by the `sgsim` command line tool.

pub mod analytic;
pub mod cqm;
mod error;
pub mod experiment;
pub mod harness;
pub mod io;
pub mod sp;

pub use error::{Error, Result};
