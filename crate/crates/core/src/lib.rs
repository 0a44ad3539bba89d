//! Computational laboratory for the self-action description of spin-1/2
//! particles: exact α²-series of the electron radial system, weighted
//! quadrature of the mass condition, the neutrino closed form, bispinor
//! bilinear densities and an exploratory proton solver.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision, clippy::too_many_arguments)]

pub mod config;
pub mod densities;
pub mod error;
pub mod exec;
pub mod loglaurent;
pub mod neutrino;
pub mod ode;
pub mod mass;
pub mod potentials;
pub mod proton;
pub mod quadrature;
pub mod report;
pub mod roots;
pub mod series;
pub mod verify;

pub use error::{Error, Result};
pub use exec::Execution;
pub use loglaurent::{LogLaurentPoly, Monomial};
