//! Radial Keller–Segel lab: admissibility regions, finite-volume solvers for
//! the Jäger–Luckhaus (JL) and parabolic–elliptic (PE) variants, moment
//! functionals, blow-up certificates and trajectory ledgers.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod params;
pub mod regions;
pub mod grid;
pub mod linalg;
pub mod quadrature;
pub mod elliptic;
pub mod functionals;
pub mod solver;
pub mod certificates;
pub mod monitor;
pub mod config;
pub mod io;
pub mod demos;
pub mod cli;

pub use error::{Error, Result};
pub use grid::{GridKind, MassFunction, RadialField, RadialGrid};
pub use params::{CoefficientFn, ModelParams, Variant};
