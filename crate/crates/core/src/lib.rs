//! Jacobi-Maupertuis reformulation of mechanical and relativistic systems.
//!
//! The crate turns a natural Hamiltonian system (a spatial metric plus a
//! potential) or a stationary spacetime into a conformally rescaled
//! "Jacobi" metric whose geodesics are the fixed-energy trajectories of the
//! original system. It integrates both flows, moves trajectories between the
//! time and Jacobi-arc parametrizations, and checks the conserved quantities
//! that survive the transformation.
//!
//! Module map:
//!
//! - [`metric`]: coordinate points, metric fields, inversion, Christoffel symbols.
//! - [`field`]: scalar potentials and one-forms over a chart.
//! - [`jacobi`]: the Jacobi metric constructions (non-relativistic, stationary
//!   relativistic, time-dependent, projective).
//! - [`flow`]: Hamilton and Jacobi flows, the integrators, reparametrization
//!   and path comparison.
//! - [`curvature`]: Gaussian curvature of 2D conformally flat Jacobi metrics.
//! - [`catalog`]: Schwarzschild, Taub-NUT, Bertrand, Kerr and Kepler entries.
//! - [`lift`]: Eisenhart-Duval lifts and their projections.
//! - [`cli`]: scenario files and the `jacobi-flow` command line.

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::type_complexity)]

pub mod catalog;
pub mod cli;
pub mod curvature;
mod error;
pub mod field;
pub mod flow;
pub mod jacobi;
pub mod lift;
pub mod metric;

pub use error::{Error, Result};
