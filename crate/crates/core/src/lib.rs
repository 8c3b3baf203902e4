//! Exact moments of typical Poisson-Voronoi cell areas in K-tier networks where users
//! follow a generalized association rule, together with the base-station void
//! probability derived from them.
//!
//! Three independent routes are provided and cross-check each other:
//!
//! * [`analytic`]: closed forms (first moment in any dimension, single-tier second
//!   moment under instantaneous-power association at `alpha = 2`, Gamma baseline);
//! * [`quadrature`]: adaptive numerical integration of the exact moment integrals;
//! * [`montecarlo`]: a seeded, Palm-conditioned simulation oracle.

pub mod analytic;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod integrate;
pub mod model;
pub mod montecarlo;
pub mod quadrature;
pub mod voidprob;

pub use error::{Error, Result};
