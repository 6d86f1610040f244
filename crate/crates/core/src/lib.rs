//! Variational Monge-Ampère solvers, pluricomplex energies, capacities and
//! balanced metrics on torus-invariant models of P1 and P2.
//!
//! Potentials are stored in the logarithmic coordinate `t = log|z|^2` as
//! convex functions `psi = psi_FS + 2 phi`, so psh envelopes become lower
//! convex hulls and Monge-Ampère measures become subgradient measures.

pub mod balanced;
pub mod electrostatics;
pub mod envelope;
pub mod error;
pub mod functionals;
pub mod geodesic;
pub mod hull;
pub mod io;
pub mod ma;
pub mod measure;
pub mod measures;
pub mod model;
pub mod potential;
pub mod sampling;
pub mod solver;
pub mod suites;

pub use error::{Error, Result};
pub use measure::MeasureField;
pub use model::{make_model, ModelSpec, OnGrid, ToricModel};
pub use potential::Potential;
