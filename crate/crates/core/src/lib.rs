//! Exact and Monte Carlo experiments with Bergman projections on monomial
//! polyhedra.

pub mod exact;
pub mod bergman;
pub mod cli;
pub mod estimator;
pub mod exponent;
pub mod lattice;
pub mod measure;
pub mod quadrature;
pub mod report;
pub mod sampling;

pub use exponent::ExponentVector;
