//! Exact prover and numerical laboratory for quantum entropy inequalities.
//!
//! * [`entropy`]: subset indexing, entropy vectors, information expressions.
//! * [`cones`]: the Shannon and von Neumann cones as inequality lists.
//! * [`lp`] and [`prover`]: exact rational simplex and derivability certificates.
//! * [`polyhedra`]: double description ray enumeration and orbit classification.
//! * [`quantum`]: density matrices, entropies, structured state families.
//! * [`experiments`]: seeded numerical harnesses over those families.

pub mod cones;
pub mod entropy;
pub mod error;
pub mod experiments;
pub mod lp;
pub mod polyhedra;
pub mod prover;
pub mod quantum;

pub use error::{Error, Result};
