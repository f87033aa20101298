//! Locally hypercyclic, non-hypercyclic matrix tuples at desk scale.
//!
//! The crate builds the commuting matrix tuples of the diagonal, Kronecker
//! and perturbed-scalar families, evaluates their power products in closed
//! form over log-domain scalars, solves the exponent approximation problems
//! behind their density properties, and produces checkable witnesses:
//! J-set witness sequences, membership probes through inverse orbits,
//! orbit-density reports and non-hypercyclicity certificates.

pub mod dioph;
pub mod error;
pub mod harness;
pub mod exec;
pub mod lognum;
pub mod tuples;
pub mod witness;

pub use error::{Error, Result};
pub use exec::Execution;
