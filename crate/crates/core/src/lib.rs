//! Local search for k-set packing.
//!
//! The search repeatedly looks for a canonical improvement (a small connected
//! structure of two cycles) in the auxiliary multigraph of the current
//! packing. Improvements are found either by color coding over the ground
//! elements or by exhaustive enumeration. Also included are exact oracles,
//! the structural lemmas the analysis relies on, and a generator for
//! instances where bounded local search is stuck at ratio `k/3`.

pub mod auxgraph;
pub mod colorcoding;
pub mod error;
pub mod graph;
pub mod instance;
pub mod lemmas;
pub mod localsearch;
pub mod lowerbound;
pub mod oracle;
pub mod report;
pub mod scalar;

pub use error::{Error, Result};
pub use instance::{Element, Instance, KSet, Packing, SetId};
pub use localsearch::{run_local_search, SearchConfig, Subroutine};
pub use scalar::Scalar;

/// Exact scalar for probabilities and bounds.
pub type Exact = num::rational::BigRational;
/// Floating-point scalar for reports.
pub type Approx = f64;
