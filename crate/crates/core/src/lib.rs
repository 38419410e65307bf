//! Vertex flow sparsifiers for capacitated terminal networks.
//!
//! The crate is organized around one oracle ([`flow::lambda`], the concurrent
//! multicommodity flow value) and the constructions it certifies:
//!
//! - [`sketch`]: a graph-free dictionary answering (1+ε)-approximate λ queries.
//! - [`merging`]: vertex clumping, profile buckets and capacity-ratio types.
//! - [`splice`]: flow-path splicing and composition of sparsifiers.
//! - [`sampling`]: importance sampling of non-terminals.
//! - [`structured`]: mimicking networks for k ≤ 4, series-parallel and
//!   bounded-treewidth recursions.
//! - [`verify`]: quality reports comparing two networks over demand sets.

pub mod error;
pub mod flow;
pub mod generate;
pub mod lp;
pub mod merging;
pub mod network;
pub mod rational;
pub mod sampling;
pub mod sketch;
pub mod splice;
pub mod structured;
pub mod verify;

pub use error::{Error, Result};
pub use network::{phi_merge, DemandVector, TerminalNetwork, VertexPartition};
pub use rational::Rational;
