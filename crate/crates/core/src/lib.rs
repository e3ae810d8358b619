//! Compositional AMR parsing via a typed apply/modify graph algebra.
//!
//! The toolkit is organized around five pieces:
//!
//! - [`amtypes`]: the recursive type system and the pure type-level
//!   operation arithmetic decoders branch on.
//! - [`asgraph`]: annotated source graphs (rooted labeled graphs with named
//!   open argument slots) and the graph-level apply/modify operations.
//! - [`amdep`]: dependency trees over token sequences whose edges are
//!   algebra operations; well-typedness checking and evaluation to graphs.
//! - [`decode`]: decoding factored score tables into well-typed dependency
//!   trees: a projective chart decoder, a fixed-tree decoder on a maximum
//!   arborescence skeleton, an exact exponential oracle, a type-unaware
//!   baseline, and a Hamiltonian-path reduction showing why the exact
//!   problem is hard.
//! - [`corpus`]: the corpus pipeline: PENMAN I/O, pre/postprocessing,
//!   alignment, decomposition into elementary graphs, treebank
//!   construction, count-based scoring, and Smatch evaluation.

pub mod amdep;
pub mod amtypes;
pub mod asgraph;
pub mod corpus;
pub mod decode;
pub mod gen;
pub(crate) mod util;

pub use amtypes::{AmType, EdgeOp, SourceName};
pub use asgraph::AsGraph;
