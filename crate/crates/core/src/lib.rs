//! Optimal binary AIFV-2 codes: code trees, encoding, decoding and exact
//! solvers for the minimum asymptotic average codeword length.

pub mod cli;
pub mod codec;
pub mod codetree;
pub mod error;
pub mod geometry;
pub mod numeric;
pub mod solvers;
pub mod treeopt;

pub use codec::{aifv_cost, decode, encode, BitStream, CodePair};
pub use codetree::{CodeTree, NodeKind, TreeKind, TreeMetrics};
pub use error::{Error, Result};
pub use numeric::{make_dist, parse_prob, ExactScalar, SourceDist};
pub use geometry::{envelope_at, separation_oracle, CostLine, PlanePoint, SeparationResult};
pub use solvers::{solve, solve_binary_search, solve_ellipsoid, solve_iterative, Method, SolveReport};
pub use treeopt::{best_tree, exhaustive_optimum};
