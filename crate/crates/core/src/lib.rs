//! Multi-linear pseudo-PageRank (MLPPR) on k-uniform hypergraphs.
//!
//! The crate covers adjacency-tensor construction and fiber normalization,
//! sparse tensor contractions, the tensor splitting MLPPR solver and the
//! fixed-point MPR solver, spectral bipartitioning with sweep cuts,
//! directed-3-cycle motif hypergraphs, line-fitting subspace clustering, and
//! perturbation experiments.
//!
//! Vertices are 0-based in the API and 1-based in files.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x >= 0.0)` also rejects NaN

pub mod correction;
pub mod error;
pub mod fixtures;
pub mod hypergraph;
pub mod motifs;
pub mod partition;
pub mod perturb;
pub mod solver;
pub mod stochastic;
pub mod subspace;
pub mod tensor;

pub use correction::{CorrectionMode, DanglingCorrection};
pub use error::{Error, Result};
pub use hypergraph::UniformHypergraph;
pub use solver::{PageRankProblem, SolveOptions, SolveReport};
pub use tensor::{FiberIndex, MultilinearOperator, SparseKTensor, Symmetry};
