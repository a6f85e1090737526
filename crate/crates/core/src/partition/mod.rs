//! Spectral bipartitioning of 3-uniform hypergraphs through a latent directed
//! graph, sweep cuts, and recursive multiway splitting.
//!
//! The MLPPR ordering contracts the normalized tensor with the MLPPR
//! solution, `A = Pbar x_3 y`, and orders vertices by the second left
//! eigenvector of the symmetrized chain `(Pi M^T Pi^-1 + M)/2`, where `M` is
//! the column-normalized `A` with teleportation and `pi` its stationary
//! distribution.

mod chain;
mod sweep;

pub use chain::{
    second_eigenvector, sym_transpose_apply, EigenMethod, LatentGraph, SecondEigen, TeleportedChain, DENSE_EIGEN_LIMIT,
    STATIONARY_TOL,
};
pub use sweep::{normalized_cut, sweep_cut, SweepCut};

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::UniformHypergraph;
use crate::solver::{solve_mlppr, PageRankProblem, SolveOptions};
use crate::stochastic::uniform;
use crate::tensor::CooMatrix;

/// How the latent graph is built.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderingMethod {
    /// `Pbar x_3 y` with `y` the MLPPR solution.
    Mlppr,
    /// `P x_3 x` with the dangling-corrected tensor and the MPR solution.
    Mpr,
    /// Clique expansion: each 3-edge adds its weight to its three vertex pairs.
    Gpr,
}

#[derive(Clone, Debug)]
pub struct PartitionOptions {
    pub method: OrderingMethod,
    pub alpha: f64,
    /// Teleportation vector of the PageRank problem; `e/n` when absent.
    pub v: Option<Vec<f64>>,
    pub solve: SolveOptions,
    pub eigen: EigenMethod,
    pub eigen_tol: f64,
    pub eigen_max_iter: usize,
    pub stationary_max_iter: usize,
    /// Seeds the power-iteration start vector.
    pub seed: u64,
}

impl Default for PartitionOptions {
    fn default() -> Self {
        Self {
            method: OrderingMethod::Mlppr,
            alpha: 0.99,
            v: None,
            solve: SolveOptions::default(),
            eigen: EigenMethod::Auto,
            eigen_tol: 1e-10,
            eigen_max_iter: 100_000,
            stationary_max_iter: 100_000,
            seed: 0,
        }
    }
}

/// Intermediate quantities of one spectral ordering.
#[derive(Clone, Debug)]
pub struct PartitionState {
    pub latent: LatentGraph,
    pub pi: Vec<f64>,
    pub stationary_residual: f64,
    pub eigen: SecondEigen,
    /// Vertices sorted by `eigen.x` ascending, ties by index.
    pub order: Vec<usize>,
    /// PageRank solver iterations; zero for the graph ordering.
    pub solver_iterations: usize,
}

/// The latent adjacency for `method`.
pub fn latent_graph(h: &UniformHypergraph, opts: &PartitionOptions) -> Result<(LatentGraph, usize)> {
    let n = h.n();
    if h.order() != 3 {
        return Err(Error::UnsupportedOrder {
            order: h.order(),
            reason: "spectral bipartition contracts a 3rd-order tensor",
        });
    }
    if opts.method == OrderingMethod::Gpr {
        let mut entries = Vec::with_capacity(h.num_edges() * 6);
        for e in h.edges() {
            let vs = e.vertices();
            for a in 0..vs.len() {
                for b in 0..vs.len() {
                    if a != b {
                        entries.push((vs[a], vs[b], e.weight()));
                    }
                }
            }
        }
        let sparse = CooMatrix::new(n, n, entries)?;
        return Ok((LatentGraph { sparse, rank_one: None }, 0));
    }
    let v = opts.v.clone().unwrap_or_else(|| uniform(n));
    let problem = PageRankProblem::from_hypergraph(h, opts.alpha, v)?;
    let report = solve_mlppr(&problem, &opts.solve)?;
    if !report.converged {
        return Err(Error::NotConverged { iterations: report.iterations, residual: report.residual_eq });
    }
    let pbar = problem.tensor();
    match opts.method {
        OrderingMethod::Mlppr => {
            let sparse = pbar.contract_to_matrix(&report.y)?;
            Ok((LatentGraph { sparse, rank_one: None }, report.iterations))
        }
        OrderingMethod::Mpr => {
            let mass: f64 = report.y.iter().sum();
            let x: Vec<f64> = report.y.iter().map(|yi| yi / mass).collect();
            let sparse = pbar.contract_to_matrix(&x)?;
            // the correction adds v_i (e^T x - sum_l s_jl x_l), and the last
            // sum is column j's mass in the contracted base
            let total: f64 = x.iter().sum();
            let c: Vec<f64> = sparse.col_sums().iter().map(|s| (total - s).max(0.0)).collect();
            Ok((LatentGraph { sparse, rank_one: Some((problem.v().to_vec(), c)) }, report.iterations))
        }
        OrderingMethod::Gpr => unreachable!(),
    }
}

/// Builds the latent graph, its stationary distribution, and the eigenvector
/// ordering.
pub fn spectral_order(h: &UniformHypergraph, opts: &PartitionOptions) -> Result<PartitionState> {
    if h.n() < 2 {
        return Err(Error::Degenerate(format!("cannot split {} vertices", h.n())));
    }
    let (latent, solver_iterations) = latent_graph(h, opts)?;
    let chain = TeleportedChain::new(latent, opts.alpha)?;
    let (pi, stationary_residual) = chain.stationary(opts.stationary_max_iter)?;
    let eigen = second_eigenvector(&chain, &pi, opts.eigen, opts.eigen_tol, opts.eigen_max_iter, opts.seed)?;
    let mut order: Vec<usize> = (0..h.n()).collect();
    order.sort_by(|&a, &b| eigen.x[a].total_cmp(&eigen.x[b]).then(a.cmp(&b)));
    Ok(PartitionState { latent: chain.graph().clone(), pi, stationary_residual, eigen, order, solver_iterations })
}

/// Spectral ordering followed by the best prefix sweep cut.
pub fn bipartition(h: &UniformHypergraph, opts: &PartitionOptions) -> Result<SweepCut> {
    let state = spectral_order(h, opts)?;
    sweep_cut(h, &state.order)
}

#[derive(Clone, Debug, Serialize)]
pub struct RecursivePartition {
    /// Disjoint sorted parts covering every vertex.
    pub parts: Vec<Vec<usize>>,
    /// Why the target count was not reached, if it was not.
    pub diagnostics: Vec<String>,
}

/// Splits the largest splittable part, on the sub-hypergraph induced by it,
/// until `parts` parts exist or nothing can be split.
pub fn recursive_partition(h: &UniformHypergraph, parts: usize, opts: &PartitionOptions) -> Result<RecursivePartition> {
    if parts < 2 {
        return Err(Error::InvalidParameter(format!("parts={parts} must be at least 2")));
    }
    if h.order() != 3 {
        return Err(Error::UnsupportedOrder {
            order: h.order(),
            reason: "spectral bipartition contracts a 3rd-order tensor",
        });
    }
    let mut current: Vec<(Vec<usize>, bool)> = vec![((0..h.n()).collect(), true)];
    let mut diagnostics = Vec::new();
    while current.len() < parts {
        let Some(pos) = (0..current.len())
            .filter(|&i| current[i].1)
            .max_by(|&a, &b| current[a].0.len().cmp(&current[b].0.len()).then(b.cmp(&a)))
        else {
            diagnostics.push(format!("stopped at {} of {parts} parts: no part can be split", current.len()));
            break;
        };
        let members = current[pos].0.clone();
        let sub = h.induced(&members);
        if sub.num_edges() == 0 {
            diagnostics.push(format!("part of {} vertices has no internal edges", members.len()));
            current[pos].1 = false;
            continue;
        }
        match bipartition(&sub, opts) {
            Ok(cut) => {
                let left: Vec<usize> = cut.s.iter().map(|&i| members[i]).collect();
                let right: Vec<usize> = cut.s_bar().iter().map(|&i| members[i]).collect();
                current[pos] = (left, true);
                current.insert(pos + 1, (right, true));
            }
            Err(e) => {
                diagnostics.push(format!("part of {} vertices not split: {e}", members.len()));
                current[pos].1 = false;
            }
        }
    }
    Ok(RecursivePartition { parts: current.into_iter().map(|(p, _)| p).collect(), diagnostics })
}

/// Part index of every vertex.
pub fn labels(parts: &[Vec<usize>], n: usize) -> Vec<usize> {
    let mut out = vec![usize::MAX; n];
    for (p, part) in parts.iter().enumerate() {
        for &v in part {
            out[v] = p;
        }
    }
    out
}

/// Writes `vertex,part` rows with 1-based vertices, or `ids[v]` when given.
pub fn write_partition_csv<W: Write>(mut w: W, parts: &[Vec<usize>], ids: Option<&[u64]>) -> Result<()> {
    let mut rows = BTreeMap::new();
    for (p, part) in parts.iter().enumerate() {
        for &v in part {
            rows.insert(v, p);
        }
    }
    writeln!(w, "vertex,part")?;
    for (v, p) in rows {
        match ids {
            Some(ids) => writeln!(w, "{},{p}", ids[v])?,
            None => writeln!(w, "{},{p}", v + 1)?,
        }
    }
    Ok(())
}

/// Writes the sweep curve as `i,h`.
pub fn write_hcurve_csv<W: Write>(mut w: W, cut: &SweepCut) -> Result<()> {
    writeln!(w, "i,h")?;
    for (i, h) in cut.h.iter().enumerate() {
        writeln!(w, "{},{h:e}", i + 1)?;
    }
    Ok(())
}
