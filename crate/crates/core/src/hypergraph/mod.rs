//! Weighted k-uniform hypergraphs and their adjacency tensors.

mod io;

pub use io::{read_hypergraph, write_hypergraph};

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::tensor::{factorial, SparseKTensor, Symmetry};

/// A hyperedge in canonical form: undirected edges are sorted; directed arcs
/// keep sorted tails followed by the head.
#[derive(Clone, Debug, PartialEq)]
pub struct Hyperedge {
    vertices: Vec<usize>,
    weight: f64,
}

impl Hyperedge {
    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// Last vertex; meaningful for directed arcs.
    pub fn head(&self) -> usize {
        *self.vertices.last().unwrap()
    }

    pub fn tails(&self) -> &[usize] {
        &self.vertices[..self.vertices.len() - 1]
    }
}

#[derive(Clone, Debug)]
pub struct UniformHypergraph {
    n: usize,
    k: usize,
    directed: bool,
    edges: Vec<Hyperedge>,
}

impl UniformHypergraph {
    /// Validates and canonicalizes the edge list. Directed tuples are
    /// `(tail_1, ..., tail_{k-1}, head)`.
    pub fn new<I>(n: usize, k: usize, directed: bool, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<usize>, f64)>,
    {
        if k < 2 {
            return Err(Error::InvalidHypergraph(format!("order k={k} must be at least 2")));
        }
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for (mut vertices, weight) in edges {
            if vertices.len() != k {
                return Err(Error::InvalidHypergraph(format!(
                    "edge {vertices:?} has {} vertices, expected {k}",
                    vertices.len()
                )));
            }
            if let Some(&v) = vertices.iter().find(|&&v| v >= n) {
                return Err(Error::InvalidHypergraph(format!("vertex {v} out of range n={n}")));
            }
            if !(weight > 0.0 && weight.is_finite()) {
                return Err(Error::InvalidHypergraph(format!("weight {weight} must be positive")));
            }
            let mut set = vertices.clone();
            set.sort_unstable();
            if set.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidHypergraph(format!("edge {vertices:?} repeats a vertex")));
            }
            if directed {
                vertices[..k - 1].sort_unstable();
            } else {
                vertices = set;
            }
            if !seen.insert(vertices.clone()) {
                return Err(Error::InvalidHypergraph(format!("duplicate edge {vertices:?}")));
            }
            out.push(Hyperedge { vertices, weight });
        }
        Ok(Self { n, k, directed, edges: out })
    }

    /// Undirected hypergraph with unit weights.
    pub fn unweighted<I, E>(n: usize, k: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = E>,
        E: AsRef<[usize]>,
    {
        Self::new(n, k, false, edges.into_iter().map(|e| (e.as_ref().to_vec(), 1.0)))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.k
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn edges(&self) -> &[Hyperedge] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Adjacency tensor. Undirected edges place `w/(k-1)!` at every ordering
    /// of their vertices; directed arcs at `(head, sigma(tails))`.
    pub fn adjacency_tensor(&self) -> SparseKTensor {
        let scale = factorial(self.k - 1);
        let mut entries = Vec::with_capacity(self.edges.len() * self.k);
        for e in &self.edges {
            let value = e.weight / scale;
            if self.directed {
                let mut idx = vec![e.head()];
                idx.extend_from_slice(e.tails());
                entries.push((idx, value));
            } else {
                for (pos, &head) in e.vertices.iter().enumerate() {
                    let mut idx = vec![head];
                    idx.extend(e.vertices.iter().enumerate().filter(|&(q, _)| q != pos).map(|(_, &v)| v));
                    entries.push((idx, value));
                }
            }
        }
        SparseKTensor::from_entries(self.n, self.k, Symmetry::SemiSymmetric, entries)
            .expect("validated hyperedges give distinct in-range entries")
    }

    /// `vol({i})`: the adjacency mass with `i` as first index.
    pub fn degrees(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for e in &self.edges {
            if self.directed {
                d[e.head()] += e.weight;
            } else {
                for &v in &e.vertices {
                    d[v] += e.weight;
                }
            }
        }
        d
    }

    /// Sub-hypergraph on `keep` with only the edges lying entirely inside it.
    /// Vertex `i` of the result is `keep[i]`.
    pub fn induced(&self, keep: &[usize]) -> UniformHypergraph {
        let mut local = vec![usize::MAX; self.n];
        for (i, &v) in keep.iter().enumerate() {
            local[v] = i;
        }
        let edges = self.edges.iter().filter(|e| e.vertices.iter().all(|&v| local[v] != usize::MAX)).map(|e| {
            let vertices: Vec<usize> = e.vertices.iter().map(|&v| local[v]).collect();
            (vertices, e.weight)
        });
        UniformHypergraph::new(keep.len(), self.k, self.directed, edges).expect("induced edges stay valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invariants_are_enforced() {
        assert!(UniformHypergraph::unweighted(3, 3, [[0, 1, 3]]).is_err());
        assert!(UniformHypergraph::unweighted(3, 3, [[0, 1, 1]]).is_err());
        assert!(UniformHypergraph::unweighted(4, 3, [[0, 1, 2], [2, 1, 0]]).is_err());
        assert!(UniformHypergraph::new(3, 3, false, [(vec![0, 1, 2], 0.0)]).is_err());
        assert!(UniformHypergraph::new(3, 3, false, [(vec![0, 1], 1.0)]).is_err());
        // same tail set, different head is fine for arcs
        assert!(UniformHypergraph::new(4, 3, true, [(vec![0, 1, 2], 1.0), (vec![1, 0, 3], 1.0)]).is_ok());
        assert!(UniformHypergraph::new(4, 3, true, [(vec![0, 1, 2], 1.0), (vec![1, 0, 2], 1.0)]).is_err());
    }

    #[test]
    fn single_arc_tensor() {
        // arc ((1,2),3) with weight 2, 1-based
        let h = UniformHypergraph::new(3, 3, true, [(vec![0, 1, 2], 2.0)]).unwrap();
        let full = h.adjacency_tensor().to_full_entries();
        assert_eq!(full.len(), 2);
        assert_eq!(full[&vec![2, 0, 1]], 1.0);
        assert_eq!(full[&vec![2, 1, 0]], 1.0);
    }

    #[test]
    fn empty_hypergraph_gives_zero_tensor() {
        let h = UniformHypergraph::unweighted(5, 3, Vec::<[usize; 3]>::new()).unwrap();
        assert_eq!(h.adjacency_tensor().nnz(), 0);
    }

    #[test]
    fn degrees_equal_first_index_mass() {
        let h = UniformHypergraph::new(4, 3, false, [(vec![0, 1, 2], 3.0), (vec![1, 2, 3], 1.0)]).unwrap();
        let a = h.adjacency_tensor();
        let mut mass = vec![0.0; 4];
        for (idx, v) in a.to_full_entries() {
            mass[idx[0]] += v;
        }
        assert_eq!(h.degrees(), mass);
        assert_eq!(mass, vec![3.0, 4.0, 4.0, 1.0]);
    }

    #[test]
    fn induced_keeps_interior_edges() {
        let h = UniformHypergraph::unweighted(5, 3, [[0, 1, 2], [2, 3, 4], [1, 2, 3]]).unwrap();
        let sub = h.induced(&[1, 2, 3, 4]);
        assert_eq!(sub.n(), 4);
        assert_eq!(sub.num_edges(), 2);
        assert_eq!(sub.edges()[0].vertices(), &[1, 2, 3]);
    }
}
