//! Small reference hypergraphs.

use crate::hypergraph::UniformHypergraph;

/// The 9-vertex toy hypergraph: two complete 3-uniform hypergraphs on
/// `{1,2,3,4}` and `{6,7,8,9}` bridged by `{4,5,6}` (1-based labels).
pub fn toy_hypergraph() -> UniformHypergraph {
    let edges = [[1, 2, 3], [1, 2, 4], [1, 3, 4], [2, 3, 4], [4, 5, 6], [6, 7, 8], [6, 7, 9], [6, 8, 9], [7, 8, 9]];
    UniformHypergraph::unweighted(9, 3, edges.iter().map(|e| e.map(|v| v - 1))).unwrap()
}

/// Teleportation vector `(1/2, 1/2, 0, ..., 0)` used with the toy hypergraph.
pub fn toy_v() -> Vec<f64> {
    let mut v = vec![0.0; 9];
    v[0] = 0.5;
    v[1] = 0.5;
    v
}

pub const TOY_ALPHA: f64 = 0.2;

/// All `C(m,3)` triples of `vertices`.
pub fn complete_triples(vertices: &[usize]) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for a in 0..vertices.len() {
        for b in a + 1..vertices.len() {
            for c in b + 1..vertices.len() {
                out.push([vertices[a], vertices[b], vertices[c]]);
            }
        }
    }
    out
}

/// Complete 3-uniform blocks of the given sizes on consecutive vertices, plus
/// one bridge edge between each pair of consecutive blocks. A bridge takes the
/// last vertex of block `i` and the first two of block `i+1`.
pub fn planted_cliques(sizes: &[usize]) -> (UniformHypergraph, Vec<Vec<usize>>) {
    let mut blocks = Vec::new();
    let mut start = 0;
    for &s in sizes {
        blocks.push((start..start + s).collect::<Vec<_>>());
        start += s;
    }
    let mut edges: Vec<[usize; 3]> = blocks.iter().flat_map(|b| complete_triples(b)).collect();
    for w in blocks.windows(2) {
        edges.push([*w[0].last().unwrap(), w[1][0], w[1][1]]);
    }
    (UniformHypergraph::unweighted(start, 3, edges).unwrap(), blocks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planted_sizes() {
        let (h, blocks) = planted_cliques(&[5, 5]);
        assert_eq!(h.n(), 10);
        assert_eq!(h.num_edges(), 21);
        assert_eq!(blocks[1], vec![5, 6, 7, 8, 9]);
        assert_eq!(toy_hypergraph().num_edges(), 9);
    }
}
