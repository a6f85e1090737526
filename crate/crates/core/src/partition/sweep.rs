use serde::Serialize;

use crate::error::{Error, Result};
use crate::hypergraph::UniformHypergraph;

/// Prefix cuts along a vertex ordering.
#[derive(Clone, Debug, Serialize)]
pub struct SweepCut {
    pub order: Vec<usize>,
    /// `h[i-1]` is the normalized cut of the first `i` vertices, `i = 1..n-1`;
    /// `+inf` where either side has zero volume.
    pub h: Vec<f64>,
    /// Size of the selected prefix.
    pub i_star: usize,
    /// The selected prefix, sorted.
    pub s: Vec<usize>,
}

impl SweepCut {
    pub fn h_min(&self) -> f64 {
        self.h[self.i_star - 1]
    }

    /// Complement of `s`, sorted.
    pub fn s_bar(&self) -> Vec<usize> {
        let mut rest = self.order[self.i_star..].to_vec();
        rest.sort_unstable();
        rest
    }
}

/// Adjacency mass of one edge: `k w` over the `k!` entries of an undirected
/// edge, `w` over the `(k-1)!` entries of a directed one.
fn edge_mass(h: &UniformHypergraph, w: f64) -> f64 {
    if h.is_directed() {
        w
    } else {
        h.order() as f64 * w
    }
}

/// `cut(S) (1/vol(S) + 1/vol(V\S))`, where `vol` sums adjacency entries whose
/// first index is in the set and `cut` is the mass of entries spanning both.
pub fn normalized_cut(h: &UniformHypergraph, in_s: &[bool]) -> f64 {
    let deg = h.degrees();
    let vol_s: f64 = (0..h.n()).filter(|&i| in_s[i]).map(|i| deg[i]).sum();
    let vol_all: f64 = deg.iter().sum();
    let cut: f64 = h
        .edges()
        .iter()
        .filter(|e| {
            let inside = e.vertices().iter().filter(|&&v| in_s[v]).count();
            inside > 0 && inside < e.vertices().len()
        })
        .map(|e| edge_mass(h, e.weight()))
        .sum();
    ratio(cut, vol_s, vol_all - vol_s)
}

fn ratio(cut: f64, vol_s: f64, vol_rest: f64) -> f64 {
    if vol_s <= 0.0 || vol_rest <= 0.0 {
        f64::INFINITY
    } else {
        cut * (1.0 / vol_s + 1.0 / vol_rest)
    }
}

/// Evaluates every prefix of `order` in `O(k m + n)` total and picks the
/// smallest minimizer.
pub fn sweep_cut(h: &UniformHypergraph, order: &[usize]) -> Result<SweepCut> {
    let n = h.n();
    if n < 2 {
        return Err(Error::Degenerate(format!("cannot split {n} vertices")));
    }
    if order.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: order.len() });
    }
    let mut seen = vec![false; n];
    for &v in order {
        if v >= n || std::mem::replace(&mut seen[v], true) {
            return Err(Error::InvalidParameter("order is not a permutation".into()));
        }
    }
    let deg = h.degrees();
    let vol_all: f64 = deg.iter().sum();
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (e, edge) in h.edges().iter().enumerate() {
        for &v in edge.vertices() {
            incident[v].push(e);
        }
    }
    let k = h.order();
    let mut inside = vec![0usize; h.num_edges()];
    let mut cut = 0.0;
    let mut vol_s = 0.0;
    let mut values = Vec::with_capacity(n - 1);
    for &v in &order[..n - 1] {
        vol_s += deg[v];
        for &e in &incident[v] {
            let mass = edge_mass(h, h.edges()[e].weight());
            inside[e] += 1;
            if inside[e] == 1 {
                cut += mass;
            }
            if inside[e] == k {
                cut -= mass;
            }
        }
        values.push(ratio(cut.max(0.0), vol_s, vol_all - vol_s));
    }
    let mut i_star = 1;
    for (i, &val) in values.iter().enumerate() {
        if val < values[i_star - 1] {
            i_star = i + 1;
        }
    }
    let mut s = order[..i_star].to_vec();
    s.sort_unstable();
    Ok(SweepCut { order: order.to_vec(), h: values, i_star, s })
}
