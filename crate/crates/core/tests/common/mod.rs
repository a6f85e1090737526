#![allow(dead_code)]

use std::collections::BTreeSet;

use hyperrank::{SparseKTensor, Symmetry, UniformHypergraph};
use rand::seq::index::sample;
use rand::Rng;

/// Random stochastic vector with some exact zeros.
pub fn random_stochastic<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| if rng.random_bool(0.3) { 0.0 } else { rng.random::<f64>() }).collect();
    if v.iter().all(|&x| x == 0.0) {
        v[rng.random_range(0..n)] = 1.0;
    }
    let s: f64 = v.iter().sum();
    v.iter().map(|x| x / s).collect()
}

/// Random undirected k-uniform hypergraph with `m` distinct weighted edges.
pub fn random_hypergraph<R: Rng>(rng: &mut R, n: usize, k: usize, m: usize) -> UniformHypergraph {
    let mut seen = BTreeSet::new();
    let mut edges = Vec::new();
    for _ in 0..m {
        let mut e: Vec<usize> = sample(rng, n, k).into_vec();
        e.sort_unstable();
        if seen.insert(e.clone()) {
            edges.push((e, rng.random_range(0.5..2.0)));
        }
    }
    UniformHypergraph::new(n, k, false, edges).unwrap()
}

/// Random directed graph (k = 2 arcs `(tail, head)`) with weights.
pub fn random_digraph<R: Rng>(rng: &mut R, n: usize, p: f64) -> Vec<(usize, usize, f64)> {
    let mut arcs = Vec::new();
    for t in 0..n {
        for h in 0..n {
            if t != h && rng.random_bool(p) {
                arcs.push((t, h, rng.random_range(0.1..3.0)));
            }
        }
    }
    arcs
}

/// Random sparse tensor; semi-symmetric input lists sorted tails only.
pub fn random_tensor<R: Rng>(rng: &mut R, n: usize, k: usize, symmetry: Symmetry, density: f64) -> SparseKTensor {
    let mut entries = Vec::new();
    let total = n.pow(k as u32);
    for lin in 0..total {
        let mut idx = Vec::with_capacity(k);
        let mut r = lin;
        for _ in 0..k {
            idx.push(r % n);
            r /= n;
        }
        idx.reverse();
        if symmetry == Symmetry::SemiSymmetric && idx[1..].windows(2).any(|w| w[0] > w[1]) {
            continue;
        }
        if rng.random_bool(density) {
            entries.push((idx, rng.random_range(-1.0..1.0)));
        }
    }
    SparseKTensor::from_entries(n, k, symmetry, entries).unwrap()
}

/// `y[i] = sum over all index tuples of p[i, j2..jk] x[j2]...x[jk]` straight
/// from the full entry list.
pub fn dense_apply(t: &SparseKTensor, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; t.n()];
    for (idx, v) in t.to_full_entries() {
        y[idx[0]] += v * idx[1..].iter().map(|&j| x[j]).product::<f64>();
    }
    y
}

pub fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

pub fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| f64::max(m, (x - y).abs()))
}
