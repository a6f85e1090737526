//! The latent directed graph and the symmetrized chain built on it.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::tensor::CooMatrix;

/// Stationary-distribution acceptance threshold on `||M pi - pi||_1`.
pub const STATIONARY_TOL: f64 = 1e-10;

/// Up to this many vertices the second eigenvector comes from a dense
/// symmetric eigendecomposition.
pub const DENSE_EIGEN_LIMIT: usize = 400;

/// Nonnegative weighted adjacency `A = S + u c^T`, where column `j` holds the
/// out-weights of vertex `j`.
#[derive(Clone, Debug)]
pub struct LatentGraph {
    pub sparse: CooMatrix,
    pub rank_one: Option<(Vec<f64>, Vec<f64>)>,
}

impl LatentGraph {
    pub fn n(&self) -> usize {
        self.sparse.nrows()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut d = self.sparse.col_sums();
        if let Some((u, c)) = &self.rank_one {
            let us: f64 = u.iter().sum();
            d.iter_mut().zip(c).for_each(|(dj, cj)| *dj += us * cj);
        }
        d
    }

    fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.sparse.matvec(x);
        if let Some((u, c)) = &self.rank_one {
            let s: f64 = c.iter().zip(x).map(|(a, b)| a * b).sum();
            y.iter_mut().zip(u).for_each(|(yi, ui)| *yi += ui * s);
        }
        y
    }

    fn tmatvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.sparse.tmatvec(x);
        if let Some((u, c)) = &self.rank_one {
            let s: f64 = u.iter().zip(x).map(|(a, b)| a * b).sum();
            y.iter_mut().zip(c).for_each(|(yi, ci)| *yi += ci * s);
        }
        y
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut a = self.sparse.to_dense();
        if let Some((u, c)) = &self.rank_one {
            for (i, row) in a.iter_mut().enumerate() {
                for (j, aij) in row.iter_mut().enumerate() {
                    *aij += u[i] * c[j];
                }
            }
        }
        a
    }
}

/// Column-stochastic `M = damping A D^+ + (1 - damping) e e^T / n`, with zero
/// columns of `A` replaced by `e/n`.
#[derive(Clone, Debug)]
pub struct TeleportedChain {
    graph: LatentGraph,
    inv_deg: Vec<f64>,
    damping: f64,
}

impl TeleportedChain {
    pub fn new(graph: LatentGraph, damping: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&damping) {
            return Err(Error::InvalidParameter(format!("damping={damping} outside [0, 1]")));
        }
        let d = graph.col_sums();
        if d.iter().any(|&x| x < 0.0 || !x.is_finite()) {
            return Err(Error::InvalidParameter("latent graph has negative or non-finite degree".into()));
        }
        let inv_deg = d.iter().map(|&x| if x > 0.0 { 1.0 / x } else { 0.0 }).collect();
        Ok(Self { graph, inv_deg, damping })
    }

    pub fn n(&self) -> usize {
        self.inv_deg.len()
    }

    pub fn graph(&self) -> &LatentGraph {
        &self.graph
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n() as f64;
        let z: Vec<f64> = x.iter().zip(&self.inv_deg).map(|(a, b)| a * b).collect();
        let dangling: f64 = x.iter().zip(&self.inv_deg).filter(|(_, &b)| b == 0.0).map(|(a, _)| a).sum();
        let total: f64 = x.iter().sum();
        let mut y = self.graph.matvec(&z);
        let flat = self.damping * dangling / n + (1.0 - self.damping) * total / n;
        y.iter_mut().for_each(|yi| *yi = self.damping * *yi + flat);
        y
    }

    pub fn apply_transpose(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n() as f64;
        let mean = x.iter().sum::<f64>() / n;
        let at = self.graph.tmatvec(x);
        at.iter()
            .zip(&self.inv_deg)
            .map(|(a, &inv)| {
                let p = if inv > 0.0 { a * inv } else { mean };
                self.damping * p + (1.0 - self.damping) * mean
            })
            .collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.n();
        let a = self.graph.to_dense();
        DMatrix::from_fn(n, n, |i, j| {
            let p = if self.inv_deg[j] > 0.0 { a[i][j] * self.inv_deg[j] } else { 1.0 / n as f64 };
            self.damping * p + (1.0 - self.damping) / n as f64
        })
    }

    /// Power iteration from `e/n`. Errors if `||M pi - pi||_1` stays above
    /// [`STATIONARY_TOL`] or some entry of `pi` is not positive.
    pub fn stationary(&self, max_iter: usize) -> Result<(Vec<f64>, f64)> {
        let n = self.n();
        let mut pi = vec![1.0 / n as f64; n];
        for _ in 0..max_iter {
            let mut next = self.apply(&pi);
            let s: f64 = next.iter().sum();
            next.iter_mut().for_each(|p| *p /= s);
            let residual: f64 = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
            pi = next;
            if residual <= 1e-13 {
                break;
            }
        }
        let check: f64 = self.apply(&pi).iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
        if !(check <= STATIONARY_TOL) {
            return Err(Error::NotConverged { iterations: max_iter, residual: check });
        }
        if pi.iter().any(|&p| !(p > 0.0)) {
            return Err(Error::Degenerate("stationary distribution has a zero entry".into()));
        }
        Ok((pi, check))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EigenMethod {
    /// Dense up to [`DENSE_EIGEN_LIMIT`] vertices, power iteration beyond.
    Auto,
    Dense,
    Power,
}

#[derive(Clone, Debug)]
pub struct SecondEigen {
    /// Left eigenvector of the symmetrized chain, unit 2-norm, sign fixed so
    /// its largest-magnitude entry (lowest index on ties) is positive.
    pub x: Vec<f64>,
    pub lambda: f64,
    /// `||P_sym^T x - lambda x||_2`.
    pub residual: f64,
    pub iterations: usize,
}

/// `y = P_sym^T x = (Pi^-1 M Pi x + M^T x) / 2`.
pub fn sym_transpose_apply(chain: &TeleportedChain, pi: &[f64], x: &[f64]) -> Vec<f64> {
    let px: Vec<f64> = pi.iter().zip(x).map(|(p, xi)| p * xi).collect();
    let a = chain.apply(&px);
    let b = chain.apply_transpose(x);
    a.iter().zip(&b).zip(pi).map(|((ai, bi), p)| 0.5 * (ai / p + bi)).collect()
}

/// Second largest eigenpair of `P_sym^T`, found on the symmetric similar
/// matrix `Pi^(-1/2) A_sym Pi^(-1/2)` whose top eigenvector is `sqrt(pi)`.
pub fn second_eigenvector(
    chain: &TeleportedChain,
    pi: &[f64],
    method: EigenMethod,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<SecondEigen> {
    let n = chain.n();
    if n < 2 {
        return Err(Error::Degenerate("need at least two vertices".into()));
    }
    let sqrt_pi: Vec<f64> = pi.iter().map(|p| p.sqrt()).collect();
    let dense = match method {
        EigenMethod::Auto => n <= DENSE_EIGEN_LIMIT,
        EigenMethod::Dense => true,
        EigenMethod::Power => false,
    };
    let (u, iterations) = if dense {
        (dense_second(chain, &sqrt_pi), 0)
    } else {
        power_second(chain, pi, &sqrt_pi, tol, max_iter, seed)?
    };
    let mut x: Vec<f64> = u.iter().zip(&sqrt_pi).map(|(ui, s)| ui / s).collect();
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    x.iter_mut().for_each(|v| *v /= norm);
    let lead = (0..n).fold(0, |best, i| if x[i].abs() > x[best].abs() { i } else { best });
    if x[lead] < 0.0 {
        x.iter_mut().for_each(|v| *v = -*v);
    }
    let y = sym_transpose_apply(chain, pi, &x);
    let lambda: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
    let residual = y.iter().zip(&x).map(|(yi, xi)| (yi - lambda * xi).powi(2)).sum::<f64>().sqrt();
    Ok(SecondEigen { x, lambda, residual, iterations })
}

fn dense_second(chain: &TeleportedChain, sqrt_pi: &[f64]) -> Vec<f64> {
    let n = chain.n();
    let m = chain.to_dense();
    // Pi^(-1/2) (Pi M^T + M Pi) Pi^(-1/2) / 2
    let l = DMatrix::from_fn(n, n, |i, j| {
        0.5 * (sqrt_pi[i] * m[(j, i)] / sqrt_pi[j] + m[(i, j)] * sqrt_pi[j] / sqrt_pi[i])
    });
    let eig = SymmetricEigen::new(l);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    // the top pair is (1, sqrt(pi)); project it out of the runner-up
    let mut u: Vec<f64> = eig.eigenvectors.column(idx[1]).iter().copied().collect();
    let dot: f64 = u.iter().zip(sqrt_pi).map(|(a, b)| a * b).sum();
    u.iter_mut().zip(sqrt_pi).for_each(|(ui, s)| *ui -= dot * s);
    u
}

fn power_second(
    chain: &TeleportedChain,
    pi: &[f64],
    sqrt_pi: &[f64],
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<(Vec<f64>, usize)> {
    let n = chain.n();
    let deflate = |u: &mut Vec<f64>| {
        let dot: f64 = u.iter().zip(sqrt_pi).map(|(a, b)| a * b).sum();
        u.iter_mut().zip(sqrt_pi).for_each(|(ui, s)| *ui -= dot * s);
        let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        u.iter_mut().for_each(|v| *v /= norm);
    };
    // (L + I)/2 u, with L u = Pi^(1/2) P_sym^T Pi^(-1/2) u
    let shifted = |u: &[f64]| -> Vec<f64> {
        let x: Vec<f64> = u.iter().zip(sqrt_pi).map(|(a, s)| a / s).collect();
        let y = sym_transpose_apply(chain, pi, &x);
        y.iter().zip(sqrt_pi).zip(u).map(|((yi, s), ui)| 0.5 * (yi * s + ui)).collect()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    deflate(&mut u);
    for it in 1..=max_iter {
        let mut next = shifted(&u);
        deflate(&mut next);
        let diff = next.iter().zip(&u).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        u = next;
        if diff <= tol {
            return Ok((u, it));
        }
    }
    Err(Error::NotConverged { iterations: max_iter, residual: f64::NAN })
}
