//! Fixed-point solvers for multi-linear pseudo-PageRank (MLPPR) and
//! multi-linear PageRank (MPR).
//!
//! MLPPR finds `y >= 0` with `(e^T y)^(k-2) y - alpha Pbar y^(k-1) = v` for a
//! columnwise-substochastic `Pbar`. The tensor splitting iteration solves the
//! diagonal part exactly each step, which gives the closed-form update
//! `y <- (e^T z)^(-(k-2)/(k-1)) z` with `z = alpha Pbar y^(k-1) + v`.

mod convert;
mod mlppr;
mod mpr;

pub use convert::{mlppr_residual, mlppr_to_mpr, mpr_residual, mpr_to_mlppr, CONVERSION_RESIDUAL_LIMIT};
pub use mlppr::{phi_step, solve_mlppr};
pub use mpr::solve_mpr;

use serde::Serialize;

use crate::correction::CorrectionMode;
use crate::error::{Error, Result};
use crate::hypergraph::UniformHypergraph;
use crate::stochastic::check_stochastic;
use crate::tensor::{normalize_substochastic, SparseKTensor};

/// Slack allowed on fiber sums when checking substochasticity.
const SUBSTOCHASTIC_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Model {
    Mlppr,
    Mpr(CorrectionMode),
}

#[derive(Clone, Debug)]
pub struct PageRankProblem {
    tensor: SparseKTensor,
    alpha: f64,
    v: Vec<f64>,
    model: Model,
}

impl PageRankProblem {
    /// `tensor` is the columnwise-substochastic `Pbar`; MPR models apply the
    /// dangling correction on top of it.
    pub fn new(tensor: SparseKTensor, alpha: f64, v: Vec<f64>, model: Model) -> Result<Self> {
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::InvalidParameter(format!("alpha={alpha} must lie in [0, 1)")));
        }
        check_stochastic(&v, tensor.n())?;
        if !tensor.is_nonnegative() {
            return Err(Error::InvalidTensor("tensor has negative entries".into()));
        }
        if let Some((tail, s, _)) = tensor.fiber_sums().into_iter().find(|(_, s, _)| *s > 1.0 + SUBSTOCHASTIC_TOL) {
            return Err(Error::InvalidTensor(format!("fiber {tail:?} sums to {s} > 1")));
        }
        Ok(Self { tensor, alpha, v, model })
    }

    /// Normalizes the hypergraph's adjacency tensor and sets up an MLPPR problem.
    pub fn from_hypergraph(h: &UniformHypergraph, alpha: f64, v: Vec<f64>) -> Result<Self> {
        let (pbar, _) = normalize_substochastic(&h.adjacency_tensor())?;
        Self::new(pbar, alpha, v, Model::Mlppr)
    }

    pub fn with_model(mut self, model: Model) -> Self {
        self.model = model;
        self
    }

    pub fn tensor(&self) -> &SparseKTensor {
        &self.tensor
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn n(&self) -> usize {
        self.tensor.n()
    }

    pub fn order(&self) -> usize {
        self.tensor.order()
    }

    /// `(1 - alpha)^(-1/(k-1))`, the bound on `e^T y` over the feasible set.
    pub fn feasible_radius(&self) -> f64 {
        (1.0 - self.alpha).powf(-1.0 / (self.order() - 1) as f64)
    }

    /// Whether `y` lies in `{y >= 0 : e^T y <= (1-alpha)^(-1/(k-1))}` up to `slack`.
    pub fn in_feasible_set(&self, y: &[f64], slack: f64) -> bool {
        y.len() == self.n()
            && y.iter().all(|&x| x >= 0.0 && x.is_finite())
            && y.iter().sum::<f64>() <= self.feasible_radius() + slack
    }
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub tol_step: f64,
    pub tol_eq: f64,
    pub max_iter: usize,
    /// Starting point; `v` when absent.
    pub start: Option<Vec<f64>>,
    /// MPR shift `gamma` in `x <- (alpha P x^(k-1) + (1-alpha) v + gamma x)/(1+gamma)`.
    pub shift: f64,
    pub threads: usize,
    /// Keep every iterate in the report.
    pub record_iterates: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol_step: 1e-8,
            tol_eq: 1e-10,
            max_iter: 100_000,
            start: None,
            shift: 0.0,
            threads: 1,
            record_iterates: false,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveReport {
    pub y: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// `||y_c - y_{c-1}||_inf / ||y_c||_1`
    pub residual_step: f64,
    /// Equation residual scaled as in the stopping rule of the solved model.
    pub residual_eq: f64,
    pub varsigma: f64,
    pub unique_by_contraction: bool,
    pub unique_by_damping: bool,
    /// Multiplies spent in tensor contractions per iteration.
    pub ops_per_iteration: u64,
    #[serde(skip)]
    pub iterates: Vec<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ContractionInfo {
    pub varsigma: f64,
    /// `varsigma < 1`: the fixed-point map contracts in the 1-norm.
    pub unique_by_contraction: bool,
    /// `alpha < 1/(k-1)`: uniqueness through the MPR equivalence.
    pub unique_by_damping: bool,
}

/// `varsigma = (2k-3) alpha (1-alpha)^(-(k-2)/(k-1))`.
pub fn contraction_constant(k: usize, alpha: f64) -> ContractionInfo {
    let k_f = k as f64;
    let varsigma = (2.0 * k_f - 3.0) * alpha * (1.0 - alpha).powf(-(k_f - 2.0) / (k_f - 1.0));
    ContractionInfo { varsigma, unique_by_contraction: varsigma < 1.0, unique_by_damping: alpha < 1.0 / (k_f - 1.0) }
}

/// Dispatches on the problem's model.
pub fn solve(problem: &PageRankProblem, opts: &SolveOptions) -> Result<SolveReport> {
    match problem.model() {
        Model::Mlppr => solve_mlppr(problem, opts),
        Model::Mpr(_) => solve_mpr(problem, opts),
    }
}
