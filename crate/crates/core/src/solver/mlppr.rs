use super::{contraction_constant, PageRankProblem, SolveOptions, SolveReport};
use crate::error::{Error, Result};
use crate::stochastic::{dist_inf, norm1, norm_inf, sum};
use crate::tensor::MultilinearOperator;

/// Slack on the feasible-set radius when accepting a starting point.
const START_SLACK: f64 = 1e-9;

/// `z = alpha w + v` scaled by `(e^T z)^(-(k-2)/(k-1))`, where `w = Pbar y^(k-1)`.
fn split_update(problem: &PageRankProblem, w: &[f64]) -> Vec<f64> {
    let k = problem.order() as f64;
    let alpha = problem.alpha();
    let z: Vec<f64> = w.iter().zip(problem.v()).map(|(wi, vi)| alpha * wi + vi).collect();
    let scale = sum(&z).powf(-(k - 2.0) / (k - 1.0));
    z.into_iter().map(|zi| zi * scale).collect()
}

/// `||(e^T y)^(k-2) y - alpha w - v||_inf / ||y||_1^(k-1)` with `w = Pbar y^(k-1)`.
pub(super) fn equation_residual(problem: &PageRankProblem, y: &[f64], w: &[f64]) -> f64 {
    let k = problem.order() as i32;
    let lead = sum(y).powi(k - 2);
    let alpha = problem.alpha();
    let r =
        y.iter().zip(w).zip(problem.v()).fold(0.0f64, |m, ((yi, wi), vi)| m.max((lead * yi - alpha * wi - vi).abs()));
    r / norm1(y).powi(k - 1)
}

/// One tensor splitting step, the map
/// `Phi(y) = (1 + alpha e^T Pbar y^(k-1))^(-(k-2)/(k-1)) (v + alpha Pbar y^(k-1))`.
pub fn phi_step(problem: &PageRankProblem, y: &[f64]) -> Result<Vec<f64>> {
    let w = problem.tensor().apply(y)?;
    Ok(split_update(problem, &w))
}

/// Iterates [`phi_step`] from `opts.start` (default `v`) until the relative
/// step or the scaled equation residual drops under its tolerance.
/// Running out of iterations is reported through `converged = false`.
pub fn solve_mlppr(problem: &PageRankProblem, opts: &SolveOptions) -> Result<SolveReport> {
    let tensor = problem.tensor();
    let mut y = match &opts.start {
        Some(s) => {
            if !problem.in_feasible_set(s, START_SLACK) {
                return Err(Error::InvalidParameter("starting point outside the feasible set".into()));
            }
            s.clone()
        }
        None => problem.v().to_vec(),
    };
    let info = contraction_constant(problem.order(), problem.alpha());
    let mut iterates = Vec::new();
    if opts.record_iterates {
        iterates.push(y.clone());
    }
    let mut ops = 0u64;
    let apply = |x: &[f64], ops: &mut u64| -> Result<Vec<f64>> {
        if opts.threads > 1 {
            *ops += (tensor.nnz() * tensor.order()) as u64;
            tensor.apply_threaded(x, opts.threads)
        } else {
            tensor.apply_counted(x, ops)
        }
    };
    let mut w = apply(&y, &mut ops)?;
    let mut step = f64::INFINITY;
    let mut eq = equation_residual(problem, &y, &w);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        let next = split_update(problem, &w);
        step = dist_inf(&next, &y) / norm1(&next);
        y = next;
        iterations += 1;
        if opts.record_iterates {
            iterates.push(y.clone());
        }
        w = apply(&y, &mut ops)?;
        eq = equation_residual(problem, &y, &w);
        if step <= opts.tol_step || eq <= opts.tol_eq {
            converged = true;
            break;
        }
    }
    debug_assert!(norm_inf(&y).is_finite());
    Ok(SolveReport {
        y,
        iterations,
        converged,
        residual_step: step,
        residual_eq: eq,
        varsigma: info.varsigma,
        unique_by_contraction: info.unique_by_contraction,
        unique_by_damping: info.unique_by_damping,
        ops_per_iteration: ops / (iterations as u64 + 1),
        iterates,
    })
}
