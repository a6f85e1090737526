use super::{contraction_constant, Model, PageRankProblem, SolveOptions, SolveReport};
use crate::correction::{CorrectionMode, DanglingCorrection};
use crate::error::{Error, Result};
use crate::stochastic::{dist_inf, norm1, sum};
use crate::tensor::MultilinearOperator;

/// `||alpha P x^(k-1) + (1-alpha) v - x||_inf` with `px = P x^(k-1)`.
pub(super) fn mpr_equation_residual(problem: &PageRankProblem, x: &[f64], px: &[f64]) -> f64 {
    let alpha = problem.alpha();
    x.iter()
        .zip(px)
        .zip(problem.v())
        .fold(0.0f64, |m, ((xi, pi), vi)| m.max((alpha * pi + (1.0 - alpha) * vi - xi).abs()))
}

/// Shifted fixed-point iteration for MPR on the dangling-corrected tensor,
/// `x <- (alpha P x^(k-1) + (1-alpha) v + shift x) / (1 + shift)`, with each
/// iterate renormalized to sum one. Starts from `v` unless `opts.start` is set.
pub fn solve_mpr(problem: &PageRankProblem, opts: &SolveOptions) -> Result<SolveReport> {
    if !(opts.shift >= 0.0) {
        return Err(Error::InvalidParameter(format!("shift={} must be nonnegative", opts.shift)));
    }
    let mode = match problem.model() {
        Model::Mpr(mode) => mode,
        Model::Mlppr => CorrectionMode::Implicit,
    };
    let op = DanglingCorrection::new(problem.tensor(), problem.v(), mode)?;
    let alpha = problem.alpha();
    let shift = opts.shift;
    let mut x = match &opts.start {
        Some(s) => {
            crate::stochastic::check_stochastic(s, problem.n())
                .map_err(|_| Error::InvalidParameter("MPR start must be stochastic".into()))?;
            s.clone()
        }
        None => problem.v().to_vec(),
    };
    let info = contraction_constant(problem.order(), alpha);
    let mut iterates = Vec::new();
    if opts.record_iterates {
        iterates.push(x.clone());
    }
    let mut ops = 0u64;
    let mut px = op.apply_counted(&x, &mut ops)?;
    let mut eq = mpr_equation_residual(problem, &x, &px);
    let mut step = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        let mut next: Vec<f64> = px
            .iter()
            .zip(problem.v())
            .zip(&x)
            .map(|((pi, vi), xi)| (alpha * pi + (1.0 - alpha) * vi + shift * xi) / (1.0 + shift))
            .collect();
        let s = sum(&next);
        next.iter_mut().for_each(|xi| *xi /= s);
        step = dist_inf(&next, &x) / norm1(&next);
        x = next;
        iterations += 1;
        if opts.record_iterates {
            iterates.push(x.clone());
        }
        px = op.apply_counted(&x, &mut ops)?;
        eq = mpr_equation_residual(problem, &x, &px);
        if step <= opts.tol_step || eq <= opts.tol_eq {
            converged = true;
            break;
        }
    }
    Ok(SolveReport {
        y: x,
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
