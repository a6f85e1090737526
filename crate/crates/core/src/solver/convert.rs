//! Maps between MPR solutions (stochastic `x`) and MLPPR solutions (`y`).

use super::mlppr::equation_residual;
use super::mpr::mpr_equation_residual;
use super::PageRankProblem;
use crate::correction::{CorrectionMode, DanglingCorrection};
use crate::error::{Error, Result};
use crate::stochastic::sum;
use crate::tensor::MultilinearOperator;

/// Largest input residual the conversions accept.
pub const CONVERSION_RESIDUAL_LIMIT: f64 = 1e-8;

/// Unscaled MLPPR residual `||(e^T y)^(k-2) y - alpha Pbar y^(k-1) - v||_inf`.
pub fn mlppr_residual(problem: &PageRankProblem, y: &[f64]) -> Result<f64> {
    let w = problem.tensor().apply(y)?;
    let k = problem.order() as i32;
    Ok(equation_residual(problem, y, &w) * crate::stochastic::norm1(y).powi(k - 1))
}

/// MPR residual `||alpha P x^(k-1) + (1-alpha) v - x||_inf` on the corrected tensor.
pub fn mpr_residual(problem: &PageRankProblem, x: &[f64]) -> Result<f64> {
    let op = DanglingCorrection::new(problem.tensor(), problem.v(), CorrectionMode::Implicit)?;
    let px = op.apply(x)?;
    Ok(mpr_equation_residual(problem, x, &px))
}

/// Rescales an MPR solution into the MLPPR solution
/// `y = (1 - alpha e^T Pbar x^(k-1))^(-1/(k-1)) x`.
pub fn mpr_to_mlppr(problem: &PageRankProblem, x: &[f64]) -> Result<Vec<f64>> {
    let residual = mpr_residual(problem, x)?;
    if !(residual <= CONVERSION_RESIDUAL_LIMIT) {
        return Err(Error::ResidualTooLarge { residual, limit: CONVERSION_RESIDUAL_LIMIT });
    }
    let k = problem.order() as f64;
    let mass = sum(&problem.tensor().apply(x)?);
    let scale = (1.0 - problem.alpha() * mass).powf(-1.0 / (k - 1.0));
    Ok(x.iter().map(|xi| xi * scale).collect())
}

/// Normalizes an MLPPR solution into the MPR solution `x = y / e^T y`.
pub fn mlppr_to_mpr(problem: &PageRankProblem, y: &[f64]) -> Result<Vec<f64>> {
    let residual = mlppr_residual(problem, y)?;
    if !(residual <= CONVERSION_RESIDUAL_LIMIT) {
        return Err(Error::ResidualTooLarge { residual, limit: CONVERSION_RESIDUAL_LIMIT });
    }
    let s = sum(y);
    Ok(y.iter().map(|yi| yi / s).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::UniformHypergraph;
    use crate::solver::{solve_mlppr, solve_mpr, SolveOptions};

    fn problem(alpha: f64) -> PageRankProblem {
        let h = UniformHypergraph::unweighted(5, 3, [[0, 1, 2], [1, 2, 3], [2, 3, 4]]).unwrap();
        PageRankProblem::from_hypergraph(&h, alpha, vec![0.2; 5]).unwrap()
    }

    #[test]
    fn refuses_non_solutions() {
        let p = problem(0.3);
        assert!(matches!(mpr_to_mlppr(&p, &[0.2; 5]), Err(Error::ResidualTooLarge { .. })));
        assert!(matches!(mlppr_to_mpr(&p, &[0.2; 5]), Err(Error::ResidualTooLarge { .. })));
    }

    #[test]
    fn zero_alpha_maps_v_to_v() {
        let p = problem(0.0);
        assert_eq!(mpr_to_mlppr(&p, &[0.2; 5]).unwrap(), vec![0.2; 5]);
        assert_eq!(mlppr_to_mpr(&p, &[0.2; 5]).unwrap(), vec![0.2; 5]);
    }

    #[test]
    fn mlppr_mass_identity() {
        // e^T y = (1 + alpha e^T Pbar y^(k-1))^(1/(k-1)) at a solution
        let p = problem(0.3);
        let opts = SolveOptions { tol_step: 1e-15, tol_eq: 1e-15, ..Default::default() };
        let y = solve_mlppr(&p, &opts).unwrap().y;
        let mass = sum(&p.tensor().apply(&y).unwrap());
        assert!((sum(&y) - (1.0 + 0.3 * mass).sqrt()).abs() < 1e-12);
        let x = solve_mpr(&p, &opts).unwrap().y;
        let y2 = mpr_to_mlppr(&p, &x).unwrap();
        assert!(crate::stochastic::dist1(&y, &y2) < 1e-10);
    }
}
