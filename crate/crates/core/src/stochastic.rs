//! Small vector helpers shared by the solvers.

use crate::error::{Error, Result};

/// Tolerance on `e^T v = 1` for stochastic vectors.
pub const STOCHASTIC_TOL: f64 = 1e-12;

pub fn check_stochastic(v: &[f64], n: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: v.len() });
    }
    if v.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::InvalidDistribution("entries must be finite and nonnegative".into()));
    }
    let s = sum(v);
    if (s - 1.0).abs() > STOCHASTIC_TOL {
        return Err(Error::InvalidDistribution(format!("entries sum to {s}, not 1")));
    }
    Ok(())
}

pub fn uniform(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}

pub fn sum(x: &[f64]) -> f64 {
    x.iter().sum()
}

pub fn norm1(x: &[f64]) -> f64 {
    x.iter().map(|v| v.abs()).sum()
}

pub fn norm_inf(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn dist1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

pub fn dist_inf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stochastic_checks() {
        assert!(check_stochastic(&[0.5, 0.5], 2).is_ok());
        assert!(check_stochastic(&[0.5, 0.6], 2).is_err());
        assert!(check_stochastic(&[1.5, -0.5], 2).is_err());
        assert!(check_stochastic(&[1.0], 2).is_err());
        assert!(check_stochastic(&[f64::NAN, 1.0], 2).is_err());
    }
}
