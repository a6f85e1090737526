//! Dangling correction `P = Pbar + v o (e^(k-1) - Pbar x_1 e)`, which turns a
//! columnwise-substochastic tensor into a columnwise-stochastic one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stochastic::{check_stochastic, sum};
use crate::tensor::{MultilinearOperator, SparseKTensor};

/// Largest indicator tensor the explicit form will allocate.
pub const EXPLICIT_MAX_COLUMNS: usize = 1 << 27;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrectionMode {
    /// Materialize the dense indicator tensor `C` and contract it each apply.
    Explicit,
    /// Use `P x^(k-1) = Pbar x^(k-1) + v ((e^T x)^(k-1) - e^T Pbar x^(k-1))`.
    Implicit,
}

pub struct DanglingCorrection<'a> {
    base: &'a SparseKTensor,
    v: &'a [f64],
    indicator: Option<Vec<f64>>,
}

impl<'a> DanglingCorrection<'a> {
    pub fn new(base: &'a SparseKTensor, v: &'a [f64], mode: CorrectionMode) -> Result<Self> {
        check_stochastic(v, base.n())?;
        if !base.is_nonnegative() {
            return Err(Error::InvalidTensor("correction needs a nonnegative tensor".into()));
        }
        let indicator = match mode {
            CorrectionMode::Implicit => None,
            CorrectionMode::Explicit => Some(indicator_tensor(base)?),
        };
        Ok(Self { base, v, indicator })
    }

    pub fn mode(&self) -> CorrectionMode {
        if self.indicator.is_some() {
            CorrectionMode::Explicit
        } else {
            CorrectionMode::Implicit
        }
    }

    /// The `(k-1)`-order indicator `C = e^(k-1) - Pbar x_1 e`, unfolded into a
    /// vector over fiber columns. `None` in implicit mode.
    pub fn indicator(&self) -> Option<&[f64]> {
        self.indicator.as_deref()
    }

    /// Multiplies one [`apply_counted`](MultilinearOperator::apply_counted)
    /// call would record, computed without building the operator.
    pub fn ops_per_apply(base: &SparseKTensor, mode: CorrectionMode) -> u128 {
        let n = base.n() as u128;
        let k = base.order() as u128;
        let core = base.nnz() as u128 * k;
        match mode {
            CorrectionMode::Implicit => core + (k - 2) + 2 * n,
            CorrectionMode::Explicit => core + base.fiber_count() * k + n,
        }
    }
}

fn indicator_tensor(base: &SparseKTensor) -> Result<Vec<f64>> {
    let columns = base
        .n()
        .checked_pow((base.order() - 1) as u32)
        .filter(|&c| c <= EXPLICIT_MAX_COLUMNS)
        .ok_or(Error::IndexOverflow { n: base.n(), k: base.order() })?;
    let mut c = vec![1.0; columns];
    let r = base.unfold()?;
    for &(_, col, v) in r.entries() {
        c[col] -= v;
    }
    Ok(c)
}

impl MultilinearOperator for DanglingCorrection<'_> {
    fn dim(&self) -> usize {
        self.base.n()
    }

    fn order(&self) -> usize {
        self.base.order()
    }

    fn apply_counted(&self, x: &[f64], ops: &mut u64) -> Result<Vec<f64>> {
        let mut y = self.base.apply_counted(x, ops)?;
        let n = self.base.n();
        let k1 = self.base.order() - 1;
        let scale = match &self.indicator {
            None => {
                *ops += (k1 - 1 + n) as u64;
                sum(x).powi(k1 as i32) - sum(&y)
            }
            Some(c) => {
                // walk every column of the unfolding with an odometer over the tail
                let mut digits = vec![0usize; k1];
                let mut acc = 0.0;
                for &cl in c {
                    let prod: f64 = digits.iter().map(|&d| x[d]).product();
                    acc += cl * prod;
                    for d in digits.iter_mut() {
                        *d += 1;
                        if *d < n {
                            break;
                        }
                        *d = 0;
                    }
                }
                *ops += (c.len() * (k1 + 1)) as u64;
                acc
            }
        };
        for (yi, vi) in y.iter_mut().zip(self.v) {
            *yi += vi * scale;
        }
        *ops += n as u64;
        Ok(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Symmetry;

    #[test]
    fn all_zero_tensor_maps_stochastic_x_to_v() {
        let p = SparseKTensor::zeros(3, 3, Symmetry::SemiSymmetric);
        let v = [0.2, 0.3, 0.5];
        let x = [0.1, 0.6, 0.3];
        for mode in [CorrectionMode::Explicit, CorrectionMode::Implicit] {
            let c = DanglingCorrection::new(&p, &v, mode).unwrap();
            let y = c.apply(&x).unwrap();
            for (a, b) in y.iter().zip(&v) {
                assert!((a - b).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn stochastic_base_gets_no_correction() {
        let p = SparseKTensor::from_entries(
            2,
            2,
            Symmetry::General,
            vec![(vec![0, 0], 0.5), (vec![1, 0], 0.5), (vec![1, 1], 1.0)],
        )
        .unwrap();
        let v = [1.0, 0.0];
        let c = DanglingCorrection::new(&p, &v, CorrectionMode::Explicit).unwrap();
        assert!(c.indicator().unwrap().iter().all(|&x| x.abs() < 1e-15));
        assert_eq!(c.apply(&[0.3, 0.7]).unwrap(), p.apply(&[0.3, 0.7]).unwrap());
    }

    #[test]
    fn rejects_non_stochastic_v() {
        let p = SparseKTensor::zeros(2, 3, Symmetry::SemiSymmetric);
        assert!(matches!(
            DanglingCorrection::new(&p, &[0.5, 0.6], CorrectionMode::Implicit),
            Err(Error::InvalidDistribution(_))
        ));
    }
}
