//! Contraction kernels. None of these materialize `x^(k-1)` as a Kronecker
//! power; each stored entry is visited once and scaled by the number of
//! tail permutations it represents.

use super::{distinct_permutations, CooMatrix, FiberIndex, SparseKTensor, Symmetry};
use crate::error::{Error, Result};

/// Rows are summed with Neumaier compensation above this dimension.
pub const COMPENSATED_SUM_THRESHOLD: usize = 10_000;

/// Anything that can evaluate `P x^(k-1)`.
pub trait MultilinearOperator {
    fn dim(&self) -> usize;
    fn order(&self) -> usize;

    /// Evaluates `P x^(k-1)`, adding the multiply count to `ops`.
    fn apply_counted(&self, x: &[f64], ops: &mut u64) -> Result<Vec<f64>>;

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut ops = 0;
        self.apply_counted(x, &mut ops)
    }
}

#[derive(Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    #[inline]
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

impl SparseKTensor {
    fn check_len(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: x.len() });
        }
        Ok(())
    }

    #[inline]
    fn entry_term(&self, e: usize, x: &[f64]) -> f64 {
        let w = self.order - 1;
        let prod: f64 = self.tails[e * w..(e + 1) * w].iter().map(|&t| x[t as usize]).product();
        self.values[e] * self.mult[e] * prod
    }

    fn fill_rows(&self, rows: std::ops::Range<usize>, x: &[f64], out: &mut [f64]) {
        let compensated = self.n > COMPENSATED_SUM_THRESHOLD;
        for (slot, row) in out.iter_mut().zip(rows) {
            let range = self.row_range(row);
            *slot = if compensated {
                let mut acc = Neumaier::default();
                for e in range {
                    acc.add(self.entry_term(e, x));
                }
                acc.total()
            } else {
                range.map(|e| self.entry_term(e, x)).sum()
            };
        }
    }

    /// `P x^(k-1)` split over `threads` contiguous row blocks. Each row is
    /// summed in storage order, so the result does not depend on `threads`.
    pub fn apply_threaded(&self, x: &[f64], threads: usize) -> Result<Vec<f64>> {
        self.check_len(x)?;
        let mut y = vec![0.0; self.n];
        let threads = threads.max(1).min(self.n.max(1));
        if threads == 1 || self.nnz() < 4096 {
            self.fill_rows(0..self.n, x, &mut y);
            return Ok(y);
        }
        // balance by stored entries
        let target = self.nnz().div_ceil(threads);
        let mut bounds = vec![0usize];
        for row in 0..self.n {
            if self.row_ptr[row + 1] - self.row_ptr[*bounds.last().unwrap()] >= target {
                bounds.push(row + 1);
            }
        }
        if *bounds.last().unwrap() != self.n {
            bounds.push(self.n);
        }
        std::thread::scope(|s| {
            let mut rest: &mut [f64] = &mut y;
            for w in bounds.windows(2) {
                let (chunk, tail) = rest.split_at_mut(w[1] - w[0]);
                rest = tail;
                let rows = w[0]..w[1];
                s.spawn(move || self.fill_rows(rows, x, chunk));
            }
        });
        Ok(y)
    }

    /// The matrix `P x^(k-2)` with `M[i1][i2] = sum p[i1,i2,i3..ik] x[i3]...x[ik]`.
    /// For `k = 3` this is the mode-3 product `P x_3 x`.
    pub fn contract_to_matrix(&self, x: &[f64]) -> Result<CooMatrix> {
        self.check_len(x)?;
        if self.order < 3 {
            return Err(Error::UnsupportedOrder { order: self.order, reason: "contraction to a matrix needs k >= 3" });
        }
        let mut out = Vec::with_capacity(self.nnz() * 2);
        for e in self.entries() {
            match self.symmetry {
                Symmetry::General => {
                    let prod: f64 = e.tail[1..].iter().map(|&t| x[t as usize]).product();
                    out.push((e.row, e.tail[0] as usize, e.value * prod));
                }
                Symmetry::SemiSymmetric => {
                    // each distinct index may lead; the rest permute freely
                    let mut rest = Vec::with_capacity(e.tail.len() - 1);
                    for (pos, &lead) in e.tail.iter().enumerate() {
                        if pos > 0 && e.tail[pos - 1] == lead {
                            continue;
                        }
                        rest.clear();
                        rest.extend(e.tail.iter().enumerate().filter(|&(q, _)| q != pos).map(|(_, &t)| t));
                        let prod: f64 = rest.iter().map(|&t| x[t as usize]).product();
                        out.push((e.row, lead as usize, e.value * distinct_permutations(&rest) * prod));
                    }
                }
            }
        }
        CooMatrix::new(self.n, self.n, out)
    }

    /// Mode-1 unfolding `R(P)`, an `n x n^(k-1)` matrix.
    pub fn unfold(&self) -> Result<CooMatrix> {
        let ncols =
            self.n.checked_pow((self.order - 1) as u32).ok_or(Error::IndexOverflow { n: self.n, k: self.order })?;
        let mut out = Vec::new();
        let mut failed = None;
        for e in self.entries() {
            self.for_each_tail_permutation(e.tail, |tail| {
                let fiber = FiberIndex::new(tail.iter().map(|&t| t as usize).collect());
                match fiber.column(self.n) {
                    Ok(col) => out.push((e.row, col, e.value)),
                    Err(err) => failed = Some(err),
                }
            });
        }
        if let Some(err) = failed {
            return Err(err);
        }
        CooMatrix::new(self.n, ncols, out)
    }

    /// Inverse of [`unfold`](Self::unfold); the result uses general storage.
    pub fn from_unfolding(n: usize, order: usize, r: &CooMatrix) -> Result<Self> {
        let ncols = n.checked_pow((order - 1) as u32).ok_or(Error::IndexOverflow { n, k: order })?;
        if r.nrows() != n || r.ncols() != ncols {
            return Err(Error::DimensionMismatch { expected: ncols, got: r.ncols() });
        }
        let entries = r.entries().iter().map(|&(row, col, v)| {
            let mut idx = vec![row];
            idx.extend(FiberIndex::from_column(n, order, col).tail());
            (idx, v)
        });
        Self::from_entries(n, order, Symmetry::General, entries)
    }
}

impl MultilinearOperator for SparseKTensor {
    fn dim(&self) -> usize {
        self.n
    }

    fn order(&self) -> usize {
        self.order
    }

    fn apply_counted(&self, x: &[f64], ops: &mut u64) -> Result<Vec<f64>> {
        let y = self.apply_threaded(x, 1)?;
        *ops += (self.nnz() * self.order) as u64;
        Ok(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example_tensor() -> SparseKTensor {
        // edges {0,1,2} and {1,2,3}, unit weights, k = 3
        let mut entries = Vec::new();
        for edge in [[0usize, 1, 2], [1, 2, 3]] {
            for &head in &edge {
                let tail: Vec<usize> = edge.iter().copied().filter(|&v| v != head).collect();
                entries.push((vec![head, tail[0], tail[1]], 0.5));
            }
        }
        SparseKTensor::from_entries(4, 3, Symmetry::SemiSymmetric, entries).unwrap()
    }

    #[test]
    fn order_two_apply_is_matvec() {
        let t = SparseKTensor::from_entries(
            3,
            2,
            Symmetry::General,
            vec![(vec![0, 1], 2.0), (vec![2, 0], 3.0), (vec![1, 1], -1.0)],
        )
        .unwrap();
        assert_eq!(t.apply(&[1.0, 2.0, 3.0]).unwrap(), vec![4.0, -2.0, 3.0]);
    }

    #[test]
    fn zero_vector_maps_to_zero() {
        let t = example_tensor();
        assert_eq!(t.apply(&[0.0; 4]).unwrap(), vec![0.0; 4]);
        assert_eq!(t.contract_to_matrix(&[0.0; 4]).unwrap().nnz(), 0);
    }

    #[test]
    fn dimension_mismatch_and_order_errors() {
        let t = example_tensor();
        assert!(matches!(t.apply(&[1.0; 3]), Err(Error::DimensionMismatch { .. })));
        let m = SparseKTensor::zeros(3, 2, Symmetry::General);
        assert!(matches!(m.contract_to_matrix(&[1.0; 3]), Err(Error::UnsupportedOrder { .. })));
    }

    #[test]
    fn unfolding_matches_displayed_pattern() {
        let r = example_tensor().unfold().unwrap();
        assert_eq!((r.nrows(), r.ncols()), (4, 16));
        assert_eq!(r.nnz(), 12);
        // 1-based labels "ij" -> column (i-1) + (j-1) n
        let col = |i: usize, j: usize| (i - 1) + (j - 1) * 4;
        assert_eq!(r.get(0, col(2, 3)), 0.5);
        assert_eq!(r.get(0, col(3, 2)), 0.5);
        assert_eq!(r.get(1, col(3, 1)), 0.5);
        assert_eq!(r.get(1, col(4, 3)), 0.5);
        assert_eq!(r.get(2, col(2, 1)), 0.5);
        assert_eq!(r.get(2, col(2, 4)), 0.5);
        assert_eq!(r.get(3, col(3, 2)), 0.5);
        assert_eq!(r.get(0, col(1, 1)), 0.0);
    }

    #[test]
    fn unfold_overflow_is_reported() {
        let t = SparseKTensor::zeros(1 << 20, 5, Symmetry::General);
        assert!(matches!(t.unfold(), Err(Error::IndexOverflow { .. })));
    }

    #[test]
    fn threaded_apply_is_bitwise_identical() {
        let n = 60;
        let mut entries = Vec::new();
        for i in 0..n {
            for j in 0..n {
                for l in j..n {
                    if (i * 7 + j * 13 + l * 17) % 5 == 0 {
                        entries.push((vec![i, j, l], 1.0 / (1 + i + j + l) as f64));
                    }
                }
            }
        }
        let t = SparseKTensor::from_entries(n, 3, Symmetry::SemiSymmetric, entries).unwrap();
        let x: Vec<f64> = (0..n).map(|i| (i as f64).sin().abs()).collect();
        let one = t.apply_threaded(&x, 1).unwrap();
        for threads in [2, 3, 8] {
            assert_eq!(one, t.apply_threaded(&x, threads).unwrap());
        }
    }
}
