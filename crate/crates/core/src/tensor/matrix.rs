use crate::error::{Error, Result};

/// Coordinate-form sparse matrix. Entries are kept sorted by `(row, col)`
/// with duplicates summed and exact zeros removed.
#[derive(Clone, Debug, PartialEq)]
pub struct CooMatrix {
    nrows: usize,
    ncols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl CooMatrix {
    pub fn new(nrows: usize, ncols: usize, mut entries: Vec<(usize, usize, f64)>) -> Result<Self> {
        if let Some(&(r, c, _)) = entries.iter().find(|&&(r, c, _)| r >= nrows || c >= ncols) {
            return Err(Error::InvalidParameter(format!("entry ({r},{c}) outside {nrows}x{ncols} matrix")));
        }
        entries.sort_by_key(|e| (e.0, e.1));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(entries.len());
        for (r, c, v) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        merged.retain(|e| e.2 != 0.0);
        Ok(Self { nrows, ncols, entries: merged })
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries.binary_search_by(|e| (e.0, e.1).cmp(&(row, col))).map(|i| self.entries[i].2).unwrap_or(0.0)
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        for &(r, c, v) in &self.entries {
            y[r] += v * x[c];
        }
        y
    }

    /// `A^T x`
    pub fn tmatvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.ncols];
        for &(r, c, v) in &self.entries {
            y[c] += v * x[r];
        }
        y
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.ncols];
        for &(_, c, v) in &self.entries {
            s[c] += v;
        }
        s
    }

    pub fn row_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.nrows];
        for &(r, _, v) in &self.entries {
            s[r] += v;
        }
        s
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.ncols]; self.nrows];
        for &(r, c, v) in &self.entries {
            d[r][c] = v;
        }
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed_and_zeros_dropped() {
        let m = CooMatrix::new(2, 3, vec![(1, 2, 1.0), (0, 0, 2.0), (1, 2, 0.5), (0, 1, 1.0), (0, 1, -1.0)]).unwrap();
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(1, 2), 1.5);
        assert_eq!(m.get(0, 1), 0.0);
        assert_eq!(m.matvec(&[1.0, 1.0, 2.0]), vec![2.0, 3.0]);
        assert_eq!(m.tmatvec(&[1.0, 1.0]), vec![2.0, 0.0, 1.5]);
        assert!(CooMatrix::new(2, 2, vec![(2, 0, 1.0)]).is_err());
    }
}
