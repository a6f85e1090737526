use super::{FiberIndex, SparseKTensor, Symmetry};
use crate::error::{Error, Result};

/// The zero fibers of a normalized tensor.
///
/// Kept implicitly as the complement of the nonzero fibers, since for sparse
/// hypergraphs nearly all of the `n^(k-1)` fibers are dangling.
#[derive(Clone, Debug)]
pub struct DanglingFibers {
    n: usize,
    order: usize,
    symmetry: Symmetry,
    /// canonical tails with positive sum, sorted, with their column counts
    nonzero: Vec<(Vec<u32>, f64)>,
    nonzero_columns: u128,
}

impl DanglingFibers {
    pub fn total_fibers(&self) -> u128 {
        (self.n as u128).pow((self.order - 1) as u32)
    }

    pub fn count(&self) -> u128 {
        self.total_fibers() - self.nonzero_columns
    }

    pub fn nondangling_count(&self) -> u128 {
        self.nonzero_columns
    }

    fn canonical(&self, fiber: &FiberIndex) -> Vec<u32> {
        let mut key: Vec<u32> = fiber.tail().iter().map(|&t| t as u32).collect();
        if self.symmetry == Symmetry::SemiSymmetric {
            key.sort_unstable();
        }
        key
    }

    pub fn contains(&self, fiber: &FiberIndex) -> bool {
        let key = self.canonical(fiber);
        self.nonzero.binary_search_by(|(t, _)| t.as_slice().cmp(&key)).is_err()
    }

    /// Dangling fibers whose tail repeats an index. No hyperedge can reach
    /// these.
    pub fn structural_count(&self) -> u128 {
        let k1 = (self.order - 1) as u128;
        let n = self.n as u128;
        let distinct: u128 = (0..k1).map(|i| n.saturating_sub(i)).product();
        let repeated_nonzero: u128 = self.nonzero.iter().filter(|(t, _)| has_repeat(t)).map(|&(_, m)| m as u128).sum();
        self.total_fibers() - distinct - repeated_nonzero
    }

    /// Dangling fibers with distinct tail indices.
    pub fn sparse_count(&self) -> u128 {
        self.count() - self.structural_count()
    }

    /// Nonzero fibers as canonical tails with the number of unfolding columns
    /// each one represents.
    pub fn nondangling(&self) -> impl Iterator<Item = (&[u32], f64)> + '_ {
        self.nonzero.iter().map(|(t, m)| (t.as_slice(), *m))
    }

    /// Enumerates every dangling fiber. Walks all `n^(k-1)` columns.
    pub fn iter(&self) -> impl Iterator<Item = FiberIndex> + '_ {
        let total = self.total_fibers() as usize;
        (0..total).map(move |c| FiberIndex::from_column(self.n, self.order, c)).filter(move |f| self.contains(f))
    }
}

fn has_repeat(sorted_or_not: &[u32]) -> bool {
    let mut t = sorted_or_not.to_vec();
    t.sort_unstable();
    t.windows(2).any(|w| w[0] == w[1])
}

/// Divides every fiber with positive sum by that sum, giving
/// `R(P) = R(A) D^+` with `D = diag(e^T R(A))`; zero fibers stay zero and are
/// reported as dangling.
pub fn normalize_substochastic(a: &SparseKTensor) -> Result<(SparseKTensor, DanglingFibers)> {
    if !a.is_nonnegative() {
        return Err(Error::InvalidTensor("normalization needs a nonnegative tensor".into()));
    }
    let sums = a.fiber_sums();
    let lookup = |tail: &[u32]| -> f64 {
        let pos = sums.binary_search_by(|(t, _, _)| t.as_slice().cmp(tail)).expect("fiber present");
        sums[pos].1
    };
    let normalized = a.map_values(|e, v| {
        let s = lookup(a.entry(e).tail);
        if s > 0.0 {
            v / s
        } else {
            0.0
        }
    });
    let nonzero: Vec<(Vec<u32>, f64)> = sums.into_iter().filter(|(_, s, _)| *s > 0.0).map(|(t, _, m)| (t, m)).collect();
    let nonzero_columns = nonzero.iter().map(|&(_, m)| m as u128).sum();
    let dangling = DanglingFibers { n: a.n(), order: a.order(), symmetry: a.symmetry(), nonzero, nonzero_columns };
    Ok((normalized, dangling))
}
