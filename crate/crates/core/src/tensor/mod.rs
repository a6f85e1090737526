//! Coordinate-form order-k tensors.
//!
//! A [`SparseKTensor`] keeps its entries sorted by `(row, tail)`, where the
//! row is the first index and the tail holds indices `2..=k`. Semi-symmetric
//! tensors store one canonical entry per tail multiset (tail sorted
//! ascending); that entry stands for every distinct permutation of its tail,
//! and the permutation count is kept alongside the value.

mod matrix;
mod normalize;
mod ops;

pub use matrix::CooMatrix;
pub use normalize::{normalize_substochastic, DanglingFibers};
pub use ops::{MultilinearOperator, COMPENSATED_SUM_THRESHOLD};

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Symmetry {
    General,
    /// Invariant under any permutation of indices `2..=k`.
    SemiSymmetric,
}

/// One stored entry. For semi-symmetric tensors `multiplicity` counts the
/// distinct tail permutations sharing `value`.
#[derive(Clone, Copy, Debug)]
pub struct Entry<'a> {
    pub row: usize,
    pub tail: &'a [u32],
    pub value: f64,
    pub multiplicity: f64,
}

#[derive(Clone, Debug)]
pub struct SparseKTensor {
    n: usize,
    order: usize,
    symmetry: Symmetry,
    rows: Vec<u32>,
    tails: Vec<u32>,
    values: Vec<f64>,
    mult: Vec<f64>,
    row_ptr: Vec<usize>,
}

/// Mode-1 fiber identified by its tail `(i_2, ..., i_k)`, 0-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FiberIndex {
    tail: Vec<usize>,
}

impl FiberIndex {
    pub fn new(tail: Vec<usize>) -> Self {
        Self { tail }
    }

    pub fn tail(&self) -> &[usize] {
        &self.tail
    }

    /// 0-based column of the mode-1 unfolding: `i_2 + i_3 n + ... + i_k n^(k-2)`.
    pub fn column(&self, n: usize) -> Result<usize> {
        let k = self.tail.len() + 1;
        let mut col = 0usize;
        let mut stride = 1usize;
        for (pos, &t) in self.tail.iter().enumerate() {
            if t >= n {
                return Err(Error::InvalidTensor(format!("fiber index {t} out of range n={n}")));
            }
            col = t.checked_mul(stride).and_then(|c| c.checked_add(col)).ok_or(Error::IndexOverflow { n, k })?;
            if pos + 1 < self.tail.len() {
                stride = stride.checked_mul(n).ok_or(Error::IndexOverflow { n, k })?;
            }
        }
        Ok(col)
    }

    /// The 1-based column label `l = j_2 + (j_3 - 1) n + ... + (j_k - 1) n^(k-2)`
    /// with 1-based `j`.
    pub fn linear(&self, n: usize) -> Result<usize> {
        self.column(n).map(|c| c + 1)
    }

    pub fn from_column(n: usize, order: usize, mut col: usize) -> Self {
        let mut tail = Vec::with_capacity(order - 1);
        for _ in 1..order {
            tail.push(col % n);
            col /= n;
        }
        Self { tail }
    }

    pub fn from_linear(n: usize, order: usize, linear: usize) -> Self {
        Self::from_column(n, order, linear - 1)
    }

    pub fn has_repeated_index(&self) -> bool {
        let mut t = self.tail.clone();
        t.sort_unstable();
        t.windows(2).any(|w| w[0] == w[1])
    }
}

/// Number of distinct orderings of a sorted multiset.
pub(crate) fn distinct_permutations(sorted: &[u32]) -> f64 {
    let mut count = factorial(sorted.len());
    let mut run = 1usize;
    for i in 1..=sorted.len() {
        if i < sorted.len() && sorted[i] == sorted[i - 1] {
            run += 1;
        } else {
            count /= factorial(run);
            run = 1;
        }
    }
    count
}

pub(crate) fn factorial(m: usize) -> f64 {
    (1..=m).map(|i| i as f64).product()
}

/// Advances `v` to the next lexicographic permutation; false once exhausted.
pub(crate) fn next_permutation<T: Ord>(v: &mut [T]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

impl SparseKTensor {
    /// Builds a tensor from `(index, value)` pairs where `index` has length
    /// `order`. Semi-symmetric input supplies one entry per tail multiset in
    /// any tail order. Zero values are dropped; repeated keys are rejected.
    pub fn from_entries<I, V>(n: usize, order: usize, symmetry: Symmetry, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (V, f64)>,
        V: AsRef<[usize]>,
    {
        if order < 2 {
            return Err(Error::UnsupportedOrder { order, reason: "tensor order must be at least 2" });
        }
        if n > u32::MAX as usize {
            return Err(Error::IndexOverflow { n, k: order });
        }
        let mut keyed: Vec<(Vec<u32>, f64)> = Vec::new();
        for (idx, value) in entries {
            let idx = idx.as_ref();
            if idx.len() != order {
                return Err(Error::DimensionMismatch { expected: order, got: idx.len() });
            }
            if !value.is_finite() {
                return Err(Error::InvalidTensor("non-finite entry".into()));
            }
            if idx.iter().any(|&i| i >= n) {
                return Err(Error::InvalidTensor(format!("index {idx:?} out of range n={n}")));
            }
            if value == 0.0 {
                continue;
            }
            let mut key: Vec<u32> = idx.iter().map(|&i| i as u32).collect();
            if symmetry == Symmetry::SemiSymmetric {
                key[1..].sort_unstable();
            }
            keyed.push((key, value));
        }
        keyed.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        if let Some(w) = keyed.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidTensor(format!("duplicate entry at {:?}", w[0].0)));
        }
        Ok(Self::from_sorted(n, order, symmetry, keyed))
    }

    fn from_sorted(n: usize, order: usize, symmetry: Symmetry, keyed: Vec<(Vec<u32>, f64)>) -> Self {
        let nnz = keyed.len();
        let mut rows = Vec::with_capacity(nnz);
        let mut tails = Vec::with_capacity(nnz * (order - 1));
        let mut values = Vec::with_capacity(nnz);
        let mut mult = Vec::with_capacity(nnz);
        let mut row_ptr = vec![0usize; n + 1];
        for (key, value) in keyed {
            rows.push(key[0]);
            row_ptr[key[0] as usize + 1] += 1;
            mult.push(match symmetry {
                Symmetry::General => 1.0,
                Symmetry::SemiSymmetric => distinct_permutations(&key[1..]),
            });
            tails.extend_from_slice(&key[1..]);
            values.push(value);
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self { n, order, symmetry, rows, tails, values, mult, row_ptr }
    }

    pub fn zeros(n: usize, order: usize, symmetry: Symmetry) -> Self {
        Self::from_sorted(n, order, symmetry, Vec::new())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    /// Stored (canonical) entry count.
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Count of nonzero tensor elements, permutations included.
    pub fn nnz_full(&self) -> f64 {
        self.mult.iter().sum()
    }

    pub fn entry(&self, e: usize) -> Entry<'_> {
        let w = self.order - 1;
        Entry {
            row: self.rows[e] as usize,
            tail: &self.tails[e * w..(e + 1) * w],
            value: self.values[e],
            multiplicity: self.mult[e],
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = Entry<'_>> + '_ {
        (0..self.nnz()).map(move |e| self.entry(e))
    }

    pub(crate) fn row_range(&self, row: usize) -> std::ops::Range<usize> {
        self.row_ptr[row]..self.row_ptr[row + 1]
    }

    /// Element lookup by full index.
    pub fn get(&self, index: &[usize]) -> f64 {
        if index.len() != self.order || index.iter().any(|&i| i >= self.n) {
            return 0.0;
        }
        let mut key: Vec<u32> = index[1..].iter().map(|&i| i as u32).collect();
        if self.symmetry == Symmetry::SemiSymmetric {
            key.sort_unstable();
        }
        let range = self.row_range(index[0]);
        let w = self.order - 1;
        let slice = &self.tails[range.start * w..range.end * w];
        let found = slice.chunks_exact(w).collect::<Vec<_>>().binary_search(&key.as_slice());
        match found {
            Ok(pos) => self.values[range.start + pos],
            Err(_) => 0.0,
        }
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|&v| v >= 0.0)
    }

    /// Every nonzero element keyed by its full index, permutations expanded.
    pub fn to_full_entries(&self) -> BTreeMap<Vec<usize>, f64> {
        let mut out = BTreeMap::new();
        for e in self.entries() {
            self.for_each_tail_permutation(e.tail, |tail| {
                let mut idx = Vec::with_capacity(self.order);
                idx.push(e.row);
                idx.extend(tail.iter().map(|&t| t as usize));
                out.insert(idx, e.value);
            });
        }
        out
    }

    pub(crate) fn for_each_tail_permutation(&self, tail: &[u32], mut f: impl FnMut(&[u32])) {
        match self.symmetry {
            Symmetry::General => f(tail),
            Symmetry::SemiSymmetric => {
                let mut perm = tail.to_vec();
                loop {
                    f(&perm);
                    if !next_permutation(&mut perm) {
                        break;
                    }
                }
            }
        }
    }

    /// Expands a semi-symmetric tensor into general storage.
    pub fn to_general(&self) -> SparseKTensor {
        if self.symmetry == Symmetry::General {
            return self.clone();
        }
        let keyed =
            self.to_full_entries().into_iter().map(|(k, v)| (k.into_iter().map(|i| i as u32).collect(), v)).collect();
        Self::from_sorted(self.n, self.order, Symmetry::General, keyed)
    }

    /// Checks that every stored element equals its tail permutations; always
    /// true for semi-symmetric storage.
    pub fn is_semi_symmetric(&self) -> bool {
        if self.symmetry == Symmetry::SemiSymmetric {
            return true;
        }
        let full = self.to_full_entries();
        full.iter().all(|(idx, &v)| {
            let mut tail = idx[1..].to_vec();
            tail.sort_unstable();
            loop {
                let mut other = vec![idx[0]];
                other.extend_from_slice(&tail);
                if full.get(&other).copied().unwrap_or(0.0) != v {
                    return false;
                }
                if !next_permutation(&mut tail) {
                    return true;
                }
            }
        })
    }

    /// Fully symmetric: invariant under every permutation of all k indices.
    pub fn is_symmetric(&self) -> bool {
        let full = self.to_full_entries();
        full.iter().all(|(idx, &v)| {
            let mut p = idx.clone();
            p.sort_unstable();
            loop {
                if full.get(&p).copied().unwrap_or(0.0) != v {
                    return false;
                }
                if !next_permutation(&mut p) {
                    return true;
                }
            }
        })
    }

    /// Adds `other` entrywise, producing general storage.
    pub fn add(&self, other: &SparseKTensor) -> Result<SparseKTensor> {
        if self.n != other.n || self.order != other.order {
            return Err(Error::DimensionMismatch { expected: self.n, got: other.n });
        }
        let mut full = self.to_full_entries();
        for (idx, v) in other.to_full_entries() {
            *full.entry(idx).or_insert(0.0) += v;
        }
        SparseKTensor::from_entries(self.n, self.order, Symmetry::General, full)
    }

    /// Mode-1 fiber sums `e^T R(P)` over the fibers that have stored entries,
    /// keyed by canonical tail, with the number of columns each one stands for.
    pub fn fiber_sums(&self) -> Vec<(Vec<u32>, f64, f64)> {
        let w = self.order - 1;
        let mut idx: Vec<usize> = (0..self.nnz()).collect();
        idx.sort_by(|&a, &b| self.tails[a * w..(a + 1) * w].cmp(&self.tails[b * w..(b + 1) * w]));
        let mut out: Vec<(Vec<u32>, f64, f64)> = Vec::new();
        for e in idx {
            let tail = &self.tails[e * w..(e + 1) * w];
            match out.last_mut() {
                Some(last) if last.0.as_slice() == tail => last.1 += self.values[e],
                _ => out.push((tail.to_vec(), self.values[e], self.mult[e])),
            }
        }
        out
    }

    /// Total number of mode-1 fibers, `n^(k-1)`.
    pub fn fiber_count(&self) -> u128 {
        (self.n as u128).pow((self.order - 1) as u32)
    }

    /// Sum of absolute values of the mode-1 unfolding's largest column, i.e.
    /// the induced 1-norm `||R(P)||_1`.
    pub fn unfolding_norm1(&self) -> f64 {
        let mut sums: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
        for e in self.entries() {
            *sums.entry(e.tail.to_vec()).or_insert(0.0) += e.value.abs();
        }
        sums.values().copied().fold(0.0, f64::max)
    }

    /// Entrywise 1-norm of the unfolding, `sum |p|` over every element.
    pub fn entrywise_norm1(&self) -> f64 {
        self.entries().map(|e| e.value.abs() * e.multiplicity).sum()
    }

    pub(crate) fn map_values(&self, f: impl Fn(usize, f64) -> f64) -> SparseKTensor {
        let mut out = self.clone();
        for (e, v) in out.values.iter_mut().enumerate() {
            *v = f(e, *v);
        }
        // drop entries that became exactly zero
        if out.values.contains(&0.0) {
            let keyed = out
                .entries()
                .filter(|e| e.value != 0.0)
                .map(|e| {
                    let mut k = vec![e.row as u32];
                    k.extend_from_slice(e.tail);
                    (k, e.value)
                })
                .collect();
            return Self::from_sorted(self.n, self.order, self.symmetry, keyed);
        }
        out
    }
}
