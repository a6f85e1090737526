//! Line-fitting subspace clustering on synthetic planar points.

use std::f64::consts::PI;
use std::io::{BufRead, Write};

use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hypergraph::UniformHypergraph;
use crate::partition::{labels, recursive_partition, OrderingMethod, PartitionOptions};

/// Directions of the four planted lines, in radians from the x-axis.
pub const LINE_ANGLES: [f64; 4] = [PI / 9.0, 0.0, -7.0 * PI / 18.0, -PI / 2.0];

/// Labeled points; `None` marks an outlier.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    pub points: Vec<Vec<f64>>,
    pub labels: Vec<Option<usize>>,
}

impl PointSet {
    pub fn new(points: Vec<Vec<f64>>, labels: Vec<Option<usize>>) -> Result<Self> {
        if points.len() != labels.len() {
            return Err(Error::DimensionMismatch { expected: points.len(), got: labels.len() });
        }
        let d = points.first().map_or(0, Vec::len);
        if points.iter().any(|p| p.len() != d || p.iter().any(|x| !x.is_finite())) {
            return Err(Error::InvalidParameter("points need equal dimension and finite coordinates".into()));
        }
        Ok(Self { points, labels })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LineFit {
    /// Sum of squared distances to the fitted line.
    pub cost: f64,
    pub center: Vec<f64>,
    /// Unit direction; the first axis when every point coincides.
    pub direction: Vec<f64>,
}

/// Least-squares line through `points`: the centroid plus the top
/// eigenvector of the scatter matrix `U U^T`, `U = [u_i - centroid]`.
pub fn line_fit_cost(points: &[&[f64]]) -> Result<LineFit> {
    if points.len() < 2 {
        return Err(Error::InvalidParameter("a line fit needs at least two points".into()));
    }
    let d = points[0].len();
    if d < 2 || points.iter().any(|p| p.len() != d) {
        return Err(Error::InvalidParameter("points need a common dimension of at least 2".into()));
    }
    let k = points.len() as f64;
    let center: Vec<f64> = (0..d).map(|c| points.iter().map(|p| p[c]).sum::<f64>() / k).collect();
    let u = DMatrix::from_fn(d, points.len(), |r, c| points[c][r] - center[r]);
    let scatter = &u * u.transpose();
    let trace = scatter.trace();
    let eig = SymmetricEigen::new(scatter);
    let top = eig.eigenvalues.imax();
    let lambda = eig.eigenvalues[top];
    let direction: Vec<f64> = if lambda > 0.0 {
        eig.eigenvectors.column(top).iter().copied().collect()
    } else {
        let mut e = vec![0.0; d];
        e[0] = 1.0;
        e
    };
    Ok(LineFit { cost: (trace - lambda).max(0.0), center, direction })
}

/// Placement of the planted segments.
#[derive(Clone, Debug, Serialize)]
pub struct InstanceLayout {
    /// Segment midpoints, one per line.
    pub centers: [[f64; 2]; 4],
    /// Points sit at `center + t * direction`, `t` uniform in `[-half_length, half_length]`.
    pub half_length: f64,
    /// Variance of the isotropic Gaussian noise on inlier coordinates.
    pub noise_variance: f64,
}

impl Default for InstanceLayout {
    fn default() -> Self {
        Self {
            centers: [[-12.0, 12.0], [12.0, 16.0], [-12.0, -12.0], [12.0, -8.0]],
            half_length: 10.0,
            noise_variance: 0.5,
        }
    }
}

impl InstanceLayout {
    pub fn noise_free() -> Self {
        Self { noise_variance: 0.0, ..Self::default() }
    }

    /// Axis-aligned box around the noiseless segments.
    pub fn bounding_box(&self) -> ([f64; 2], [f64; 2]) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for (c, &angle) in self.centers.iter().zip(&LINE_ANGLES) {
            for s in [-1.0, 1.0] {
                let p = [c[0] + s * self.half_length * angle.cos(), c[1] + s * self.half_length * angle.sin()];
                for a in 0..2 {
                    lo[a] = lo[a].min(p[a]);
                    hi[a] = hi[a].max(p[a]);
                }
            }
        }
        (lo, hi)
    }
}

/// `n/5` points on each planted line plus uniform outliers in the bounding
/// box, shuffled.
pub fn generate_instance(n: usize, seed: u64, layout: &InstanceLayout) -> Result<PointSet> {
    if n < 20 {
        return Err(Error::InvalidParameter(format!("n={n} must be at least 20")));
    }
    if !(layout.noise_variance >= 0.0) {
        return Err(Error::InvalidParameter("noise variance must be nonnegative".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, layout.noise_variance.sqrt()).expect("finite std");
    let per = n / 5;
    let mut pts = Vec::with_capacity(n);
    for (label, (c, &angle)) in layout.centers.iter().zip(&LINE_ANGLES).enumerate() {
        for _ in 0..per {
            let t = rng.random_range(-layout.half_length..=layout.half_length);
            let x = c[0] + t * angle.cos() + noise.sample(&mut rng);
            let y = c[1] + t * angle.sin() + noise.sample(&mut rng);
            pts.push((vec![x, y], Some(label)));
        }
    }
    let (lo, hi) = layout.bounding_box();
    while pts.len() < n {
        let x = rng.random_range(lo[0]..=hi[0]);
        let y = rng.random_range(lo[1]..=hi[1]);
        pts.push((vec![x, y], None));
    }
    pts.shuffle(&mut rng);
    let (points, labels) = pts.into_iter().unzip();
    PointSet::new(points, labels)
}

/// One candidate per vertex pair `i < j`, completed by a uniformly drawn
/// third vertex, with its line-fit cost.
pub fn candidate_triples(ps: &PointSet, seed: u64) -> Result<Vec<([usize; 3], f64)>> {
    let n = ps.len();
    if n < 3 {
        return Err(Error::InvalidParameter(format!("n={n} must be at least 3")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let mut l = rng.random_range(0..n - 2);
            if l >= i {
                l += 1;
            }
            if l >= j {
                l += 1;
            }
            let fit = line_fit_cost(&[&ps.points[i], &ps.points[j], &ps.points[l]])?;
            let mut t = [i, j, l];
            t.sort_unstable();
            out.push((t, fit.cost));
        }
    }
    Ok(out)
}

/// The `m` cheapest candidates (stable on ties), then deduplicated.
pub fn select_edges(candidates: &[([usize; 3], f64)], m: usize) -> Vec<[usize; 3]> {
    let mut idx: Vec<usize> = (0..candidates.len()).collect();
    idx.sort_by(|&a, &b| candidates[a].1.total_cmp(&candidates[b].1));
    let mut kept: Vec<[usize; 3]> = idx.into_iter().take(m).map(|i| candidates[i].0).collect();
    kept.sort_unstable();
    kept.dedup();
    kept
}

/// Edge budget `floor(n(n-1)/40)`, five percent of the candidates.
pub fn edge_budget(n: usize) -> usize {
    n * (n - 1) / 40
}

pub fn build_random_hypergraph(ps: &PointSet, seed: u64) -> Result<UniformHypergraph> {
    let candidates = candidate_triples(ps, seed)?;
    let edges = select_edges(&candidates, edge_budget(ps.len()));
    UniformHypergraph::unweighted(ps.len(), 3, edges)
}

#[derive(Clone, Debug, Serialize)]
pub struct ClusterScore {
    pub success_ratio: f64,
    pub parts_found: usize,
    pub num_edges: usize,
    pub diagnostics: Vec<String>,
}

/// Fraction of inliers whose part matches their cluster under the best
/// one-to-one assignment of parts to clusters.
pub fn success_ratio(truth: &[Option<usize>], assigned: &[usize], clusters: usize) -> f64 {
    let parts = assigned.iter().copied().max().map_or(0, |m| m + 1);
    let mut counts = vec![vec![0usize; clusters]; parts];
    let mut inliers = 0;
    for (t, &a) in truth.iter().zip(assigned) {
        if let Some(c) = *t {
            counts[a][c] += 1;
            inliers += 1;
        }
    }
    if inliers == 0 {
        return 1.0;
    }
    fn best(counts: &[Vec<usize>], part: usize, used: &mut Vec<bool>) -> usize {
        if part == counts.len() {
            return 0;
        }
        // this part may also stay unmatched
        let mut top = best(counts, part + 1, used);
        for c in 0..used.len() {
            if !used[c] {
                used[c] = true;
                top = top.max(counts[part][c] + best(counts, part + 1, used));
                used[c] = false;
            }
        }
        top
    }
    best(&counts, 0, &mut vec![false; clusters]) as f64 / inliers as f64
}

/// Builds the random hypergraph, partitions it recursively into `parts`
/// pieces, and scores the result against the planted lines.
pub fn cluster_and_score(ps: &PointSet, parts: usize, seed: u64, opts: &PartitionOptions) -> Result<ClusterScore> {
    let h = build_random_hypergraph(ps, seed)?;
    let result = recursive_partition(&h, parts, opts)?;
    let assigned = labels(&result.parts, ps.len());
    let clusters = ps.labels.iter().flatten().copied().max().map_or(0, |m| m + 1);
    let mut diagnostics = result.diagnostics;
    if result.parts.len() < parts {
        diagnostics.push(format!("scored against {} parts", result.parts.len()));
    }
    Ok(ClusterScore {
        success_ratio: success_ratio(&ps.labels, &assigned, clusters),
        parts_found: result.parts.len(),
        num_edges: h.num_edges(),
        diagnostics,
    })
}

pub fn method_name(method: OrderingMethod) -> &'static str {
    match method {
        OrderingMethod::Mlppr => "mlppr",
        OrderingMethod::Mpr => "mpr",
        OrderingMethod::Gpr => "gpr",
    }
}

/// Writes `x,y,label` rows; outliers get label `-1`.
pub fn write_points_csv<W: Write>(mut w: W, ps: &PointSet) -> Result<()> {
    writeln!(w, "x,y,label")?;
    for (p, l) in ps.points.iter().zip(&ps.labels) {
        let label = l.map_or(-1, |c| c as i64);
        writeln!(w, "{:?},{:?},{label}", p[0], p[1])?;
    }
    Ok(())
}

pub fn read_points_csv<R: BufRead>(reader: R) -> Result<PointSet> {
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if lineno == 0 || line.trim().is_empty() {
            continue;
        }
        let bad = |msg: &str| Error::Parse { line: lineno + 1, msg: msg.into() };
        let f: Vec<&str> = line.trim().split(',').collect();
        if f.len() != 3 {
            return Err(bad("expected x,y,label"));
        }
        let x: f64 = f[0].parse().map_err(|_| bad("bad x"))?;
        let y: f64 = f[1].parse().map_err(|_| bad("bad y"))?;
        let l: i64 = f[2].parse().map_err(|_| bad("bad label"))?;
        points.push(vec![x, y]);
        labels.push(if l < 0 { None } else { Some(l as usize) });
    }
    PointSet::new(points, labels)
}

/// Rotates 2-d points by `angle` about the origin.
pub fn rotate(points: &[Vec<f64>], angle: f64) -> Vec<Vec<f64>> {
    let (s, c) = angle.sin_cos();
    points.iter().map(|p| vec![c * p[0] - s * p[1], s * p[0] + c * p[1]]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn refs(p: &[Vec<f64>]) -> Vec<&[f64]> {
        p.iter().map(Vec::as_slice).collect()
    }

    #[test]
    fn collinear_points_cost_nothing() {
        let p = vec![vec![0.0, 1.0], vec![2.0, 2.0], vec![4.0, 3.0]];
        let fit = line_fit_cost(&refs(&p)).unwrap();
        assert!(fit.cost < 1e-12);
        assert!((fit.direction[1] / fit.direction[0] - 0.5).abs() < 1e-12);
        assert_eq!(fit.center, vec![2.0, 2.0]);
    }

    #[test]
    fn right_triangle_cost_is_small_eigenvalue() {
        let p = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        let fit = line_fit_cost(&refs(&p)).unwrap();
        // centered scatter [[2/3, -1/3], [-1/3, 2/3]] has eigenvalues 1/3 and 1
        assert!((fit.cost - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn identical_points_have_zero_cost() {
        let p = vec![vec![1.0, 1.0]; 3];
        let fit = line_fit_cost(&refs(&p)).unwrap();
        assert_eq!(fit.cost, 0.0);
        assert_eq!(fit.direction, vec![1.0, 0.0]);
        assert!(line_fit_cost(&refs(&p[..1])).is_err());
    }

    #[test]
    fn instance_sizes_and_determinism() {
        let layout = InstanceLayout::default();
        let a = generate_instance(100, 3, &layout).unwrap();
        for c in 0..4 {
            assert_eq!(a.labels.iter().filter(|l| **l == Some(c)).count(), 20);
        }
        assert_eq!(a.labels.iter().filter(|l| l.is_none()).count(), 20);
        assert_eq!(a, generate_instance(100, 3, &layout).unwrap());
        let b = generate_instance(20, 3, &layout).unwrap();
        assert_eq!(b.labels.iter().filter(|l| l.is_none()).count(), 4);
        assert!(generate_instance(19, 3, &layout).is_err());
    }

    #[test]
    fn edge_budget_for_one_hundred_points() {
        assert_eq!(edge_budget(100), 247);
        let ps = generate_instance(100, 1, &InstanceLayout::default()).unwrap();
        let h = build_random_hypergraph(&ps, 1).unwrap();
        assert!(h.num_edges() <= 247 && h.num_edges() > 200);
    }

    #[test]
    fn selection_keeps_cheapest() {
        let c = vec![([0, 1, 2], 3.0), ([0, 1, 3], 1.0), ([0, 2, 3], 2.0), ([0, 1, 3], 0.5)];
        assert_eq!(select_edges(&c, 2), vec![[0, 1, 3]]);
        assert_eq!(select_edges(&c, 3), vec![[0, 1, 3], [0, 2, 3]]);
    }

    #[test]
    fn success_ratio_matching() {
        let truth = vec![Some(0), Some(0), Some(1), Some(1), None];
        assert_eq!(success_ratio(&truth, &[1, 1, 0, 0, 0], 2), 1.0);
        assert_eq!(success_ratio(&truth, &[0, 0, 0, 0, 1], 2), 0.5);
        assert_eq!(success_ratio(&truth, &[0, 1, 0, 1, 1], 2), 0.5);
    }

    #[test]
    fn csv_round_trip() {
        let ps = generate_instance(20, 9, &InstanceLayout::default()).unwrap();
        let mut buf = Vec::new();
        write_points_csv(&mut buf, &ps).unwrap();
        assert_eq!(read_points_csv(buf.as_slice()).unwrap(), ps);
    }
}
