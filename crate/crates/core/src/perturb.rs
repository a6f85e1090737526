//! Norm-controlled random perturbations of stochastic data, and the
//! experiment comparing the resulting change in the MLPPR solution with the
//! a priori bound.

use std::collections::BTreeMap;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solver::{contraction_constant, solve_mlppr, Model, PageRankProblem, SolveOptions};
use crate::stochastic::dist1;
use crate::tensor::{SparseKTensor, Symmetry};

/// Redraws of `b` allowed before the target norm is declared unreachable.
const MAX_REDRAWS: usize = 1000;

/// Nonzero fibers must sum to one within this.
const FIBER_SUM_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    V,
    Tensor,
    Both,
}

impl Target {
    pub fn name(self) -> &'static str {
        match self {
            Target::V => "v",
            Target::Tensor => "tensor",
            Target::Both => "both",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PerturbationSpec {
    pub sigma: f64,
    pub target: Target,
    pub trials: usize,
    pub seed: u64,
    /// Tensor budget as a multiple of `sigma`.
    pub tensor_factor: f64,
}

impl PerturbationSpec {
    pub fn new(sigma: f64, target: Target, trials: usize, seed: u64) -> Result<Self> {
        if !(sigma > 0.0 && sigma < 1.0) {
            return Err(Error::InvalidParameter(format!("sigma={sigma} must lie in (0, 1)")));
        }
        if trials == 0 {
            return Err(Error::InvalidParameter("need at least one trial".into()));
        }
        Ok(Self { sigma, target, trials, seed, tensor_factor: 4.0 })
    }
}

#[derive(Clone, Debug)]
pub struct StochasticPerturbation {
    pub delta: Vec<f64>,
    /// Largest violation among feasibility and the optimality conditions.
    pub kkt_residual: f64,
    /// Number of discarded draws of `b`.
    pub redraws: usize,
}

/// `d_i = max(-u_i, soft(b_i - theta, rho))`.
fn shrink(b: f64, u: f64, theta: f64, rho: f64) -> f64 {
    let z = b - theta;
    let s = if z > rho {
        z - rho
    } else if z < -rho {
        z + rho
    } else {
        0.0
    };
    s.max(-u)
}

/// The shift `theta` making `sum_i shrink(b_i, u_i, theta, rho) = 0`. The sum
/// is piecewise linear and nonincreasing in `theta`, so the root is found
/// exactly between two breakpoints.
fn balance(b: &[f64], u: &[f64], rho: f64) -> f64 {
    let total = |theta: f64| -> f64 { b.iter().zip(u).map(|(&bi, &ui)| shrink(bi, ui, theta, rho)).sum() };
    let mut knots: Vec<f64> = Vec::with_capacity(3 * b.len());
    for (&bi, &ui) in b.iter().zip(u) {
        knots.extend([bi - rho, bi + rho, bi + rho + ui]);
    }
    knots.sort_by(f64::total_cmp);
    // total(knots[0]) >= 0 and total(last) = -sum(u) <= 0
    let (mut lo, mut hi) = (0, knots.len() - 1);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if total(knots[mid]) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (a, c) = (knots[lo], knots[hi]);
    let (fa, fc) = (total(a), total(c));
    if fa == fc || fa <= 0.0 {
        a
    } else {
        a + (c - a) * fa / (fa - fc)
    }
}

/// Solves `min ||d - b||^2` subject to `||d||_1 = sigma`, `e^T d = 0`,
/// `u + d >= 0` for a given `b`, through its multipliers `(theta, rho)`.
/// `None` when the 1-norm constraint does not bind (projection of `b` is
/// already inside the ball).
fn project(b: &[f64], u: &[f64], sigma: f64) -> Option<(Vec<f64>, f64)> {
    let norm_at = |rho: f64| -> (f64, Vec<f64>) {
        let theta = balance(b, u, rho);
        let d: Vec<f64> = b.iter().zip(u).map(|(&bi, &ui)| shrink(bi, ui, theta, rho)).collect();
        (d.iter().map(|x| x.abs()).sum(), d)
    };
    let (n0, _) = norm_at(0.0);
    if n0 < sigma {
        return None;
    }
    let mut lo = 0.0;
    let mut hi = b.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if norm_at(mid).0 >= sigma {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // the norm is piecewise linear in rho; finish with one secant step
    let (nlo, dlo) = norm_at(lo);
    let (nhi, _) = norm_at(hi);
    let rho = if nlo > nhi { lo + (hi - lo) * (nlo - sigma) / (nlo - nhi) } else { lo };
    let (nr, dr) = norm_at(rho);
    if (nr - sigma).abs() <= (nlo - sigma).abs() {
        Some((dr, rho))
    } else {
        Some((dlo, lo))
    }
}

fn kkt_residual(b: &[f64], u: &[f64], sigma: f64, d: &[f64], rho: f64) -> f64 {
    let theta = balance(b, u, rho);
    let stationarity =
        d.iter().zip(b).zip(u).fold(0.0f64, |m, ((&di, &bi), &ui)| m.max((di - shrink(bi, ui, theta, rho)).abs()));
    let sum: f64 = d.iter().sum();
    let norm: f64 = d.iter().map(|x| x.abs()).sum();
    let negativity = d.iter().zip(u).fold(0.0f64, |m, (di, ui)| m.max(-(ui + di)));
    stationarity.max(sum.abs()).max((norm - sigma).abs()).max(negativity).max(if rho < 0.0 { -rho } else { 0.0 })
}

/// Random `delta` with `||delta||_1 = sigma`, `e^T delta = 0`, and
/// `u + delta >= 0`: the projection of a standard normal draw onto that set.
pub fn perturb_stochastic_with<R: Rng>(u: &[f64], sigma: f64, rng: &mut R) -> Result<StochasticPerturbation> {
    let n = u.len();
    if !(sigma >= 0.0) {
        return Err(Error::InvalidParameter(format!("sigma={sigma} must be nonnegative")));
    }
    if sigma == 0.0 {
        return Ok(StochasticPerturbation { delta: vec![0.0; n], kkt_residual: 0.0, redraws: 0 });
    }
    let min_u = u.iter().copied().fold(f64::INFINITY, f64::min);
    if n < 2 || sigma > 2.0 * (1.0 - min_u) {
        return Err(Error::Infeasible(format!("no perturbation of 1-norm {sigma} keeps this vector stochastic")));
    }
    for redraws in 0..MAX_REDRAWS {
        let b: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        if let Some((delta, rho)) = project(&b, u, sigma) {
            let kkt_residual = kkt_residual(&b, u, sigma, &delta, rho);
            return Ok(StochasticPerturbation { delta, kkt_residual, redraws });
        }
    }
    Err(Error::Infeasible(format!("1-norm {sigma} not reached after {MAX_REDRAWS} draws")))
}

pub fn perturb_stochastic(u: &[f64], sigma: f64, seed: u64) -> Result<StochasticPerturbation> {
    perturb_stochastic_with(u, sigma, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Perturbs every nonzero mode-1 fiber of `pbar` within its simplex, splitting
/// `sigma_total` equally, so the entrywise 1-norm of the change is
/// `sigma_total`. Dangling fibers stay zero. The result uses general storage.
pub fn perturb_tensor_with<R: Rng>(pbar: &SparseKTensor, sigma_total: f64, rng: &mut R) -> Result<SparseKTensor> {
    let n = pbar.n();
    let mut fibers: BTreeMap<Vec<usize>, Vec<f64>> = BTreeMap::new();
    for (idx, value) in pbar.to_full_entries() {
        fibers.entry(idx[1..].to_vec()).or_insert_with(|| vec![0.0; n])[idx[0]] = value;
    }
    if fibers.is_empty() {
        return Err(Error::InvalidTensor("tensor has no nonzero fibers to perturb".into()));
    }
    for (tail, col) in &fibers {
        let s: f64 = col.iter().sum();
        if (s - 1.0).abs() > FIBER_SUM_TOL || col.iter().any(|&x| x < 0.0) {
            return Err(Error::InvalidTensor(format!("fiber {tail:?} is not stochastic (sum {s})")));
        }
    }
    let share = sigma_total / fibers.len() as f64;
    let mut entries = Vec::new();
    for (tail, col) in fibers {
        let delta = perturb_stochastic_with(&col, share, rng)?.delta;
        for (i, (c, d)) in col.iter().zip(&delta).enumerate() {
            let mut idx = vec![i];
            idx.extend_from_slice(&tail);
            // rounding can leave -1e-17 where a zero entry was pushed down
            entries.push((idx, (c + d).max(0.0)));
        }
    }
    SparseKTensor::from_entries(n, pbar.order(), Symmetry::General, entries)
}

pub fn perturb_tensor(pbar: &SparseKTensor, sigma_total: f64, seed: u64) -> Result<SparseKTensor> {
    perturb_tensor_with(pbar, sigma_total, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// `(2k-3) / ((k-1)(1-varsigma)) (alpha/(1-alpha) tensor_norm + v_norm)`.
pub fn perturbation_bound(k: usize, alpha: f64, tensor_norm: f64, v_norm: f64) -> Result<f64> {
    let info = contraction_constant(k, alpha);
    if !info.unique_by_contraction {
        return Err(Error::InvalidParameter(format!(
            "varsigma={} >= 1; the perturbation bound does not apply",
            info.varsigma
        )));
    }
    let kf = k as f64;
    Ok((2.0 * kf - 3.0) / ((kf - 1.0) * (1.0 - info.varsigma)) * (alpha / (1.0 - alpha) * tensor_norm + v_norm))
}

#[derive(Clone, Debug, Serialize)]
pub struct Trial {
    pub dy: f64,
    pub v_norm: f64,
    pub tensor_norm: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TrialSummary {
    pub sigma: f64,
    pub target: Target,
    pub mean_dy: f64,
    pub max_dy: f64,
    /// Bound at the nominal norms `sigma` and `tensor_factor * sigma`.
    pub bound: f64,
    /// Trials whose change exceeded the bound at their own measured norms.
    pub violations: usize,
    #[serde(skip)]
    pub trials: Vec<Trial>,
}

/// splitmix64 finalizer, used to derive independent per-trial seeds.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn tight_options() -> SolveOptions {
    SolveOptions { tol_step: 1e-15, tol_eq: 1e-15, max_iter: 10_000, ..Default::default() }
}

fn solve_y(problem: &PageRankProblem) -> Result<Vec<f64>> {
    let r = solve_mlppr(problem, &tight_options())?;
    // the tight tolerances may sit below rounding; accept the iterate once it stalls
    if !r.converged && r.residual_eq > 1e-13 {
        return Err(Error::NotConverged { iterations: r.iterations, residual: r.residual_eq });
    }
    Ok(r.y)
}

fn one_trial(problem: &PageRankProblem, y: &[f64], spec: &PerturbationSpec, trial: usize) -> Result<Trial> {
    let mut rng = ChaCha8Rng::seed_from_u64(mix(spec.seed ^ mix(trial as u64)));
    let (tensor, tensor_norm) = if spec.target != Target::V {
        let t = perturb_tensor_with(problem.tensor(), spec.tensor_factor * spec.sigma, &mut rng)?;
        let norm = t.add(&problem.tensor().map_values(|_, x| -x))?.entrywise_norm1();
        (t, norm)
    } else {
        (problem.tensor().clone(), 0.0)
    };
    let (v, v_norm) = if spec.target != Target::Tensor {
        let d = perturb_stochastic_with(problem.v(), spec.sigma, &mut rng)?.delta;
        let v: Vec<f64> = problem.v().iter().zip(&d).map(|(a, b)| (a + b).max(0.0)).collect();
        let s: f64 = v.iter().sum();
        let v: Vec<f64> = v.iter().map(|x| x / s).collect();
        let norm = dist1(&v, problem.v());
        (v, norm)
    } else {
        (problem.v().to_vec(), 0.0)
    };
    let perturbed = PageRankProblem::new(tensor, problem.alpha(), v, Model::Mlppr)?;
    let yp = solve_y(&perturbed)?;
    let bound = perturbation_bound(problem.order(), problem.alpha(), tensor_norm, v_norm)?;
    Ok(Trial { dy: dist1(&yp, y), v_norm, tensor_norm, bound })
}

/// Runs `spec.trials` perturbed solves, spread over `threads` workers. The
/// result does not depend on `threads`.
pub fn run_trials(problem: &PageRankProblem, spec: &PerturbationSpec, threads: usize) -> Result<TrialSummary> {
    let bound = perturbation_bound(
        problem.order(),
        problem.alpha(),
        if spec.target == Target::V { 0.0 } else { spec.tensor_factor * spec.sigma },
        if spec.target == Target::Tensor { 0.0 } else { spec.sigma },
    )?;
    let y = solve_y(problem)?;
    let threads = threads.clamp(1, spec.trials);
    let chunk = spec.trials.div_ceil(threads);
    let results: Vec<Result<Vec<Trial>>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..threads)
            .map(|t| {
                let y = &y;
                s.spawn(move || {
                    (t * chunk..((t + 1) * chunk).min(spec.trials))
                        .map(|i| one_trial(problem, y, spec, i))
                        .collect::<Result<Vec<_>>>()
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("trial worker panicked")).collect()
    });
    let mut trials = Vec::with_capacity(spec.trials);
    for r in results {
        trials.extend(r?);
    }
    let mean_dy = trials.iter().map(|t| t.dy).sum::<f64>() / trials.len() as f64;
    let max_dy = trials.iter().fold(0.0f64, |m, t| m.max(t.dy));
    let violations = trials.iter().filter(|t| t.dy > t.bound).count();
    Ok(TrialSummary { sigma: spec.sigma, target: spec.target, mean_dy, max_dy, bound, violations, trials })
}

/// `count` points spaced evenly in log scale from `lo` to `hi`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count).map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp()).collect()
}

/// Every sigma of `grid` crossed with every target.
pub fn perturbation_experiment(
    problem: &PageRankProblem,
    grid: &[f64],
    targets: &[Target],
    trials: usize,
    seed: u64,
    threads: usize,
) -> Result<Vec<TrialSummary>> {
    let mut out = Vec::new();
    for (si, &sigma) in grid.iter().enumerate() {
        for &target in targets {
            let sub = mix(seed ^ mix((si as u64) << 8 | target as u64));
            let spec = PerturbationSpec::new(sigma, target, trials, sub)?;
            out.push(run_trials(problem, &spec, threads)?);
        }
    }
    Ok(out)
}

/// Writes `sigma,mode,mean_dy,bound` rows.
pub fn write_experiment_csv<W: Write>(mut w: W, rows: &[TrialSummary]) -> Result<()> {
    writeln!(w, "sigma,mode,mean_dy,bound")?;
    for r in rows {
        writeln!(w, "{:e},{},{:e},{:e}", r.sigma, r.target.name(), r.mean_dy, r.bound)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(u: &[f64], sigma: f64, d: &[f64]) {
        assert!((d.iter().map(|x| x.abs()).sum::<f64>() - sigma).abs() < 1e-10);
        assert!(d.iter().sum::<f64>().abs() < 1e-12);
        assert!(u.iter().zip(d).all(|(a, b)| a + b >= -1e-15));
    }

    #[test]
    fn uniform_vector_constraints_hold() {
        let u = vec![1.0 / 9.0; 9];
        for seed in 0..20 {
            let p = perturb_stochastic(&u, 0.01, seed).unwrap();
            check(&u, 0.01, &p.delta);
            assert!(p.kkt_residual < 1e-8, "{}", p.kkt_residual);
        }
    }

    #[test]
    fn sparse_vector_stays_nonnegative() {
        let u = vec![0.5, 0.5, 0.0, 0.0];
        for seed in 0..50 {
            let p = perturb_stochastic(&u, 0.3, seed).unwrap();
            check(&u, 0.3, &p.delta);
            assert!(p.kkt_residual < 1e-8);
        }
    }

    #[test]
    fn infeasible_and_trivial_sigmas() {
        let u = vec![1.0, 0.0];
        assert!(matches!(perturb_stochastic(&u, 2.5, 0), Err(Error::Infeasible(_))));
        assert!(matches!(perturb_stochastic(&[1.0], 0.1, 0), Err(Error::Infeasible(_))));
        assert!(perturb_stochastic(&u, -0.1, 0).is_err());
        assert_eq!(perturb_stochastic(&u, 0.0, 0).unwrap().delta, vec![0.0, 0.0]);
        let tiny = perturb_stochastic(&[0.25; 4], 1e-9, 3).unwrap();
        assert!(tiny.delta.iter().all(|x| x.abs() <= 1e-9));
    }

    #[test]
    fn bound_refuses_without_contraction() {
        assert!(perturbation_bound(3, 0.5, 0.1, 0.1).is_err());
        let b = perturbation_bound(3, 0.2, 0.04, 0.01).unwrap();
        let varsigma = 0.6 / 0.8f64.sqrt();
        assert!((b - 1.5 / (1.0 - varsigma) * (0.25 * 0.04 + 0.01)).abs() < 1e-15);
    }

    #[test]
    fn projection_beats_random_feasible_points() {
        let u = vec![0.3, 0.0, 0.2, 0.1, 0.4];
        let sigma = 0.2;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let b: Vec<f64> = (0..5).map(|_| rng.sample(StandardNormal)).collect();
            let Some((d, _)) = project(&b, &u, sigma) else { continue };
            let cost = |x: &[f64]| -> f64 { x.iter().zip(&b).map(|(a, c)| (a - c) * (a - c)).sum() };
            for _ in 0..100 {
                let other = perturb_stochastic_with(&u, sigma, &mut rng).unwrap().delta;
                check(&u, sigma, &other);
                assert!(cost(&d) <= cost(&other) + 1e-12);
            }
        }
    }

    #[test]
    fn toy_tensor_budget_spreads_over_live_fibers() {
        use crate::fixtures::toy_hypergraph;
        use crate::tensor::normalize_substochastic;
        let (pbar, dangling) = normalize_substochastic(&toy_hypergraph().adjacency_tensor()).unwrap();
        assert_eq!(dangling.nondangling_count(), 30);
        let t = perturb_tensor(&pbar, 0.04, 5).unwrap();
        let diff = t.add(&pbar.map_values(|_, x| -x)).unwrap();
        assert!((diff.entrywise_norm1() - 0.04).abs() < 1e-10);
        assert!((diff.unfolding_norm1() - 0.04 / 30.0).abs() < 1e-10);
        assert!(t.is_nonnegative());
        assert!(t.fiber_sums().iter().all(|(_, s, _)| (s - 1.0).abs() < 1e-12));
        let same = perturb_tensor(&pbar, 0.0, 5).unwrap();
        assert_eq!(same.to_full_entries(), pbar.to_full_entries());
    }

    #[test]
    fn grid_endpoints() {
        let g = log_grid(1e-4, 1e-1, 4);
        assert_eq!(g.len(), 4);
        assert!((g[1] - 1e-3).abs() < 1e-15 && (g[3] - 1e-1).abs() < 1e-15);
    }
}
