//! Numerical kernels shared by dictionary learning and feature coding:
//!
//! * [`lasso_cd`] — penalized lasso `min 0.5||y - D a||^2 + penalty*||a||_1`
//!   by cyclic coordinate descent, with a KKT-residual stopping rule;
//! * [`l1_constrained_code`] — the l1-ball-constrained form
//!   `min 0.5||y - D a||^2  s.t. ||a||_1 <= lambda`, solved by bisecting the
//!   penalty of the lasso (the l1 norm of the lasso solution is monotone
//!   non-increasing in the penalty);
//! * [`sum_to_one_ls`] — least squares over a selected atom subset under the
//!   affine constraint `sum(gamma) = 1`, via the shifted-covariance closed
//!   form;
//! * [`penalized_affine_lasso`] — the locality-weighted l1 penalty under the
//!   same affine constraint, solved by eliminating a pivot coordinate.
//!
//! All solvers are deterministic: identical inputs give bit-identical outputs.

use crate::error::{Error, Result};
use crate::linalg::{dot, ColMatrix};

/// Default KKT residual tolerance for the coordinate-descent solvers.
pub const DEFAULT_KKT_TOL: f64 = 1e-7;

/// Ridge scale for the shifted covariance in [`sum_to_one_ls`], relative to
/// the trace of the unregularized covariance. Large enough to survive exact
/// atom duplicates, small enough that solutions match an unregularized
/// elimination solve to well below 1e-6 per coefficient.
pub const SUM_TO_ONE_RIDGE: f64 = 1e-10;

/// Maximum bisection steps in [`l1_constrained_code`].
pub const BISECTION_STEPS: usize = 30;

/// Default sweep cap: 10 sweeps per atom.
pub fn default_max_sweeps(num_atoms: usize) -> usize {
    10 * num_atoms.max(1)
}

#[inline]
fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

/// Outcome of a coordinate-descent solve.
#[derive(Debug, Clone)]
pub struct LassoSolution {
    /// Dense coefficient vector, one entry per atom.
    pub coeffs: Vec<f64>,
    /// Whether the KKT residual dropped below the tolerance.
    pub converged: bool,
    /// Final maximum KKT violation (the "residual" carried by a
    /// non-converged solve).
    pub kkt_violation: f64,
    /// Coordinate sweeps performed.
    pub sweeps: usize,
    /// `0.5 a' G a - b' a`; add `0.5 ||y||^2` to get the reconstruction
    /// objective without the penalty term.
    pub partial_objective: f64,
}

/// Pre-computed Gram matrix `D' D` for repeated solves against one
/// dictionary. Coding a batch of signals against the same atoms shares this
/// across every solve and every bisection step.
#[derive(Debug, Clone)]
pub struct GramProblem {
    gram: Vec<f64>, // num_atoms x num_atoms, column-major (symmetric)
    num_atoms: usize,
}

impl GramProblem {
    pub fn new(dict: &ColMatrix) -> Self {
        let s = dict.cols();
        let mut gram = vec![0.0; s * s];
        for j in 0..s {
            let cj = dict.col(j);
            for i in j..s {
                let v = dot(dict.col(i), cj);
                gram[j * s + i] = v;
                gram[i * s + j] = v;
            }
        }
        GramProblem { gram, num_atoms: s }
    }

    pub fn num_atoms(&self) -> usize {
        self.num_atoms
    }

    /// Correlations `b = D' y` for a signal. Convenience wrapper.
    pub fn correlations(dict: &ColMatrix, y: &[f64]) -> Vec<f64> {
        dict.transpose_mul(y)
    }

    /// Cyclic coordinate descent on
    /// `0.5 a' G a - b' a + penalty ||a||_1`, warm-started from `alpha`.
    ///
    /// Stops when the maximum KKT violation is at most `tol`:
    /// `|b_j - (G a)_j| <= penalty + tol` for inactive coordinates and
    /// `b_j - (G a)_j = penalty * sign(a_j) +- tol` for active ones.
    pub fn lasso_warm(
        &self,
        b: &[f64],
        penalty: f64,
        tol: f64,
        max_sweeps: usize,
        alpha: &mut [f64],
    ) -> LassoSolution {
        let s = self.num_atoms;
        debug_assert_eq!(b.len(), s);
        debug_assert_eq!(alpha.len(), s);

        // q = G * alpha, maintained incrementally
        let mut q = vec![0.0; s];
        for j in 0..s {
            let aj = alpha[j];
            if aj != 0.0 {
                let col = &self.gram[j * s..(j + 1) * s];
                for (qi, g) in q.iter_mut().zip(col) {
                    *qi += aj * g;
                }
            }
        }

        let mut sweeps = 0;
        let mut kkt = f64::INFINITY;
        while sweeps < max_sweeps {
            for j in 0..s {
                let gjj = self.gram[j * s + j];
                if gjj <= 0.0 {
                    continue; // zero column cannot be updated
                }
                let z = b[j] - q[j] + gjj * alpha[j];
                let new = soft_threshold(z, penalty) / gjj;
                let delta = new - alpha[j];
                if delta != 0.0 {
                    let col = &self.gram[j * s..(j + 1) * s];
                    for (qi, g) in q.iter_mut().zip(col) {
                        *qi += delta * g;
                    }
                    alpha[j] = new;
                }
            }
            sweeps += 1;
            kkt = self.kkt_violation(b, penalty, alpha, &q);
            if kkt <= tol {
                break;
            }
        }

        let partial = 0.5 * dot(alpha, &q) - dot(b, alpha);
        LassoSolution {
            coeffs: alpha.to_vec(),
            converged: kkt <= tol,
            kkt_violation: kkt,
            sweeps,
            partial_objective: partial,
        }
    }

    fn kkt_violation(&self, b: &[f64], penalty: f64, alpha: &[f64], q: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..self.num_atoms {
            let r = b[j] - q[j];
            let v = if alpha[j] == 0.0 {
                (r.abs() - penalty).max(0.0)
            } else {
                (r - penalty * alpha[j].signum()).abs()
            };
            worst = worst.max(v);
        }
        worst
    }

    /// `0.5 a' G a - b' a` for an arbitrary coefficient vector.
    pub fn partial_objective(&self, b: &[f64], alpha: &[f64]) -> f64 {
        let s = self.num_atoms;
        let mut q = vec![0.0; s];
        for j in 0..s {
            let aj = alpha[j];
            if aj != 0.0 {
                let col = &self.gram[j * s..(j + 1) * s];
                for (qi, g) in q.iter_mut().zip(col) {
                    *qi += aj * g;
                }
            }
        }
        0.5 * dot(alpha, &q) - dot(b, alpha)
    }
}

/// Penalized lasso `min 0.5||y - D a||^2 + penalty ||a||_1` by cyclic
/// coordinate descent from a cold start.
///
/// A solve that exhausts `max_sweeps` without meeting the KKT tolerance is
/// returned with `converged = false` and the final violation in
/// `kkt_violation`; it is not an error.
pub fn lasso_cd(
    dict: &ColMatrix,
    y: &[f64],
    penalty: f64,
    tol: f64,
    max_sweeps: usize,
) -> Result<LassoSolution> {
    if y.len() != dict.rows() {
        return Err(Error::Shape(format!(
            "signal length {} != dictionary rows {}",
            y.len(),
            dict.rows()
        )));
    }
    if !(penalty >= 0.0) || !penalty.is_finite() {
        return Err(Error::Parameter(format!(
            "penalty must be finite and non-negative, got {penalty}"
        )));
    }
    let gram = GramProblem::new(dict);
    let b = dict.transpose_mul(y);
    let mut alpha = vec![0.0; dict.cols()];
    Ok(gram.lasso_warm(&b, penalty, tol, max_sweeps, &mut alpha))
}

/// Constrained coding `min 0.5||y - D a||^2  s.t. ||a||_1 <= lambda`.
///
/// Solved by bisection on the lasso penalty over `[0, max_j |d_j' y|]`,
/// exploiting that `||a(penalty)||_1` is monotone non-increasing. Returns the
/// feasible iterate closest to the ball boundary, so `||a||_1 <= lambda`
/// always holds on output.
pub fn l1_constrained_code(dict: &ColMatrix, y: &[f64], lambda: f64) -> Result<Vec<f64>> {
    if y.len() != dict.rows() {
        return Err(Error::Shape(format!(
            "signal length {} != dictionary rows {}",
            y.len(),
            dict.rows()
        )));
    }
    let gram = GramProblem::new(dict);
    let b = dict.transpose_mul(y);
    l1_constrained_code_gram(
        &gram,
        &b,
        lambda,
        DEFAULT_KKT_TOL,
        default_max_sweeps(dict.cols()),
    )
    .map(|sol| sol.coeffs)
}

/// Gram-domain variant of [`l1_constrained_code`] for batch callers that
/// share one [`GramProblem`] across many signals.
pub fn l1_constrained_code_gram(
    gram: &GramProblem,
    b: &[f64],
    lambda: f64,
    tol: f64,
    max_sweeps: usize,
) -> Result<LassoSolution> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Parameter(format!(
            "lambda must be finite and positive, got {lambda}"
        )));
    }
    let s = gram.num_atoms();
    if b.len() != s {
        return Err(Error::Shape(format!(
            "correlation length {} != atom count {s}",
            b.len()
        )));
    }

    let penalty_max = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if penalty_max == 0.0 {
        // y is orthogonal to every atom (includes y = 0): a = 0 is optimal.
        return Ok(LassoSolution {
            coeffs: vec![0.0; s],
            converged: true,
            kkt_violation: 0.0,
            sweeps: 0,
            partial_objective: 0.0,
        });
    }

    let mut alpha = vec![0.0; s];
    let unconstrained = gram.lasso_warm(b, 0.0, tol, max_sweeps, &mut alpha);
    let l1 = |a: &[f64]| a.iter().map(|v| v.abs()).sum::<f64>();
    if l1(&unconstrained.coeffs) <= lambda {
        return Ok(unconstrained);
    }

    let mut lo = 0.0f64; // l1 norm above lambda
    let mut hi = penalty_max; // a = 0 there, trivially feasible
    let mut best: Option<(f64, LassoSolution)> = None;
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        let sol = gram.lasso_warm(b, mid, tol, max_sweeps, &mut alpha);
        let norm = l1(&sol.coeffs);
        if norm > lambda {
            lo = mid;
        } else {
            hi = mid;
            let gap = lambda - norm;
            let better = best.as_ref().map_or(true, |(g, _)| gap < *g);
            if better {
                best = Some((gap, sol));
            }
            if gap <= 1e-9 * lambda {
                break;
            }
        }
    }

    match best {
        Some((_, sol)) => Ok(sol),
        None => {
            // The bracket [lo, penalty_max] should always contain feasible
            // solutions; reaching this point means the l1 norm never dropped
            // below lambda, i.e. the monotone bracket failed.
            let mut zeroed = vec![0.0; s];
            let sol = gram.lasso_warm(b, penalty_max, tol, max_sweeps, &mut zeroed);
            if l1(&sol.coeffs) <= lambda {
                Ok(sol)
            } else {
                Err(Error::Solver(format!(
                    "penalty bisection failed to bracket ||a||_1 = {lambda} \
                     (degenerate dictionary?)"
                )))
            }
        }
    }
}

/// Least squares on a selected atom subset under the affine constraint
/// `sum(gamma) = 1` (coefficients may be negative).
///
/// Uses the shifted-covariance closed form: with `B_j = d_j - y`,
/// `C = B' B + ridge * trace(B'B) * I`, solve `C w = 1` and normalize
/// `gamma = w / sum(w)`.
pub fn sum_to_one_ls(columns: &[&[f64]], y: &[f64]) -> Result<Vec<f64>> {
    let k = columns.len();
    if k == 0 {
        return Err(Error::Parameter("empty atom subset".into()));
    }
    let m = y.len();
    for (j, col) in columns.iter().enumerate() {
        if col.len() != m {
            return Err(Error::Shape(format!(
                "atom {j} has length {}, signal has {m}",
                col.len()
            )));
        }
    }
    if k == 1 {
        return Ok(vec![1.0]); // the constraint forces gamma = [1]
    }

    // B_j = d_j - y
    let shifted: Vec<Vec<f64>> = columns
        .iter()
        .map(|col| col.iter().zip(y).map(|(d, yi)| d - yi).collect())
        .collect();

    let mut cov = vec![0.0; k * k];
    for j in 0..k {
        for i in j..k {
            let v = dot(&shifted[i], &shifted[j]);
            cov[j * k + i] = v;
            cov[i * k + j] = v;
        }
    }
    let trace: f64 = (0..k).map(|i| cov[i * k + i]).sum();
    if !trace.is_finite() {
        return Err(Error::Numeric("non-finite covariance".into()));
    }
    if trace <= 0.0 {
        // every atom equals y exactly; any affine combination reconstructs y
        return Ok(vec![1.0 / k as f64; k]);
    }
    let ridge = SUM_TO_ONE_RIDGE * trace;
    for i in 0..k {
        cov[i * k + i] += ridge;
    }

    let w = crate::linalg::solve_dense(cov, vec![1.0; k])?;
    let total: f64 = w.iter().sum();
    if !total.is_finite() || total == 0.0 {
        return Err(Error::Numeric(format!(
            "degenerate affine solve: sum of weights = {total}"
        )));
    }
    Ok(w.into_iter().map(|v| v / total).collect())
}

/// Locality-weighted penalized coding under the affine constraint:
/// `min 0.5||y - D g||^2 + beta * sum_j w_j |g_j|  s.t. sum(g) = 1`.
///
/// The pivot coordinate (the atom with the smallest locality weight, i.e. the
/// nearest atom) is eliminated through the constraint; every other coordinate
/// is then updated by exact minimization of its piecewise-quadratic
/// restriction, redistributing mass between the coordinate and the pivot.
pub fn penalized_affine_lasso(
    dict: &ColMatrix,
    y: &[f64],
    locality: &[f64],
    beta: f64,
    tol: f64,
    max_sweeps: usize,
) -> Result<Vec<f64>> {
    let s = dict.cols();
    let m = dict.rows();
    if y.len() != m {
        return Err(Error::Shape(format!(
            "signal length {} != dictionary rows {m}",
            y.len()
        )));
    }
    if locality.len() != s {
        return Err(Error::Shape(format!(
            "locality length {} != atom count {s}",
            locality.len()
        )));
    }
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::Parameter(format!(
            "beta must be finite and non-negative, got {beta}"
        )));
    }
    if s == 1 {
        return Ok(vec![1.0]);
    }

    // Pivot: nearest atom (smallest weight), ties to the lower index.
    let pivot = locality
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(std::cmp::Ordering::Equal))
        .map(|(i, _)| i)
        .unwrap_or(0);

    let mut gamma = vec![0.0; s];
    gamma[pivot] = 1.0;

    // residual r = y - D gamma
    let mut r: Vec<f64> = y
        .iter()
        .zip(dict.col(pivot))
        .map(|(yi, d)| yi - d)
        .collect();

    // effective columns e_j = d_j - d_pivot and their squared norms
    let pivot_col = dict.col(pivot).to_vec();
    let sq_norms: Vec<f64> = (0..s)
        .map(|j| {
            dict.col(j)
                .iter()
                .zip(&pivot_col)
                .map(|(d, p)| (d - p) * (d - p))
                .sum()
        })
        .collect();

    let mut scratch = vec![0.0; m];
    for _ in 0..max_sweeps {
        let mut max_change = 0.0f64;
        for j in 0..s {
            if j == pivot {
                continue;
            }
            let a = sq_norms[j];
            let g = gamma[j];
            let c = g + gamma[pivot]; // budget shared with the pivot
            let (wj, wp) = (beta * locality[j], beta * locality[pivot]);

            // e_j = d_j - d_pivot
            for ((e, d), p) in scratch.iter_mut().zip(dict.col(j)).zip(&pivot_col) {
                *e = d - p;
            }

            let new = if a > 0.0 {
                let u = dot(&r, &scratch) + a * g;
                minimize_two_kink(a, u, c, wj, wp)
            } else {
                // identical atoms: objective is piecewise linear in g_j
                let phi = |x: f64| wj * x.abs() + wp * (c - x).abs();
                if phi(0.0) <= phi(c) {
                    0.0
                } else {
                    c
                }
            };

            let delta = new - g;
            if delta != 0.0 {
                for (ri, e) in r.iter_mut().zip(&scratch) {
                    *ri -= delta * e;
                }
                gamma[j] = new;
                gamma[pivot] = c - new;
                max_change = max_change.max(delta.abs());
            }
        }
        if max_change <= tol {
            break;
        }
    }
    Ok(gamma)
}

/// Exact minimizer of `0.5 a x^2 - u x + wj |x| + wp |c - x|` (a > 0).
///
/// The function is piecewise quadratic with kinks at `0` and `c`; the minimum
/// is either an interior stationary point of one of the three pieces or one
/// of the kinks.
fn minimize_two_kink(a: f64, u: f64, c: f64, wj: f64, wp: f64) -> f64 {
    let (b0, b1) = if 0.0 <= c { (0.0, c) } else { (c, 0.0) };
    let phi = |x: f64| 0.5 * a * x * x - u * x + wj * x.abs() + wp * (c - x).abs();

    let mut best_x = b0;
    let mut best_v = phi(b0);
    let mut consider = |x: f64| {
        let v = phi(x);
        if v < best_v {
            best_v = v;
            best_x = x;
        }
    };
    consider(b1);

    for (lo, hi) in [(f64::NEG_INFINITY, b0), (b0, b1), (b1, f64::INFINITY)] {
        if !(lo < hi) {
            continue; // empty piece when c == 0
        }
        // representative interior point to read off the sign pattern
        let probe = if lo.is_infinite() {
            hi - 1.0
        } else if hi.is_infinite() {
            lo + 1.0
        } else {
            0.5 * (lo + hi)
        };
        let s1 = if probe > 0.0 {
            1.0
        } else if probe < 0.0 {
            -1.0
        } else {
            0.0
        };
        let s2 = if c - probe > 0.0 {
            1.0
        } else if c - probe < 0.0 {
            -1.0
        } else {
            0.0
        };
        // d/dx [0.5 a x^2 - u x + wj s1 x + wp s2 (c - x)] = a x - u + wj s1 - wp s2
        let x_star = (u - wj * s1 + wp * s2) / a;
        if x_star > lo && x_star < hi {
            consider(x_star);
        }
    }
    best_x
}
