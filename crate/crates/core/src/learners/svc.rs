//! Soft-margin support vector classifier with an RBF kernel.
//!
//! The dual problem
//!
//! ```text
//! min  1/2 aᵀQa - eᵀa   s.t.  yᵀa = 0,  0 <= a_i <= C,   Q_ij = y_i y_j K(x_i, x_j)
//! ```
//!
//! is solved by sequential minimal optimization: each step picks the
//! maximal violating pair (first-order working set selection) and solves the
//! two-variable subproblem analytically. Iteration stops once the violation
//! gap `max_{I_up} -y G - min_{I_low} -y G` drops below `tol`.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::knn::squared_distance;
use super::Dataset;
use crate::error::{Error, Result};
use crate::ingest::Label;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvcParams {
    pub c: f64,
    pub gamma: f64,
    /// Stopping threshold on the maximal KKT violation.
    pub tol: f64,
    /// Cap on pair updates.
    pub max_iter: usize,
    /// Kernel row cache budget in MiB.
    pub cache_mb: usize,
}

impl Default for SvcParams {
    fn default() -> Self {
        Self { c: 10.0, gamma: 0.001, tol: 1e-3, max_iter: 1_000_000, cache_mb: 256 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvcDiagnostics {
    pub iterations: usize,
    pub converged: bool,
    /// Maximal violating-pair gap at termination.
    pub kkt_gap: f64,
    pub n_support: usize,
}

/// Full dual solution over the training rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SvcSolution<T> {
    pub alpha: Vec<T>,
    /// Offset with decision function `Σ a_i y_i K(x_i, x) - rho`.
    pub rho: T,
    pub diagnostics: SvcDiagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SvcModel<T> {
    pub params: SvcParams,
    pub n_features: usize,
    /// Support vectors, row-major.
    pub support_vectors: Vec<T>,
    /// `a_i y_i` per support vector.
    pub coefficients: Vec<T>,
    pub bias: T,
    pub diagnostics: SvcDiagnostics,
}

#[inline]
pub(crate) fn rbf<T: Scalar>(a: &[T], b: &[T], gamma: T) -> T {
    (-gamma * squared_distance(a, b)).exp()
}

/// FIFO cache of kernel rows.
struct KernelCache<'a, T> {
    data: &'a Dataset<T>,
    gamma: T,
    rows: Vec<Option<Vec<T>>>,
    loaded: VecDeque<usize>,
    capacity: usize,
}

impl<'a, T: Scalar> KernelCache<'a, T> {
    fn new(data: &'a Dataset<T>, gamma: T, budget_mb: usize) -> Self {
        let n = data.n_rows();
        let row_bytes = (n * std::mem::size_of::<T>()).max(1);
        let capacity = ((budget_mb << 20) / row_bytes).clamp(2, n.max(2));
        Self { data, gamma, rows: vec![None; n], loaded: VecDeque::new(), capacity }
    }

    fn ensure(&mut self, i: usize, keep: usize) {
        if self.rows[i].is_some() {
            return;
        }
        while self.loaded.len() >= self.capacity {
            let old = self.loaded.pop_front().expect("non-empty");
            if old == keep {
                self.loaded.push_back(old);
                continue;
            }
            self.rows[old] = None;
        }
        let xi = self.data.row(i);
        let row = (0..self.data.n_rows()).map(|t| rbf(self.data.row(t), xi, self.gamma)).collect();
        self.rows[i] = Some(row);
        self.loaded.push_back(i);
    }

    fn pair(&mut self, i: usize, j: usize) -> (&[T], &[T]) {
        self.ensure(i, j);
        self.ensure(j, i);
        (self.rows[i].as_deref().expect("cached"), self.rows[j].as_deref().expect("cached"))
    }
}

fn sign<T: Scalar>(label: Label) -> T {
    if label == 1 {
        T::one()
    } else {
        -T::one()
    }
}

/// Runs SMO and returns the full dual vector.
pub fn svc_solve<T: Scalar>(data: &Dataset<T>, params: &SvcParams) -> Result<SvcSolution<T>> {
    data.require_both_classes()?;
    if !(params.c > 0.0 && params.c.is_finite()) {
        return Err(Error::param("c", "must be positive"));
    }
    if !(params.gamma > 0.0 && params.gamma.is_finite()) {
        return Err(Error::param("gamma", "must be positive"));
    }
    if !(params.tol > 0.0) {
        return Err(Error::param("tol", "must be positive"));
    }
    let n = data.n_rows();
    let c = T::lit(params.c);
    let tol = T::lit(params.tol);
    let y: Vec<T> = data.targets().iter().map(|&l| sign(l)).collect();
    let mut alpha = vec![T::zero(); n];
    let mut grad = vec![-T::one(); n];
    let mut cache = KernelCache::new(data, T::lit(params.gamma), params.cache_mb);
    let tiny = T::lit(1e-12);

    let in_up = |a: T, yt: T| (yt > T::zero() && a < c) || (yt < T::zero() && a > T::zero());
    let in_low = |a: T, yt: T| (yt > T::zero() && a > T::zero()) || (yt < T::zero() && a < c);

    let mut iterations = 0;
    let mut gap;
    loop {
        let mut i = usize::MAX;
        let mut g_max = T::neg_infinity();
        let mut j = usize::MAX;
        let mut g_min = T::infinity();
        for t in 0..n {
            let v = -y[t] * grad[t];
            if in_up(alpha[t], y[t]) && v > g_max {
                g_max = v;
                i = t;
            }
            if in_low(alpha[t], y[t]) && v < g_min {
                g_min = v;
                j = t;
            }
        }
        gap = if i == usize::MAX || j == usize::MAX { T::zero() } else { g_max - g_min };
        if gap < tol || iterations >= params.max_iter {
            break;
        }
        iterations += 1;

        let (ki, kj) = cache.pair(i, j);
        let kii = ki[i];
        let kjj = kj[j];
        let kij = ki[j];
        let (old_i, old_j) = (alpha[i], alpha[j]);
        let mut quad = kii + kjj - T::lit(2.0) * kij;
        if quad <= T::zero() {
            quad = tiny;
        }

        if y[i] != y[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > T::zero() {
                if alpha[j] < T::zero() {
                    alpha[j] = T::zero();
                    alpha[i] = diff;
                }
            } else if alpha[i] < T::zero() {
                alpha[i] = T::zero();
                alpha[j] = -diff;
            }
            if diff > T::zero() {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < T::zero() {
                alpha[j] = T::zero();
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < T::zero() {
                alpha[i] = T::zero();
                alpha[j] = sum;
            }
        }

        let di = (alpha[i] - old_i) * y[i];
        let dj = (alpha[j] - old_j) * y[j];
        for t in 0..n {
            grad[t] += y[t] * (ki[t] * di + kj[t] * dj);
        }
    }

    // rho: mean of y G over free vectors, else midpoint of the feasible range
    let mut free_sum = T::zero();
    let mut free_count = 0usize;
    let mut upper = T::infinity();
    let mut lower = T::neg_infinity();
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] > T::zero() && alpha[t] < c {
            free_sum += yg;
            free_count += 1;
        } else if (alpha[t] >= c && y[t] < T::zero()) || (alpha[t] <= T::zero() && y[t] > T::zero()) {
            upper = upper.min(yg);
        } else {
            lower = lower.max(yg);
        }
    }
    let rho = if free_count > 0 {
        free_sum / T::from_count(free_count)
    } else if upper.is_finite() && lower.is_finite() {
        (upper + lower) / T::lit(2.0)
    } else if upper.is_finite() {
        upper
    } else {
        lower
    };

    let n_support = alpha.iter().filter(|&&a| a > T::zero()).count();
    Ok(SvcSolution {
        alpha,
        rho,
        diagnostics: SvcDiagnostics { iterations, converged: gap < tol, kkt_gap: gap.as_f64(), n_support },
    })
}

/// Trains the classifier. Hitting the iteration cap is not an error: the
/// model is returned with `diagnostics.converged == false`.
pub fn svc_train<T: Scalar>(data: &Dataset<T>, params: &SvcParams) -> Result<SvcModel<T>> {
    let sol = svc_solve(data, params)?;
    let d = data.n_features();
    let mut support_vectors = Vec::new();
    let mut coefficients = Vec::new();
    for (t, &a) in sol.alpha.iter().enumerate() {
        if a > T::zero() {
            support_vectors.extend_from_slice(data.row(t));
            coefficients.push(a * sign::<T>(data.targets()[t]));
        }
    }
    Ok(SvcModel {
        params: params.clone(),
        n_features: d,
        support_vectors,
        coefficients,
        bias: -sol.rho,
        diagnostics: sol.diagnostics,
    })
}

impl<T: Scalar> SvcModel<T> {
    pub fn decision_value(&self, x: &[T]) -> T {
        let gamma = T::lit(self.params.gamma);
        let mut f = self.bias;
        for (sv, &coef) in self.support_vectors.chunks_exact(self.n_features).zip(&self.coefficients) {
            f += coef * rbf(sv, x, gamma);
        }
        f
    }

    /// Label 1 when the decision value is strictly positive.
    pub fn predict_row(&self, x: &[T]) -> Label {
        Label::from(self.decision_value(x) > T::zero())
    }

    pub(crate) fn predict_rows<'a>(&self, rows: impl Iterator<Item = &'a [T]>) -> Vec<Label> {
        rows.map(|r| self.predict_row(r)).collect()
    }
}
