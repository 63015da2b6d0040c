use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};
use crate::ingest::Label;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRegParams {
    /// Weight of the `l2 / 2 * |w|^2` penalty; the bias is not penalized.
    pub l2: f64,
    pub max_iter: usize,
    /// Stop once the gradient max-norm falls below this.
    pub tol: f64,
}

impl Default for LogRegParams {
    fn default() -> Self {
        Self { l2: 1e-4, max_iter: 1000, tol: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct LogRegModel<T> {
    pub weights: Vec<T>,
    pub bias: T,
    pub params: LogRegParams,
    pub converged: bool,
    pub iterations: usize,
    pub gradient_norm: f64,
}

/// Objective value and gradient of the mean negative log-likelihood plus
/// the l2 penalty.
pub struct Objective<T> {
    pub value: T,
    pub grad_weights: Vec<T>,
    pub grad_bias: T,
}

#[inline]
fn softplus<T: Scalar>(z: T) -> T {
    z.max(T::zero()) + (-z.abs()).exp().ln_1p()
}

#[inline]
fn sigmoid<T: Scalar>(z: T) -> T {
    if z >= T::zero() {
        T::one() / (T::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (T::one() + e)
    }
}

#[inline]
fn linear<T: Scalar>(weights: &[T], bias: T, row: &[T]) -> T {
    let mut z = bias;
    for (&w, &x) in weights.iter().zip(row) {
        z += w * x;
    }
    z
}

/// `(1/n) Σ [softplus(z_i) - y_i z_i] + l2/2 |w|^2` with `z_i = w·x_i + b`.
pub fn logistic_objective<T: Scalar>(data: &Dataset<T>, weights: &[T], bias: T, l2: T) -> Objective<T> {
    let n = T::from_count(data.n_rows());
    let mut value = T::zero();
    let mut grad_weights = vec![T::zero(); weights.len()];
    let mut grad_bias = T::zero();
    for i in 0..data.n_rows() {
        let row = data.row(i);
        let y = T::from_count(data.targets()[i] as usize);
        let z = linear(weights, bias, row);
        value += softplus(z) - y * z;
        let r = sigmoid(z) - y;
        grad_bias += r;
        for (g, &x) in grad_weights.iter_mut().zip(row) {
            *g += r * x;
        }
    }
    value /= n;
    grad_bias /= n;
    let half = T::lit(0.5);
    for (g, &w) in grad_weights.iter_mut().zip(weights) {
        *g = *g / n + l2 * w;
        value += half * l2 * w * w;
    }
    Objective { value, grad_weights, grad_bias }
}

fn max_norm<T: Scalar>(o: &Objective<T>) -> T {
    o.grad_weights.iter().fold(o.grad_bias.abs(), |m, g| m.max(g.abs()))
}

/// Gradient descent with Barzilai-Borwein step sizes safeguarded by Armijo
/// backtracking.
pub fn logreg_train<T: Scalar>(data: &Dataset<T>, params: &LogRegParams) -> Result<LogRegModel<T>> {
    data.require_both_classes()?;
    if !(params.l2 >= 0.0 && params.l2.is_finite()) {
        return Err(Error::param("l2", "must be a finite non-negative value"));
    }
    if !(params.tol > 0.0) {
        return Err(Error::param("tol", "must be positive"));
    }
    let l2 = T::lit(params.l2);
    let tol = T::lit(params.tol);
    let d = data.n_features();
    let mut w = vec![T::zero(); d];
    let mut b = T::zero();
    let mut obj = logistic_objective(data, &w, b, l2);
    let mut step = T::one();
    let mut converged = false;
    let mut iterations = 0;
    let armijo = T::lit(1e-4);

    while iterations < params.max_iter {
        if max_norm(&obj) < tol {
            converged = true;
            break;
        }
        iterations += 1;
        let g_sq = obj.grad_weights.iter().fold(obj.grad_bias * obj.grad_bias, |s, &g| s + g * g);
        let mut accepted = None;
        for _ in 0..60 {
            let w_new: Vec<T> = w.iter().zip(&obj.grad_weights).map(|(&wi, &gi)| wi - step * gi).collect();
            let b_new = b - step * obj.grad_bias;
            let cand = logistic_objective(data, &w_new, b_new, l2);
            if cand.value <= obj.value - armijo * step * g_sq {
                accepted = Some((w_new, b_new, cand));
                break;
            }
            step *= T::lit(0.5);
        }
        let Some((w_new, b_new, cand)) = accepted else {
            // no descent possible at machine precision
            break;
        };
        // Barzilai-Borwein: step = s.s / s.y
        let mut ss = (b_new - b) * (b_new - b);
        let mut sy = (b_new - b) * (cand.grad_bias - obj.grad_bias);
        for j in 0..d {
            let s = w_new[j] - w[j];
            ss += s * s;
            sy += s * (cand.grad_weights[j] - obj.grad_weights[j]);
        }
        step = if sy > T::zero() && (ss / sy).is_finite() { ss / sy } else { step * T::lit(2.0) };
        w = w_new;
        b = b_new;
        obj = cand;
    }
    if !converged && max_norm(&obj) < tol {
        converged = true;
    }

    Ok(LogRegModel {
        weights: w,
        bias: b,
        params: params.clone(),
        converged,
        iterations,
        gradient_norm: max_norm(&obj).as_f64(),
    })
}

impl<T: Scalar> LogRegModel<T> {
    /// Zero weights and bias: every probability is exactly 0.5.
    pub fn zero(n_features: usize) -> Self {
        Self {
            weights: vec![T::zero(); n_features],
            bias: T::zero(),
            params: LogRegParams::default(),
            converged: false,
            iterations: 0,
            gradient_norm: f64::NAN,
        }
    }

    pub fn probability(&self, row: &[T]) -> T {
        sigmoid(linear(&self.weights, self.bias, row))
    }

    /// Label 1 only when the probability is strictly above 0.5.
    pub fn predict_row(&self, row: &[T]) -> Label {
        Label::from(linear(&self.weights, self.bias, row) > T::zero())
    }
}
