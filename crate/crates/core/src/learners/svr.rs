//! Epsilon-insensitive support vector regression.
//!
//! The dual is solved in the usual doubled form with `2n` box-constrained
//! variables `β = (α, α*)`, labels `s = (+1, -1)` and one equality
//! constraint `sᵀβ = 0`:
//!
//! ```text
//! min ½ βᵀQβ + pᵀβ,   Q_ij = s_i s_j K(x_i, x_j),   p = (ε - z, ε + z),   0 ≤ β ≤ C
//! ```
//!
//! Each iteration updates the maximal-violating pair chosen with
//! second-order information and stops once the violation gap drops below
//! the tolerance.

use log::warn;
use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use super::SvrParams;

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Kernel {
    Linear,
    Rbf { gamma: f64 },
}

impl Kernel {
    pub fn eval(&self, a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
        match *self {
            Kernel::Linear => a.dot(&b),
            Kernel::Rbf { gamma } => {
                let d: f64 = a.iter().zip(b.iter()).map(|(u, v)| (u - v) * (u - v)).sum();
                (-gamma * d).exp()
            }
        }
    }

    pub fn gram(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let n = x.nrows();
        let mut k = Array2::zeros((n, n));
        for i in 0..n {
            for j in i..n {
                let v = self.eval(x.row(i), x.row(j));
                k[[i, j]] = v;
                k[[j, i]] = v;
            }
        }
        k
    }
}

/// Trained SVR: `f(x) = Σ coefᵢ K(svᵢ, x) + bias`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvrModel {
    pub kernel: Kernel,
    pub support_vectors: Array2<f64>,
    /// `αᵢ - αᵢ*` for each stored support vector, in `[-C, C]`.
    pub coef: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
    pub converged: bool,
}

struct Solution {
    beta: Vec<f64>,
    rho: f64,
    iterations: usize,
    converged: bool,
}

fn solve(params: &SvrParams, k: &Array2<f64>, z: ArrayView1<f64>) -> Solution {
    let l = z.len();
    let m = 2 * l;
    let c = params.c;
    let sign = |t: usize| if t < l { 1.0 } else { -1.0 };
    // Q_ts for the doubled problem
    let q = |t: usize, s: usize| sign(t) * sign(s) * k[[t % l, s % l]];
    let qd: Vec<f64> = (0..m).map(|t| k[[t % l, t % l]]).collect();

    let mut beta = vec![0.0; m];
    let mut grad: Vec<f64> = (0..m)
        .map(|t| if t < l { params.epsilon - z[t] } else { params.epsilon + z[t - l] })
        .collect();
    let upper = |b: f64| b >= c;
    let lower = |b: f64| b <= 0.0;

    let max_iter = params.max_passes.saturating_mul(m.max(1));
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        // working-set selection
        let mut gmax = f64::NEG_INFINITY;
        let mut i = usize::MAX;
        for t in 0..m {
            let v = -sign(t) * grad[t];
            let eligible = if t < l { !upper(beta[t]) } else { !lower(beta[t]) };
            if eligible && v >= gmax {
                gmax = v;
                i = t;
            }
        }
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut best_obj = f64::INFINITY;
        if i != usize::MAX {
            for t in 0..m {
                let eligible = if t < l { !lower(beta[t]) } else { !upper(beta[t]) };
                if !eligible {
                    continue;
                }
                let v = sign(t) * grad[t];
                if v >= gmax2 {
                    gmax2 = v;
                }
                let diff = gmax + v;
                if diff > 0.0 {
                    let mut quad = qd[i] + qd[t] - 2.0 * sign(i) * sign(t) * q(i, t);
                    if quad <= 0.0 {
                        quad = TAU;
                    }
                    let obj = -(diff * diff) / quad;
                    if obj <= best_obj {
                        best_obj = obj;
                        j = t;
                    }
                }
            }
        }
        if gmax + gmax2 < params.tolerance || j == usize::MAX {
            converged = true;
            break;
        }
        iterations += 1;

        let (old_i, old_j) = (beta[i], beta[j]);
        let qij = q(i, j);
        if sign(i) != sign(j) {
            let mut quad = qd[i] + qd[j] + 2.0 * qij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = beta[i] - beta[j];
            beta[i] += delta;
            beta[j] += delta;
            if diff > 0.0 {
                if beta[j] < 0.0 {
                    beta[j] = 0.0;
                    beta[i] = diff;
                }
            } else if beta[i] < 0.0 {
                beta[i] = 0.0;
                beta[j] = -diff;
            }
            if diff > 0.0 {
                if beta[i] > c {
                    beta[i] = c;
                    beta[j] = c - diff;
                }
            } else if beta[j] > c {
                beta[j] = c;
                beta[i] = c + diff;
            }
        } else {
            let mut quad = qd[i] + qd[j] - 2.0 * qij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (grad[i] - grad[j]) / quad;
            let sum = beta[i] + beta[j];
            beta[i] -= delta;
            beta[j] += delta;
            if sum > c {
                if beta[i] > c {
                    beta[i] = c;
                    beta[j] = sum - c;
                }
            } else if beta[j] < 0.0 {
                beta[j] = 0.0;
                beta[i] = sum;
            }
            if sum > c {
                if beta[j] > c {
                    beta[j] = c;
                    beta[i] = sum - c;
                }
            } else if beta[i] < 0.0 {
                beta[i] = 0.0;
                beta[j] = sum;
            }
        }

        let (di, dj) = (beta[i] - old_i, beta[j] - old_j);
        if di != 0.0 || dj != 0.0 {
            for (t, g) in grad.iter_mut().enumerate() {
                *g += q(t, i) * di + q(t, j) * dj;
            }
        }
    }

    // bias from the free variables, or the midpoint of the feasible interval
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free, mut free_sum) = (0usize, 0.0);
    for t in 0..m {
        let yg = sign(t) * grad[t];
        if upper(beta[t]) {
            if t >= l {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if lower(beta[t]) {
            if t < l {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            free_sum += yg;
        }
    }
    let rho = if free > 0 {
        free_sum / free as f64
    } else {
        0.5 * (ub + lb)
    };
    Solution {
        beta,
        rho,
        iterations,
        converged,
    }
}

impl SvrModel {
    pub(crate) fn fit(params: &SvrParams, kernel: Kernel, x: ArrayView2<f64>, z: ArrayView1<f64>) -> SvrModel {
        let l = x.nrows();
        let gram = kernel.gram(x);
        let sol = solve(params, &gram, z);
        if !sol.converged {
            warn!(
                "SVR stopped after {} iterations without reaching tolerance {}",
                sol.iterations, params.tolerance
            );
        }
        let mut rows = Vec::new();
        let mut coef = Vec::new();
        for i in 0..l {
            let a = sol.beta[i] - sol.beta[i + l];
            if a != 0.0 {
                rows.push(i);
                coef.push(a);
            }
        }
        SvrModel {
            kernel,
            support_vectors: x.select(ndarray::Axis(0), &rows),
            coef,
            bias: -sol.rho,
            iterations: sol.iterations,
            converged: sol.converged,
        }
    }

    pub fn predict(&self, x: ArrayView2<f64>) -> Array1<f64> {
        x.outer_iter()
            .map(|row| {
                self.support_vectors
                    .outer_iter()
                    .zip(&self.coef)
                    .map(|(sv, a)| a * self.kernel.eval(sv, row))
                    .sum::<f64>()
                    + self.bias
            })
            .collect()
    }

    pub fn n_support(&self) -> usize {
        self.coef.len()
    }
}

#[cfg(test)]
mod tests {
    use ndarray::array;

    use super::*;
    use crate::learners::{train, LearnerSpec, ModelState};

    fn svr(model: &crate::RegressionModel) -> &SvrModel {
        match &model.state {
            ModelState::Svr(s) => s,
            _ => unreachable!(),
        }
    }

    #[test]
    fn linear_fit_of_a_line() {
        let x = array![[-2.0], [-1.0], [0.0], [1.0], [2.0]];
        let y = array![-4.0, -2.0, 0.0, 2.0, 4.0];
        let spec = LearnerSpec::svr_linear().with_c(10.0).with_epsilon(0.01);
        let m = train(&spec, x.view(), y.view()).unwrap();
        let p = m.predict(x.view()).unwrap();
        for (a, b) in p.iter().zip(y.iter()) {
            assert!((a - b).abs() < 0.05, "{a} vs {b}");
        }
        assert!(svr(&m).converged);
    }

    #[test]
    fn coefficients_within_box() {
        let x = array![[0.0, 1.0], [1.0, 0.0], [2.0, 2.0], [3.0, -1.0], [4.0, 0.5], [5.0, 1.5]];
        let y = array![0.0, 3.0, -1.0, 4.0, 0.5, 2.0];
        let spec = LearnerSpec::svr_rbf().with_c(0.5);
        let m = train(&spec, x.view(), y.view()).unwrap();
        for &a in &svr(&m).coef {
            assert!(a.abs() <= 0.5 + 1e-12);
        }
    }

    #[test]
    fn narrow_rbf_interpolates_training_points() {
        let x = array![[0.0], [1.0], [2.0], [3.0], [4.0]];
        let y = array![1.0, -2.0, 0.5, 3.0, -1.0];
        let spec = LearnerSpec::svr_rbf()
            .with_gamma(50.0)
            .with_c(100.0)
            .with_epsilon(0.05);
        let m = train(&spec, x.view(), y.view()).unwrap();
        let p = m.predict(x.view()).unwrap();
        for (a, b) in p.iter().zip(y.iter()) {
            assert!((a - b).abs() <= 0.05 + 1e-3, "{a} vs {b}");
        }
    }
}
