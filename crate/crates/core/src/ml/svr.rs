//! Epsilon-SVR with an RBF kernel, solved in the dual by SMO with
//! second-order working-set selection. One model per target hour; the
//! kernel matrix is shared.

use rayon::prelude::*;

use super::windows::WindowDataset;
use super::MlError;
use crate::data::HOURS_PER_DAY;

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvrParams {
    pub c: f64,
    pub epsilon: f64,
    pub gamma: f64,
    /// Stopping threshold on the maximal KKT violation.
    pub tol: f64,
}

impl SvrParams {
    pub fn new(c: f64, epsilon: f64, gamma: f64) -> Self {
        Self {
            c,
            epsilon,
            gamma,
            tol: 1e-3,
        }
    }
}

/// `1 / (n_features · var(X))` over every entry of the inputs, or 1 when the
/// inputs are constant.
pub fn default_gamma(data: &WindowDataset) -> f64 {
    let count = (data.len() * data.n_features()) as f64;
    let mean = data.inputs.iter().flatten().sum::<f64>() / count;
    let var = data.inputs.iter().flatten().map(|v| (v - mean).powi(2)).sum::<f64>() / count;
    if var > 0.0 {
        1.0 / (data.n_features() as f64 * var)
    } else {
        1.0
    }
}

pub fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d2).exp()
}

pub fn kernel_matrix(inputs: &[Vec<f64>], gamma: f64) -> Vec<Vec<f64>> {
    let n = inputs.len();
    let mut k = vec![vec![0.0; n]; n];
    for i in 0..n {
        k[i][i] = 1.0;
        for j in 0..i {
            let v = rbf(&inputs[i], &inputs[j], gamma);
            k[i][j] = v;
            k[j][i] = v;
        }
    }
    k
}

/// Dual objective in maximization form:
/// −½βᵀKβ − ε·Σ|β| + Σ y·β, over |β| ≤ C with Σβ = 0.
pub fn svr_dual_objective(kernel: &[Vec<f64>], y: &[f64], beta: &[f64], epsilon: f64) -> f64 {
    let mut quad = 0.0;
    for (i, row) in kernel.iter().enumerate() {
        for (j, k) in row.iter().enumerate() {
            quad += beta[i] * beta[j] * k;
        }
    }
    let lin: f64 = beta.iter().zip(y).map(|(b, t)| t * b - epsilon * b.abs()).sum();
    -0.5 * quad + lin
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    /// α − α* per sample.
    pub dual_coef: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
}

/// SMO over the 2n box-constrained variables (α, α*) with the equality
/// Σ(α − α*) = 0.
pub fn solve_svr_dual(
    kernel: &[Vec<f64>],
    y: &[f64],
    c: f64,
    epsilon: f64,
    tol: f64,
) -> Result<DualSolution, MlError> {
    let l = y.len();
    let m = 2 * l;
    let sign = |t: usize| if t < l { 1.0 } else { -1.0 };
    let base = |t: usize| if t < l { t } else { t - l };
    let q = |a: usize, b: usize| sign(a) * sign(b) * kernel[base(a)][base(b)];

    let mut alpha = vec![0.0; m];
    let mut grad: Vec<f64> = (0..m)
        .map(|t| if t < l { epsilon - y[t] } else { epsilon + y[t - l] })
        .collect();
    let at_upper = |a: f64| a >= c;
    let at_lower = |a: f64| a <= 0.0;

    let cap = 100 * l * l;
    let mut iterations = 0;
    loop {
        // first index: maximal violating
        let mut gmax = f64::NEG_INFINITY;
        let mut i = usize::MAX;
        for t in 0..m {
            if sign(t) > 0.0 {
                if !at_upper(alpha[t]) && -grad[t] >= gmax {
                    gmax = -grad[t];
                    i = t;
                }
            } else if !at_lower(alpha[t]) && grad[t] >= gmax {
                gmax = grad[t];
                i = t;
            }
        }
        // second index: largest second-order decrease
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut best_decrease = f64::INFINITY;
        for t in 0..m {
            let grad_diff = if sign(t) > 0.0 {
                if at_lower(alpha[t]) {
                    continue;
                }
                gmax2 = gmax2.max(grad[t]);
                gmax + grad[t]
            } else {
                if at_upper(alpha[t]) {
                    continue;
                }
                gmax2 = gmax2.max(-grad[t]);
                gmax - grad[t]
            };
            if grad_diff > 0.0 && i != usize::MAX {
                let bi = base(i);
                let bt = base(t);
                let mut quad = kernel[bi][bi] + kernel[bt][bt] - 2.0 * kernel[bi][bt];
                if quad <= 0.0 {
                    quad = TAU;
                }
                let decrease = -(grad_diff * grad_diff) / quad;
                if decrease <= best_decrease {
                    best_decrease = decrease;
                    j = t;
                }
            }
        }
        if gmax + gmax2 < tol || j == usize::MAX || i == usize::MAX {
            break;
        }
        if iterations >= cap {
            return Err(MlError::DidNotConverge { iterations });
        }
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        if sign(i) != sign(j) {
            let mut quad = q(i, i) + q(j, j) + 2.0 * q(i, j);
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let mut quad = q(i, i) + q(j, j) - 2.0 * q(i, j);
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..m {
            grad[t] += q(i, t) * di + q(j, t) * dj;
        }
    }

    // Bias from free variables, else the midpoint of the feasible interval.
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut sum_free, mut n_free) = (0.0, 0usize);
    for t in 0..m {
        let yg = sign(t) * grad[t];
        if at_upper(alpha[t]) {
            if sign(t) < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if at_lower(alpha[t]) {
            if sign(t) > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    let rho = if n_free > 0 {
        sum_free / n_free as f64
    } else {
        0.5 * (ub + lb)
    };
    Ok(DualSolution {
        dual_coef: (0..l).map(|k| alpha[k] - alpha[k + l]).collect(),
        bias: -rho,
        iterations,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvrHour {
    pub dual_coef: Vec<f64>,
    pub bias: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvrModel {
    pub support: Vec<Vec<f64>>,
    pub hours: Vec<SvrHour>,
    pub params: SvrParams,
}

impl SvrModel {
    pub fn predict(&self, input: &[f64]) -> [f64; HOURS_PER_DAY] {
        let k: Vec<f64> = self
            .support
            .iter()
            .map(|x| rbf(x, input, self.params.gamma))
            .collect();
        let mut out = [0.0; HOURS_PER_DAY];
        for (o, h) in out.iter_mut().zip(&self.hours) {
            *o = h.bias + h.dual_coef.iter().zip(&k).map(|(b, v)| b * v).sum::<f64>();
        }
        out
    }
}

pub fn svr_fit(data: &WindowDataset, params: SvrParams) -> Result<SvrModel, MlError> {
    if data.len() < 2 {
        return Err(MlError::TooFewSamples {
            needed: 2,
            got: data.len(),
        });
    }
    if !(params.c > 0.0 && params.epsilon >= 0.0 && params.gamma > 0.0) {
        return Err(MlError::InvalidParameter(format!(
            "need C > 0, epsilon ≥ 0, gamma > 0; got {params:?}"
        )));
    }
    let kernel = kernel_matrix(&data.inputs, params.gamma);
    let hours = (0..HOURS_PER_DAY)
        .into_par_iter()
        .map(|h| {
            let sol = solve_svr_dual(&kernel, &data.target_hour(h), params.c, params.epsilon, params.tol)?;
            Ok(SvrHour {
                dual_coef: sol.dual_coef,
                bias: sol.bias,
            })
        })
        .collect::<Result<Vec<_>, MlError>>()?;
    Ok(SvrModel {
        support: data.inputs.clone(),
        hours,
        params,
    })
}
