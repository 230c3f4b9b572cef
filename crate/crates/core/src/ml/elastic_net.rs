//! Elastic net regression by cyclic coordinate descent, one independent
//! model per delivery hour, with time-ordered cross-validation.
//!
//! Objective per target: (1/2n)·‖y − Xw − b‖² + α·(ρ‖w‖₁ + (1−ρ)/2·‖w‖²).
//! The intercept is unpenalized, so the solver works on centred data and
//! recovers `b = ȳ − x̄·w` afterwards.

use rayon::prelude::*;

use super::windows::WindowDataset;
use super::MlError;
use crate::data::HOURS_PER_DAY;

pub const L1_RATIO_GRID: [f64; 7] = [0.1, 0.5, 0.7, 0.9, 0.95, 0.99, 1.0];
pub const N_ALPHAS: usize = 100;
/// Decades spanned by the alpha path below alpha_max.
pub const ALPHA_DECADES: f64 = 4.0;
pub const CV_FOLDS: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordinateDescent {
    /// Convergence threshold on the largest coordinate change in a sweep.
    pub tol: f64,
    pub max_sweeps: usize,
}

impl Default for CoordinateDescent {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_sweeps: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElasticNetModel {
    /// One weight vector per target hour.
    pub weights: Vec<Vec<f64>>,
    pub intercepts: Vec<f64>,
    pub alpha: f64,
    pub l1_ratio: f64,
}

impl ElasticNetModel {
    pub fn predict(&self, input: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.intercepts)
            .map(|(w, b)| b + dot(w, input))
            .collect()
    }
}

/// Fit for a single target column.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearFit {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub sweeps: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    // four partial sums so the loop vectorizes
    let mut acc = [0.0; 4];
    let split = a.len().min(b.len()) / 4 * 4;
    for (x, y) in a[..split].chunks_exact(4).zip(b[..split].chunks_exact(4)) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    let tail: f64 = a[split..].iter().zip(&b[split..]).map(|(x, y)| x * y).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

fn penalty(w: &[f64], alpha: f64, l1_ratio: f64) -> f64 {
    let l1: f64 = w.iter().map(|v| v.abs()).sum();
    let l2: f64 = w.iter().map(|v| v * v).sum();
    alpha * (l1_ratio * l1 + 0.5 * (1.0 - l1_ratio) * l2)
}

/// Objective value for the given coefficients on uncentred data.
pub fn elastic_net_objective(
    inputs: &[Vec<f64>],
    y: &[f64],
    weights: &[f64],
    intercept: f64,
    alpha: f64,
    l1_ratio: f64,
) -> f64 {
    let n = y.len() as f64;
    let rss: f64 = inputs
        .iter()
        .zip(y)
        .map(|(x, t)| (t - intercept - dot(weights, x)).powi(2))
        .sum();
    rss / (2.0 * n) + penalty(weights, alpha, l1_ratio)
}

/// Column-major centred design.
#[derive(Debug, Clone)]
struct Design {
    n: usize,
    cols: Vec<Vec<f64>>,
    col_sq: Vec<f64>,
    means: Vec<f64>,
    /// XᵀX of the centred columns.
    gram: Vec<Vec<f64>>,
}

impl Design {
    fn new(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        let mut cols = vec![Vec::with_capacity(n); p];
        let mut means = vec![0.0; p];
        for j in 0..p {
            let m = rows.iter().map(|r| r[j]).sum::<f64>() / n as f64;
            means[j] = m;
            cols[j].extend(rows.iter().map(|r| r[j] - m));
        }
        let mut gram = vec![vec![0.0; p]; p];
        for a in 0..p {
            for b in 0..=a {
                let v = dot(&cols[a], &cols[b]);
                gram[a][b] = v;
                gram[b][a] = v;
            }
        }
        let col_sq = (0..p).map(|j| gram[j][j]).collect();
        Self {
            n,
            cols,
            col_sq,
            means,
            gram,
        }
    }

    fn p(&self) -> usize {
        self.cols.len()
    }
}

fn check_params(alpha: f64, l1_ratio: f64) -> Result<(), MlError> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(MlError::InvalidParameter(format!("alpha must be ≥ 0, got {alpha}")));
    }
    if !(0.0..=1.0).contains(&l1_ratio) {
        return Err(MlError::InvalidParameter(format!(
            "l1_ratio must lie in [0, 1], got {l1_ratio}"
        )));
    }
    Ok(())
}

/// Coordinate descent on centred data, updating `w` and the residual in
/// place. Returns the number of sweeps, or `None` if the cap was hit.
///
/// After each full sweep the nonzero coordinates are cycled alone until
/// they settle; convergence is only declared by a full sweep whose largest
/// coordinate change is below `tol`.
#[allow(clippy::too_many_arguments)]
fn descend(
    design: &Design,
    yc: &[f64],
    alpha: f64,
    l1_ratio: f64,
    w: &mut [f64],
    residual: &mut [f64],
    cd: CoordinateDescent,
    mut trace: Option<&mut Vec<f64>>,
) -> Option<usize> {
    let n = design.n as f64;
    residual.copy_from_slice(yc);
    for (j, col) in design.cols.iter().enumerate() {
        if w[j] != 0.0 {
            for (r, x) in residual.iter_mut().zip(col) {
                *r -= w[j] * x;
            }
        }
    }
    let l1_thresh = n * alpha * l1_ratio;
    let l2_shrink = n * alpha * (1.0 - l1_ratio);
    let update = |j: usize, w: &mut [f64], residual: &mut [f64]| -> f64 {
        let col = &design.cols[j];
        let sq = design.col_sq[j];
        let old = w[j];
        let denom = sq + l2_shrink;
        let new = if denom > 0.0 {
            soft_threshold(dot(col, residual) + sq * old, l1_thresh) / denom
        } else {
            0.0
        };
        if new == old {
            return 0.0;
        }
        let delta = new - old;
        for (r, x) in residual.iter_mut().zip(col) {
            *r -= delta * x;
        }
        w[j] = new;
        delta.abs()
    };
    let mut record = |w: &[f64], residual: &[f64]| {
        if let Some(t) = trace.as_deref_mut() {
            t.push(dot(residual, residual) / (2.0 * n) + penalty(w, alpha, l1_ratio));
        }
    };

    let mut sweeps = 0;
    let mut active = Vec::with_capacity(design.p());
    while sweeps < cd.max_sweeps {
        let mut max_step = 0.0f64;
        for j in 0..design.p() {
            max_step = max_step.max(update(j, w, residual));
        }
        sweeps += 1;
        record(w, residual);
        if max_step < cd.tol {
            return Some(sweeps);
        }
        active.clear();
        active.extend((0..design.p()).filter(|&j| w[j] != 0.0));
        let mut inner = 0;
        while sweeps < cd.max_sweeps {
            let mut max_step = 0.0f64;
            for &j in &active {
                max_step = max_step.max(update(j, w, residual));
            }
            sweeps += 1;
            inner += 1;
            if max_step >= cd.tol && inner % FACE_STEP_EVERY == 0 {
                face_step(design, yc, alpha, l1_ratio, &active, w, residual);
            }
            record(w, residual);
            if max_step < cd.tol {
                break;
            }
        }
    }
    None
}

/// Inner sweeps between attempts at an exact step on the current sign face.
const FACE_STEP_EVERY: usize = 5;

/// With the signs of the nonzero coordinates fixed, the objective is a
/// smooth quadratic whose minimizer solves
/// (X_FᵀX_F + λ₂I)·w = X_Fᵀy − λ₁·sign(w) on the face F. Moves towards that
/// minimizer; when a coordinate would change sign it stops there, drops the
/// coordinate from the face and solves again. Every segment lowers the
/// objective, and the result is kept only if it does.
#[allow(clippy::too_many_arguments)]
fn face_step(
    design: &Design,
    yc: &[f64],
    alpha: f64,
    l1_ratio: f64,
    active: &[usize],
    w: &mut [f64],
    residual: &mut [f64],
) {
    let n = design.n as f64;
    let l1 = n * alpha * l1_ratio;
    let l2 = n * alpha * (1.0 - l1_ratio);
    let xty: Vec<f64> = design.cols.iter().map(|c| dot(c, yc)).collect();
    let mut face: Vec<usize> = active.iter().copied().filter(|&j| w[j] != 0.0).collect();
    let mut w_new = w.to_vec();
    let max_rounds = face.len() + 1;
    for _ in 0..max_rounds {
        let k = face.len();
        if k == 0 {
            break;
        }
        let mut gram = vec![vec![0.0; k]; k];
        let mut rhs = vec![0.0; k];
        for (a, &ja) in face.iter().enumerate() {
            for (b, &jb) in face.iter().enumerate() {
                gram[a][b] = design.gram[ja][jb];
            }
            gram[a][a] += l2;
            rhs[a] = xty[ja] - l1 * w_new[ja].signum();
        }
        // A singular face (pure l1 with more nonzeros than samples) gets a
        // tiny ridge; the result is still only accepted if it descends.
        let Some(target) = solve_spd(gram.clone(), rhs.clone()).or_else(|| {
            let scale = (0..k).map(|i| gram[i][i]).fold(0.0f64, f64::max);
            for (i, row) in gram.iter_mut().enumerate() {
                row[i] += 1e-9 * scale;
            }
            solve_spd(gram, rhs)
        }) else {
            break;
        };
        let mut t = 1.0f64;
        let mut blocking = None;
        for (a, &j) in face.iter().enumerate() {
            if target[a] == 0.0 || target[a].signum() != w_new[j].signum() {
                let cross = w_new[j] / (w_new[j] - target[a]);
                if cross < t {
                    t = cross;
                    blocking = Some(a);
                }
            }
        }
        for (a, &j) in face.iter().enumerate() {
            w_new[j] += t * (target[a] - w_new[j]);
        }
        match blocking {
            None => break,
            Some(a) => {
                w_new[face[a]] = 0.0;
                face.remove(a);
            }
        }
    }
    let mut candidate = yc.to_vec();
    for (j, col) in design.cols.iter().enumerate() {
        if w_new[j] != 0.0 {
            for (r, x) in candidate.iter_mut().zip(col) {
                *r -= w_new[j] * x;
            }
        }
    }
    let current = dot(residual, residual) / (2.0 * n) + penalty(w, alpha, l1_ratio);
    let proposed = dot(&candidate, &candidate) / (2.0 * n) + penalty(&w_new, alpha, l1_ratio);
    if proposed < current {
        w.copy_from_slice(&w_new);
        residual.copy_from_slice(&candidate);
    }
}

/// Cholesky solve; `None` if the matrix is not numerically positive definite.
fn solve_spd(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let k = a.len();
    let scale = (0..k).map(|i| a[i][i]).fold(0.0f64, f64::max);
    for i in 0..k {
        for j in 0..i {
            let s = dot(&a[i][..j], &a[j][..j]);
            a[i][j] = (a[i][j] - s) / a[j][j];
        }
        let d = a[i][i] - dot(&a[i][..i], &a[i][..i]);
        if !(d > 1e-13 * scale) {
            return None;
        }
        a[i][i] = d.sqrt();
    }
    for i in 0..k {
        let s = dot(&a[i][..i], &b[..i]);
        b[i] = (b[i] - s) / a[i][i];
    }
    for i in (0..k).rev() {
        let s: f64 = (i + 1..k).map(|j| a[j][i] * b[j]).sum();
        b[i] = (b[i] - s) / a[i][i];
    }
    Some(b)
}

fn fit_column(
    design: &Design,
    y: &[f64],
    alpha: f64,
    l1_ratio: f64,
    cd: CoordinateDescent,
    trace: Option<&mut Vec<f64>>,
) -> Result<LinearFit, MlError> {
    let y_mean = y.iter().sum::<f64>() / y.len() as f64;
    let yc: Vec<f64> = y.iter().map(|v| v - y_mean).collect();
    let mut w = vec![0.0; design.p()];
    let mut residual = vec![0.0; design.n];
    let sweeps = descend(design, &yc, alpha, l1_ratio, &mut w, &mut residual, cd, trace)
        .ok_or(MlError::DidNotConverge {
            iterations: cd.max_sweeps,
        })?;
    let intercept = y_mean - dot(&design.means, &w);
    Ok(LinearFit {
        weights: w,
        intercept,
        sweeps,
    })
}

fn check_rows(inputs: &[Vec<f64>], n_targets: usize) -> Result<(), MlError> {
    if inputs.is_empty() {
        return Err(MlError::EmptyTraining);
    }
    if inputs.len() != n_targets {
        return Err(MlError::DimensionMismatch(format!(
            "{} input rows but {n_targets} targets",
            inputs.len()
        )));
    }
    let p = inputs[0].len();
    if inputs.iter().any(|r| r.len() != p) {
        return Err(MlError::DimensionMismatch("ragged input rows".into()));
    }
    Ok(())
}

/// Single-target elastic net with an unpenalized intercept.
pub fn fit_single_target(
    inputs: &[Vec<f64>],
    y: &[f64],
    alpha: f64,
    l1_ratio: f64,
    cd: CoordinateDescent,
) -> Result<LinearFit, MlError> {
    check_params(alpha, l1_ratio)?;
    check_rows(inputs, y.len())?;
    fit_column(&Design::new(inputs), y, alpha, l1_ratio, cd, None)
}

/// As [`fit_single_target`], also recording the objective after every sweep.
pub fn fit_single_target_traced(
    inputs: &[Vec<f64>],
    y: &[f64],
    alpha: f64,
    l1_ratio: f64,
    cd: CoordinateDescent,
    trace: &mut Vec<f64>,
) -> Result<LinearFit, MlError> {
    check_params(alpha, l1_ratio)?;
    check_rows(inputs, y.len())?;
    fit_column(&Design::new(inputs), y, alpha, l1_ratio, cd, Some(trace))
}

/// Fits one model per target hour with fixed penalty.
pub fn elasticnet_fit(
    data: &WindowDataset,
    alpha: f64,
    l1_ratio: f64,
) -> Result<ElasticNetModel, MlError> {
    check_params(alpha, l1_ratio)?;
    check_rows(&data.inputs, data.targets.len())?;
    let design = Design::new(&data.inputs);
    let fits = (0..HOURS_PER_DAY)
        .into_par_iter()
        .map(|h| {
            fit_column(
                &design,
                &data.target_hour(h),
                alpha,
                l1_ratio,
                CoordinateDescent::default(),
                None,
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(assemble(fits, alpha, l1_ratio))
}

fn assemble(fits: Vec<LinearFit>, alpha: f64, l1_ratio: f64) -> ElasticNetModel {
    let (weights, intercepts) = fits.into_iter().map(|f| (f.weights, f.intercept)).unzip();
    ElasticNetModel {
        weights,
        intercepts,
        alpha,
        l1_ratio,
    }
}

/// Smallest alpha giving all-zero weights for every hour at this l1 ratio:
/// max over hours of ‖Xᵀ(y − ȳ)‖∞ / (n·ρ), with X centred.
pub fn alpha_max(data: &WindowDataset, l1_ratio: f64) -> f64 {
    let design = Design::new(&data.inputs);
    let n = design.n as f64;
    let mut best = 0.0f64;
    for h in 0..HOURS_PER_DAY {
        let y = data.target_hour(h);
        let mean = y.iter().sum::<f64>() / n;
        let yc: Vec<f64> = y.iter().map(|v| v - mean).collect();
        for col in &design.cols {
            best = best.max(dot(col, &yc).abs());
        }
    }
    best / (n * l1_ratio)
}

/// Log-spaced path from `alpha_max` down `ALPHA_DECADES` decades.
pub fn alpha_path(alpha_max: f64) -> Vec<f64> {
    let top = if alpha_max > 0.0 { alpha_max } else { f64::EPSILON };
    (0..N_ALPHAS)
        .map(|i| top * 10f64.powf(-ALPHA_DECADES * i as f64 / (N_ALPHAS - 1) as f64))
        .collect()
}

/// Cross-validation surface and the model refitted at its minimum.
#[derive(Debug, Clone)]
pub struct CvOutcome {
    pub model: ElasticNetModel,
    /// Alpha path per entry of [`L1_RATIO_GRID`].
    pub alphas: Vec<Vec<f64>>,
    /// Mean validation MSE over folds and hours; `+∞` where a fit failed
    /// to converge.
    pub scores: Vec<Vec<f64>>,
    pub best: (usize, usize),
}

/// Validation MSE summed over hours for one fold and one l1 ratio, at every
/// alpha on the path. Warm-starts down the path.
fn fold_path_errors(
    train: &WindowDataset,
    validate_input: &[f64],
    validate_target: &[f64; HOURS_PER_DAY],
    alphas: &[f64],
    l1_ratio: f64,
) -> Vec<f64> {
    let design = Design::new(&train.inputs);
    let per_hour: Vec<Vec<f64>> = (0..HOURS_PER_DAY)
        .into_par_iter()
        .map(|h| {
            let y = train.target_hour(h);
            let y_mean = y.iter().sum::<f64>() / y.len() as f64;
            let yc: Vec<f64> = y.iter().map(|v| v - y_mean).collect();
            let mut w = vec![0.0; design.p()];
            let mut residual = vec![0.0; design.n];
            let mut converged = true;
            alphas
                .iter()
                .map(|&alpha| {
                    // Once a point fails, later (smaller) alphas are not trusted either.
                    converged = converged
                        && descend(
                            &design,
                            &yc,
                            alpha,
                            l1_ratio,
                            &mut w,
                            &mut residual,
                            CoordinateDescent::default(),
                            None,
                        )
                        .is_some();
                    if !converged {
                        return f64::INFINITY;
                    }
                    let intercept = y_mean - dot(&design.means, &w);
                    (validate_target[h] - intercept - dot(&w, validate_input)).powi(2)
                })
                .collect()
        })
        .collect();
    (0..alphas.len())
        .map(|a| per_hour.iter().map(|e| e[a]).sum())
        .collect()
}

/// Selects (alpha, l1 ratio) on the last `CV_FOLDS` samples, each validated
/// by a model trained on all strictly earlier samples, then refits on all
/// samples. One pair is shared by the 24 hourly models.
pub fn elasticnet_cv(data: &WindowDataset) -> Result<CvOutcome, MlError> {
    check_rows(&data.inputs, data.targets.len())?;
    let n = data.len();
    if n < 2 * CV_FOLDS {
        return Err(MlError::TooFewSamples {
            needed: 2 * CV_FOLDS,
            got: n,
        });
    }
    let alphas: Vec<Vec<f64>> = L1_RATIO_GRID
        .iter()
        .map(|&r| alpha_path(alpha_max(data, r)))
        .collect();

    let tasks: Vec<(usize, usize)> = (0..L1_RATIO_GRID.len())
        .flat_map(|r| (0..CV_FOLDS).map(move |f| (r, f)))
        .collect();
    let errors: Vec<Vec<f64>> = tasks
        .par_iter()
        .map(|&(r, fold)| {
            let split = n - CV_FOLDS + fold;
            fold_path_errors(
                &data.head(split),
                &data.inputs[split],
                &data.targets[split],
                &alphas[r],
                L1_RATIO_GRID[r],
            )
        })
        .collect();

    let denom = (CV_FOLDS * HOURS_PER_DAY) as f64;
    let mut scores = vec![vec![0.0; N_ALPHAS]; L1_RATIO_GRID.len()];
    for (&(r, _), e) in tasks.iter().zip(&errors) {
        for (s, v) in scores[r].iter_mut().zip(e) {
            *s += v / denom;
        }
    }

    let mut best: Option<(usize, usize)> = None;
    for (r, row) in scores.iter().enumerate() {
        for (a, &s) in row.iter().enumerate() {
            if s.is_finite() && best.map_or(true, |(br, ba)| s < scores[br][ba]) {
                best = Some((r, a));
            }
        }
    }
    let (r, a) = best.ok_or(MlError::DidNotConverge {
        iterations: CoordinateDescent::default().max_sweeps,
    })?;

    let model = refit_on_path(data, &alphas[r][..=a], L1_RATIO_GRID[r])?;
    Ok(CvOutcome {
        model,
        alphas,
        scores,
        best: (r, a),
    })
}

/// Refit on all samples, warm-starting down the path to its last alpha.
fn refit_on_path(
    data: &WindowDataset,
    path: &[f64],
    l1_ratio: f64,
) -> Result<ElasticNetModel, MlError> {
    let design = Design::new(&data.inputs);
    let cd = CoordinateDescent::default();
    let fits = (0..HOURS_PER_DAY)
        .into_par_iter()
        .map(|h| {
            let y = data.target_hour(h);
            let y_mean = y.iter().sum::<f64>() / y.len() as f64;
            let yc: Vec<f64> = y.iter().map(|v| v - y_mean).collect();
            let mut w = vec![0.0; design.p()];
            let mut residual = vec![0.0; design.n];
            let mut sweeps = 0;
            for &alpha in path {
                sweeps = descend(&design, &yc, alpha, l1_ratio, &mut w, &mut residual, cd, None)
                    .ok_or(MlError::DidNotConverge {
                        iterations: cd.max_sweeps,
                    })?;
            }
            Ok(LinearFit {
                intercept: y_mean - dot(&design.means, &w),
                weights: w,
                sweeps,
            })
        })
        .collect::<Result<Vec<_>, MlError>>()?;
    Ok(assemble(fits, *path.last().expect("non-empty path"), l1_ratio))
}

pub fn elasticnet_cv_select(data: &WindowDataset) -> Result<ElasticNetModel, MlError> {
    elasticnet_cv(data).map(|o| o.model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_feature_single_sample_closed_form() {
        // One sample: centring removes everything, w = 0 and b = y.
        let f = fit_single_target(&[vec![2.0]], &[3.0], 0.1, 0.5, Default::default()).unwrap();
        assert_eq!(f.weights, vec![0.0]);
        assert_eq!(f.intercept, 3.0);
    }

    #[test]
    fn single_feature_matches_soft_threshold_formula() {
        let x = vec![vec![1.0], vec![-1.0], vec![3.0], vec![0.5]];
        let y = [2.0, -1.0, 4.0, 1.5];
        let (alpha, rho) = (0.3, 0.7);
        let f = fit_single_target(&x, &y, alpha, rho, Default::default()).unwrap();
        let n = 4.0;
        let xm = (1.0 - 1.0 + 3.0 + 0.5) / n;
        let ym = (2.0 - 1.0 + 4.0 + 1.5) / n;
        let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a[0] - xm) * (b - ym)).sum();
        let sxx: f64 = x.iter().map(|a| (a[0] - xm).powi(2)).sum();
        let w = soft_threshold(sxy, n * alpha * rho) / (sxx + n * alpha * (1.0 - rho));
        assert!((f.weights[0] - w).abs() < 1e-10);
        assert!((f.intercept - (ym - xm * w)).abs() < 1e-10);
    }

    #[test]
    fn alpha_zero_recovers_exact_relation() {
        let x = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]];
        let y: Vec<f64> = x.iter().map(|r| 0.5 + 2.0 * r[0] - 3.0 * r[1]).collect();
        let f = fit_single_target(&x, &y, 0.0, 0.5, Default::default()).unwrap();
        assert!((f.weights[0] - 2.0).abs() < 1e-6);
        assert!((f.weights[1] + 3.0).abs() < 1e-6);
        assert!((f.intercept - 0.5).abs() < 1e-6);
    }

    #[test]
    fn large_alpha_zeroes_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x: Vec<Vec<f64>> = (0..10).map(|_| (0..4).map(|_| rng.gen()).collect()).collect();
        let y: Vec<f64> = (0..10).map(|_| rng.gen()).collect();
        let ym = y.iter().sum::<f64>() / 10.0;
        let d = Design::new(&x);
        let yc: Vec<f64> = y.iter().map(|v| v - ym).collect();
        let amax = d.cols.iter().map(|c| dot(c, &yc).abs()).fold(0.0, f64::max) / 10.0;
        let f = fit_single_target(&x, &y, amax, 1.0, Default::default()).unwrap();
        assert!(f.weights.iter().all(|&w| w == 0.0));
        assert!((f.intercept - ym).abs() < 1e-12);
    }

    #[test]
    fn objective_never_increases_across_sweeps() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x: Vec<Vec<f64>> = (0..20).map(|_| (0..30).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let y: Vec<f64> = x.iter().map(|r| r[0] - 2.0 * r[3] + rng.gen_range(-0.1..0.1)).collect();
        let mut trace = Vec::new();
        fit_single_target_traced(&x, &y, 0.01, 0.5, Default::default(), &mut trace).unwrap();
        assert!(trace.len() > 1);
        for pair in trace.windows(2) {
            assert!(pair[1] <= pair[0] * (1.0 + 1e-12), "{} -> {}", pair[0], pair[1]);
        }
    }

    #[test]
    fn path_is_logarithmic() {
        let p = alpha_path(2.0);
        assert_eq!(p.len(), 100);
        assert_eq!(p[0], 2.0);
        assert!((p[99] - 2e-4).abs() < 1e-15);
    }

    fn sparse_data(n_days: usize, noise: f64, seed: u64) -> WindowDataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values: Vec<f64> = (0..n_days * 24).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut data = WindowDataset::from_values(
            &values,
            NaiveDate::from_ymd_opt(2024, 1, 1).unwrap(),
            168,
        )
        .unwrap();
        // targets follow a sparse rule on the inputs
        for (x, t) in data.inputs.iter().zip(data.targets.iter_mut()) {
            for (h, v) in t.iter_mut().enumerate() {
                *v = 0.8 * x[144 + h] - 0.3 * x[h] + noise * rng.gen_range(-1.0..1.0);
            }
        }
        data
    }

    #[test]
    fn cv_beats_null_model() {
        let data = sparse_data(35, 0.2, 1);
        let out = elasticnet_cv(&data).unwrap();
        let (r, a) = out.best;
        assert!(out.scores[r][a] <= out.scores[r][0]);
        for row in &out.scores {
            assert!(out.scores[r][a] <= row[0]);
        }
    }

    #[test]
    fn cv_fold_structure() {
        // With 77 samples the folds validate on samples 71..=77 (1-based).
        let n = 77;
        let splits: Vec<usize> = (0..CV_FOLDS).map(|f| n - CV_FOLDS + f).collect();
        assert_eq!(splits, vec![70, 71, 72, 73, 74, 75, 76]);
    }

    #[test]
    fn noiseless_data_selects_small_alpha() {
        let data = sparse_data(40, 0.0, 6);
        let out = elasticnet_cv(&data).unwrap();
        let (r, a) = out.best;
        // smallest decade of the path
        assert!(out.alphas[r][a] <= out.alphas[r][0] * 1e-3, "alpha index {a}");
        let mut mse = 0.0;
        for (x, t) in data.inputs.iter().zip(&data.targets) {
            let p = out.model.predict(x);
            mse += p.iter().zip(t).map(|(u, v)| (u - v).powi(2)).sum::<f64>();
        }
        mse /= (data.len() * 24) as f64;
        assert!(mse < 1e-6, "fit mse {mse}");
    }

    #[test]
    fn too_few_samples() {
        let data = sparse_data(20, 0.0, 2);
        assert!(matches!(
            elasticnet_cv(&data),
            Err(MlError::TooFewSamples { needed: 14, got: 13 })
        ));
    }
}
