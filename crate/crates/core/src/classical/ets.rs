//! Additive-error exponential smoothing without seasonality: simple (SES),
//! Holt linear trend, and damped Holt, with selection by AICc.
//!
//! Smoothing weights are fitted by Nelder–Mead on the one-step-ahead SSE.
//! For fixed weights the one-step residuals are affine in the initial
//! states, so the initial level and trend are solved exactly by least
//! squares inside every objective evaluation.

use std::fmt;

use super::optim::NelderMead;
use super::ClassicalError;

pub const MIN_ETS_LENGTH: usize = 10;

const ALPHA_RANGE: (f64, f64) = (1e-4, 1.0 - 1e-4);
const BETA_RANGE: (f64, f64) = (1e-4, 1.0 - 1e-4);
const PHI_RANGE: (f64, f64) = (0.8, 0.99);
/// Start points per smoothing parameter, as fractions of its range.
const START_FRACTIONS: [f64; 3] = [0.1, 0.5, 0.9];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum EtsKind {
    Ses,
    Holt,
    DampedHolt,
}

impl EtsKind {
    pub const ALL: [EtsKind; 3] = [EtsKind::Ses, EtsKind::Holt, EtsKind::DampedHolt];

    fn n_smoothing(self) -> usize {
        match self {
            EtsKind::Ses => 1,
            EtsKind::Holt => 2,
            EtsKind::DampedHolt => 3,
        }
    }

    fn n_states(self) -> usize {
        match self {
            EtsKind::Ses => 1,
            _ => 2,
        }
    }

    /// Free parameters counted by AICc: smoothing weights plus initial states.
    pub fn n_params(self) -> usize {
        self.n_smoothing() + self.n_states()
    }
}

impl fmt::Display for EtsKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EtsKind::Ses => "SES",
            EtsKind::Holt => "Holt",
            EtsKind::DampedHolt => "DampedHolt",
        })
    }
}

/// A fitted model, holding the smoothing state after the last observation.
#[derive(Debug, Clone, PartialEq)]
pub struct EtsModel {
    pub kind: EtsKind,
    pub alpha: f64,
    pub beta: Option<f64>,
    pub phi: Option<f64>,
    pub level: f64,
    pub trend_state: Option<f64>,
    pub aicc: f64,
    pub sse: f64,
}

impl EtsModel {
    pub fn forecast(&self, horizon: usize) -> Vec<f64> {
        let b = self.trend_state.unwrap_or(0.0);
        let phi = self.phi.unwrap_or(1.0);
        let mut damp_sum = 0.0;
        let mut power = 1.0;
        (0..horizon)
            .map(|_| {
                power *= phi;
                damp_sum += power;
                self.level + damp_sum * b
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy)]
struct Weights {
    alpha: f64,
    beta: f64,
    phi: f64,
}

impl Weights {
    fn from_unconstrained(kind: EtsKind, u: &[f64]) -> Self {
        let squash = |v: f64, (lo, hi): (f64, f64)| lo + (hi - lo) / (1.0 + (-v).exp());
        Weights {
            alpha: squash(u[0], ALPHA_RANGE),
            beta: if kind == EtsKind::Ses {
                0.0
            } else {
                squash(u[1], BETA_RANGE)
            },
            phi: if kind == EtsKind::DampedHolt {
                squash(u[2], PHI_RANGE)
            } else {
                1.0
            },
        }
    }
}

fn logit_of_fraction(frac: f64) -> f64 {
    (frac / (1.0 - frac)).ln()
}

/// Runs the error-correction recursions; returns the one-step residuals
/// and the final (level, trend).
fn filter(
    y: &[f64],
    kind: EtsKind,
    w: Weights,
    level0: f64,
    trend0: f64,
    residuals: &mut Vec<f64>,
) -> (f64, f64) {
    residuals.clear();
    let (mut l, mut b) = (level0, if kind == EtsKind::Ses { 0.0 } else { trend0 });
    let ab = w.alpha * w.beta;
    for &obs in y {
        let damped = w.phi * b;
        let e = obs - (l + damped);
        residuals.push(e);
        l += damped + w.alpha * e;
        b = damped + ab * e;
    }
    (l, b)
}

/// Least-squares initial states for fixed weights.
fn initial_states(y: &[f64], kind: EtsKind, w: Weights, scratch: &mut [Vec<f64>; 3]) -> (f64, f64) {
    let zeros = vec![0.0; y.len()];
    let [base, dl, db] = scratch;
    filter(y, kind, w, 0.0, 0.0, base);
    // Residual sensitivities: responses of the homogeneous recursion.
    filter(&zeros, kind, w, 1.0, 0.0, dl);
    if kind == EtsKind::Ses {
        let sll: f64 = dl.iter().map(|v| v * v).sum();
        let sly: f64 = dl.iter().zip(base.iter()).map(|(a, e)| a * e).sum();
        let l0 = if sll > 0.0 { -sly / sll } else { y[0] };
        return (l0, 0.0);
    }
    filter(&zeros, kind, w, 0.0, 1.0, db);
    let (mut a11, mut a12, mut a22, mut r1, mut r2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..y.len() {
        a11 += dl[i] * dl[i];
        a12 += dl[i] * db[i];
        a22 += db[i] * db[i];
        r1 += dl[i] * base[i];
        r2 += db[i] * base[i];
    }
    let det = a11 * a22 - a12 * a12;
    if det > 1e-12 * a11 * a22 && det.is_finite() {
        ((-r1 * a22 + r2 * a12) / det, (-r2 * a11 + r1 * a12) / det)
    } else if a11 > 0.0 {
        (-r1 / a11, 0.0)
    } else {
        (y[0], 0.0)
    }
}

struct Fit {
    weights: Weights,
    level: f64,
    trend: f64,
    sse: f64,
}

fn fit_kind(y: &[f64], kind: EtsKind) -> Option<Fit> {
    let dim = kind.n_smoothing();
    let mut scratch: [Vec<f64>; 3] = Default::default();
    let mut residuals = Vec::with_capacity(y.len());
    let mut objective = |u: &[f64]| -> f64 {
        let w = Weights::from_unconstrained(kind, u);
        let (l0, b0) = initial_states(y, kind, w, &mut scratch);
        filter(y, kind, w, l0, b0, &mut residuals);
        residuals.iter().map(|e| e * e).sum()
    };

    // Full grid of start points, visited in a fixed order.
    let n_starts = START_FRACTIONS.len().pow(dim as u32);
    let nm = NelderMead::default();
    let mut best: Option<(Vec<f64>, f64)> = None;
    for s in 0..n_starts {
        let mut idx = s;
        let start: Vec<f64> = (0..dim)
            .map(|_| {
                let f = START_FRACTIONS[idx % START_FRACTIONS.len()];
                idx /= START_FRACTIONS.len();
                logit_of_fraction(f)
            })
            .collect();
        let m = nm.minimize(&start, &mut objective);
        if m.value.is_finite() && best.as_ref().map_or(true, |(_, v)| m.value < *v) {
            best = Some((m.x, m.value));
        }
    }
    let (u, _) = best?;
    let weights = Weights::from_unconstrained(kind, &u);
    let (l0, b0) = initial_states(y, kind, weights, &mut scratch);
    let (level, trend) = filter(y, kind, weights, l0, b0, &mut residuals);
    let sse: f64 = residuals.iter().map(|e| e * e).sum();
    sse.is_finite().then_some(Fit {
        weights,
        level,
        trend,
        sse,
    })
}

/// AICc = n·ln(SSE/n) + 2k·n/(n − k − 1).
pub fn aicc(sse: f64, n: usize, k: usize) -> f64 {
    let n_f = n as f64;
    n_f * (sse / n_f).ln() + 2.0 * k as f64 * n_f / (n_f - k as f64 - 1.0)
}

/// Fits SES, Holt and damped Holt and returns the one with the smallest AICc.
///
/// The series is centred on its mean before fitting, and SSE is floored at a
/// level far below any meaningful fit relative to the data scale, so that
/// exact fits compare equal and the tie-break (fewer parameters, then
/// SES < Holt < DampedHolt) applies.
pub fn ets_select_fit(series: &[f64]) -> Result<EtsModel, ClassicalError> {
    let n = series.len();
    if n < MIN_ETS_LENGTH {
        return Err(ClassicalError::SeriesTooShort {
            needed: MIN_ETS_LENGTH,
            got: n,
        });
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(ClassicalError::NonFinite);
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let centred: Vec<f64> = series.iter().map(|v| v - mean).collect();
    let scale = centred.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let sse_floor = n as f64 * (1e-10 * scale).powi(2);

    let mut chosen: Option<EtsModel> = None;
    for kind in EtsKind::ALL {
        let Some(fit) = fit_kind(&centred, kind) else {
            continue;
        };
        let sse = fit.sse.max(sse_floor);
        let score = aicc(sse, n, kind.n_params());
        if !score.is_finite() {
            continue;
        }
        let candidate = EtsModel {
            kind,
            alpha: fit.weights.alpha,
            beta: (kind != EtsKind::Ses).then_some(fit.weights.beta),
            phi: (kind == EtsKind::DampedHolt).then_some(fit.weights.phi),
            level: fit.level + mean,
            trend_state: (kind != EtsKind::Ses).then_some(fit.trend),
            aicc: score,
            sse: fit.sse,
        };
        // Kinds are visited in tie-break order, so only a strict improvement wins.
        if chosen.as_ref().map_or(true, |c| candidate.aicc < c.aicc) {
            chosen = Some(candidate);
        }
    }
    chosen.ok_or(ClassicalError::OptimizationFailed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn constant_series_forecasts_constant() {
        let m = ets_select_fit(&[12.5; 40]).unwrap();
        assert_eq!(m.kind, EtsKind::Ses);
        for v in m.forecast(48) {
            assert!((v - 12.5).abs() < 1e-9);
        }
    }

    #[test]
    fn ramp_selects_trend_and_continues_it() {
        let y: Vec<f64> = (0..100).map(|t| 2.0 * t as f64).collect();
        let m = ets_select_fit(&y).unwrap();
        assert!(
            m.kind == EtsKind::Holt || (m.kind == EtsKind::DampedHolt && m.phi.unwrap() > 0.98),
            "{m:?}"
        );
        // Closed-form continuation of the ramp.
        for (h, v) in m.forecast(24).iter().enumerate() {
            let want = 2.0 * (100 + h) as f64;
            assert!(((v - want) / want).abs() < 0.01, "h={h}: {v} vs {want}");
        }
    }

    #[test]
    fn white_noise_prefers_ses() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let trials = 200;
        let mut ses = 0;
        for _ in 0..trials {
            let y: Vec<f64> = (0..100)
                .map(|_| { let z: f64 = StandardNormal.sample(&mut rng); 10.0 + z })
                .collect();
            if ets_select_fit(&y).unwrap().kind == EtsKind::Ses {
                ses += 1;
            }
        }
        assert!(ses as f64 >= 0.9 * trials as f64, "SES chosen {ses}/{trials}");
    }

    #[test]
    fn holt_recursion_matches_manual_update() {
        let w = Weights {
            alpha: 0.3,
            beta: 0.2,
            phi: 1.0,
        };
        let y = [1.0, 2.5, 2.0];
        let mut res = Vec::new();
        let (l, b) = filter(&y, EtsKind::Holt, w, 1.0, 0.5, &mut res);
        // manual
        let (mut ml, mut mb) = (1.0, 0.5);
        for &o in &y {
            let e: f64 = o - (ml + mb);
            let nl = ml + mb + 0.3 * e;
            mb += 0.3 * 0.2 * e;
            ml = nl;
        }
        assert!((l - ml).abs() < 1e-14 && (b - mb).abs() < 1e-14);
    }

    #[test]
    fn least_squares_initial_states_are_optimal() {
        let y: Vec<f64> = (0..30).map(|t| (t as f64 * 0.7).sin() * 3.0 + t as f64 * 0.1).collect();
        let w = Weights {
            alpha: 0.4,
            beta: 0.1,
            phi: 0.9,
        };
        let mut scratch: [Vec<f64>; 3] = Default::default();
        let (l0, b0) = initial_states(&y, EtsKind::DampedHolt, w, &mut scratch);
        let sse = |l: f64, b: f64| {
            let mut r = Vec::new();
            filter(&y, EtsKind::DampedHolt, w, l, b, &mut r);
            r.iter().map(|e| e * e).sum::<f64>()
        };
        let best = sse(l0, b0);
        for (dl, db) in [(1e-3, 0.0), (-1e-3, 0.0), (0.0, 1e-3), (0.0, -1e-3)] {
            assert!(sse(l0 + dl, b0 + db) >= best);
        }
    }

    #[test]
    fn deterministic() {
        let y: Vec<f64> = (0..60).map(|t| ((t * 7919) % 13) as f64).collect();
        assert_eq!(ets_select_fit(&y).unwrap(), ets_select_fit(&y).unwrap());
    }

    #[test]
    fn too_short() {
        assert!(matches!(
            ets_select_fit(&[1.0; 9]),
            Err(ClassicalError::SeriesTooShort { .. })
        ));
    }

    #[test]
    fn aicc_formula() {
        let v = aicc(50.0, 100, 2);
        let want = 100.0 * (0.5f64).ln() + 4.0 * 100.0 / 97.0;
        assert!((v - want).abs() < 1e-12);
    }
}
