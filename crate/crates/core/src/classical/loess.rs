//! Degree-1 loess with tricube weights on an integer design `0..n`, following
//! the neighbourhood and weighting rules of the classic STL Fortran code.

/// Local linear fit at position `xs` using data points `left..=right`.
///
/// `window` is the nominal neighbourhood size; when it exceeds the data
/// length the bandwidth is widened by `(window - n) / 2`. Returns `None`
/// when every weight vanishes.
pub(crate) fn local_fit(
    y: &[f64],
    window: usize,
    xs: f64,
    left: usize,
    right: usize,
    robustness: Option<&[f64]>,
    weights: &mut [f64],
) -> Option<f64> {
    let n = y.len();
    let range = n as f64 - 1.0;
    let mut h = (xs - left as f64).max(right as f64 - xs);
    if window > n {
        h += ((window - n) / 2) as f64;
    }
    let h9 = 0.999 * h;
    let h1 = 0.001 * h;

    let mut total = 0.0;
    for j in left..=right {
        let r = (j as f64 - xs).abs();
        let mut w = 0.0;
        if r <= h9 {
            w = if r <= h1 {
                1.0
            } else {
                let u = r / h;
                let t = 1.0 - u * u * u;
                t * t * t
            };
            if let Some(rw) = robustness {
                w *= rw[j];
            }
        }
        weights[j] = w;
        total += w;
    }
    if total <= 0.0 {
        return None;
    }
    for w in &mut weights[left..=right] {
        *w /= total;
    }

    if h > 0.0 {
        let centre: f64 = (left..=right).map(|j| weights[j] * j as f64).sum();
        let spread: f64 = (left..=right)
            .map(|j| weights[j] * (j as f64 - centre).powi(2))
            .sum();
        if spread.sqrt() > 0.001 * range {
            let slope = (xs - centre) / spread;
            for j in left..=right {
                weights[j] *= slope * (j as f64 - centre) + 1.0;
            }
        }
    }
    Some((left..=right).map(|j| weights[j] * y[j]).sum())
}

/// Loess smooth of `y` evaluated at every index.
pub(crate) fn smooth(y: &[f64], window: usize, robustness: Option<&[f64]>) -> Vec<f64> {
    let n = y.len();
    let mut out = vec![0.0; n];
    if n == 0 {
        return out;
    }
    if n < 2 {
        out.copy_from_slice(y);
        return out;
    }
    let mut weights = vec![0.0; n];
    let half = (window + 1) / 2;
    for i in 0..n {
        let (left, right) = if window >= n {
            (0, n - 1)
        } else if i + 1 < half {
            (0, window - 1)
        } else if i + half >= n {
            (n - window, n - 1)
        } else {
            let left = i + 1 - half;
            (left, left + window - 1)
        };
        out[i] = local_fit(y, window, i as f64, left, right, robustness, &mut weights).unwrap_or(y[i]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_lines_exactly() {
        let y: Vec<f64> = (0..50).map(|i| 3.0 - 0.25 * i as f64).collect();
        for window in [3, 7, 13, 49, 51, 101] {
            let s = smooth(&y, window, None);
            for (a, b) in s.iter().zip(&y) {
                assert!((a - b).abs() < 1e-10, "window {window}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn extrapolates_lines_beyond_edges() {
        let y: Vec<f64> = (0..10).map(|i| 2.0 * i as f64 + 1.0).collect();
        let mut w = vec![0.0; y.len()];
        let before = local_fit(&y, 7, -1.0, 0, 6, None, &mut w).unwrap();
        let after = local_fit(&y, 7, 10.0, 3, 9, None, &mut w).unwrap();
        assert!((before + 1.0).abs() < 1e-10);
        assert!((after - 21.0).abs() < 1e-10);
    }

    #[test]
    fn zero_robustness_weights_fall_back_to_data() {
        let y = vec![1.0, 5.0, 2.0, 8.0];
        let rw = vec![0.0; 4];
        assert_eq!(smooth(&y, 3, Some(&rw)), y);
    }
}
