use super::windows::WindowDataset;
use super::MlError;
use crate::data::HOURS_PER_DAY;

pub const DEFAULT_K: usize = 5;

/// Nearest-neighbour regression over stored windows.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel {
    pub stored: WindowDataset,
    pub k: usize,
}

impl KnnModel {
    pub fn fit(stored: WindowDataset, k: usize) -> Result<Self, MlError> {
        if stored.is_empty() {
            return Err(MlError::EmptyTraining);
        }
        if k == 0 || k > stored.len() {
            return Err(MlError::InvalidParameter(format!(
                "k must lie in 1..={}, got {k}",
                stored.len()
            )));
        }
        Ok(Self { stored, k })
    }

    /// Unweighted mean of the targets of the `k` nearest inputs (Euclidean);
    /// equal distances are ordered by sample index.
    pub fn predict(&self, input: &[f64]) -> [f64; HOURS_PER_DAY] {
        let mut ranked: Vec<(f64, usize)> = self
            .stored
            .inputs
            .iter()
            .enumerate()
            .map(|(i, x)| {
                let d2: f64 = x.iter().zip(input).map(|(a, b)| (a - b) * (a - b)).sum();
                (d2, i)
            })
            .collect();
        ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut out = [0.0; HOURS_PER_DAY];
        for &(_, i) in &ranked[..self.k] {
            for (o, t) in out.iter_mut().zip(&self.stored.targets[i]) {
                *o += t;
            }
        }
        for o in &mut out {
            *o /= self.k as f64;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn dataset(inputs: Vec<Vec<f64>>) -> WindowDataset {
        let targets = (0..inputs.len()).map(|i| [i as f64; HOURS_PER_DAY]).collect();
        let day = NaiveDate::from_ymd_opt(2024, 1, 1).unwrap();
        WindowDataset {
            sample_days: vec![day; inputs.len()],
            inputs,
            targets,
        }
    }

    #[test]
    fn k1_exact_match_returns_its_target() {
        let m = KnnModel::fit(dataset(vec![vec![0.0, 0.0], vec![5.0, 5.0], vec![9.0, 1.0]]), 1).unwrap();
        assert_eq!(m.predict(&[5.0, 5.0]), [1.0; 24]);
    }

    #[test]
    fn k_equal_to_n_averages_all() {
        let m = KnnModel::fit(dataset(vec![vec![0.0], vec![5.0], vec![9.0]]), 3).unwrap();
        assert_eq!(m.predict(&[100.0]), [1.0; 24]);
    }

    #[test]
    fn ties_prefer_lower_index() {
        // distances 1, 1, 2 with the farthest stored first
        let m = KnnModel::fit(dataset(vec![vec![2.0], vec![1.0], vec![-1.0]]), 2).unwrap();
        assert_eq!(m.predict(&[0.0]), [1.5; 24]);
        let m = KnnModel::fit(dataset(vec![vec![1.0], vec![-1.0], vec![2.0]]), 2).unwrap();
        assert_eq!(m.predict(&[0.0]), [0.5; 24]);
        let m = KnnModel::fit(dataset(vec![vec![1.0], vec![-1.0], vec![1.0]]), 2).unwrap();
        assert_eq!(m.predict(&[0.0]), [0.5; 24]);
    }

    #[test]
    fn rejects_bad_k() {
        assert!(KnnModel::fit(dataset(vec![vec![0.0]]), 2).is_err());
        assert!(KnnModel::fit(dataset(vec![vec![0.0]]), 0).is_err());
    }
}
