//! Windowed supervised forecasters working on quantile-transformed prices.

mod elastic_net;
mod knn;
mod pipeline;
mod svr;
mod windows;

use thiserror::Error;

use crate::transforms::TransformError;

pub use elastic_net::{
    alpha_max, alpha_path, elastic_net_objective, elasticnet_cv, elasticnet_cv_select,
    elasticnet_fit, fit_single_target, fit_single_target_traced, CoordinateDescent, CvOutcome,
    ElasticNetModel, LinearFit, ALPHA_DECADES, CV_FOLDS, L1_RATIO_GRID, N_ALPHAS,
};
pub use knn::{KnnModel, DEFAULT_K};
pub use pipeline::{ml_forecast, MlKind, PipelineOptions};
pub use svr::{
    default_gamma, kernel_matrix, rbf, solve_svr_dual, svr_dual_objective, svr_fit, DualSolution,
    SvrHour, SvrModel, SvrParams,
};
pub use windows::{build_windows, WindowDataset, DEFAULT_INPUT_HOURS};

#[derive(Debug, Error)]
pub enum MlError {
    #[error("series covers {got} day(s), need at least {needed}")]
    TooShort { needed: usize, got: usize },
    #[error("{got} training sample(s), need at least {needed}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("solver did not converge within {iterations} iterations")]
    DidNotConverge { iterations: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("training set is empty")]
    EmptyTraining,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("model produced a non-finite forecast")]
    NonFiniteForecast,
    #[error(transparent)]
    Transform(#[from] TransformError),
}
