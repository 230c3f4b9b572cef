//! Statistical forecasters: naive baselines, STL/MSTL decomposition and
//! non-seasonal exponential smoothing.

mod baseline;
mod ets;
mod loess;
mod mstl;
mod optim;
mod stl;

use thiserror::Error;

pub use baseline::{naive_forecast, seasonal_naive_forecast};
pub use ets::{aicc, ets_select_fit, EtsKind, EtsModel, MIN_ETS_LENGTH};
pub use mstl::{mstl_decompose, mstl_forecast, MstlParams};
pub use stl::{default_trend_window, stl_decompose, StlDecomposition, StlParams};

#[derive(Debug, Error)]
pub enum ClassicalError {
    #[error("forecast context is empty")]
    EmptyContext,
    #[error("context has {got} values, need at least {needed}")]
    ContextTooShort { needed: usize, got: usize },
    #[error("series has {got} values, need at least {needed}")]
    SeriesTooShort { needed: usize, got: usize },
    #[error("invalid smoothing window: {0}")]
    InvalidWindow(String),
    #[error("periods must be non-empty and strictly ascending, got {0:?}")]
    InvalidPeriods(Vec<usize>),
    #[error("series contains non-finite values")]
    NonFinite,
    #[error("smoothing parameter optimisation produced no finite fit")]
    OptimizationFailed,
}
