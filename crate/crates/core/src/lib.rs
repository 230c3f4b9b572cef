pub mod classical;
pub mod data;
pub mod evaluation;
pub mod external;
pub mod forecaster;
pub mod ml;
pub mod stats;
pub mod transforms;

pub use data::{HourlySeries, MarketDay, HOURS_PER_DAY};
pub use evaluation::ForecastRecord;
pub use forecaster::{ForecastInput, Forecaster, NativeKind, NativeModel};
