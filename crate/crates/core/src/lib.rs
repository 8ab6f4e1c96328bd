//! Robust anomaly detection for seasonal service metrics.
//!
//! A batch is split by moving medians into trend, seasonal, DST-blended
//! seasonal, and event components. What remains is screened by a generalized
//! extreme Studentized deviate test whose z-score uses the median and the
//! median absolute deviation.

pub mod calendar;
pub mod config;
pub mod decompose;
pub mod detector;
pub mod error;
pub mod esd;
pub mod eval;
pub mod io;
pub mod median;
pub mod series;
pub mod synth;

pub use calendar::{resolve_effects, CalendarConfig, EffectResolution, Holiday};
pub use config::{DetectorConfig, MaxOutliers, ZScoreMode, MAD_NORMAL_SCALE};
pub use decompose::{decompose, DecompositionResult};
pub use detector::{
    detect_batch, detect_stream, run_batch, sliding_windows, Anomaly, AnomalyReport, BatchRun,
};
pub use error::{Error, Result};
pub use esd::{esd_test, t_quantile, EsdIteration, EsdOutcome};
pub use eval::{condense, match_and_score, EvalResult, LabelSet};
pub use median::median;
pub use series::{Component, TimeSeries};
pub use synth::{generate_synthetic, SynthSpec, SyntheticSeries};
