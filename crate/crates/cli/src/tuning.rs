//! Detector parameters from defaults, a config file, and flags, in that
//! order of precedence.

use std::fmt;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use mediff_core::DetectorConfig;

/// Bad command-line input; exits with status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Args, Debug, Default)]
pub struct Tuning {
    /// Detector config TOML
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override any config key, e.g. `--set window_event=120`; repeatable
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    season_len: Option<usize>,
    /// Trend window; follows --season-len when unset
    #[arg(long)]
    window_trend: Option<usize>,
    /// Seasonal half-window
    #[arg(long)]
    window_seasonal: Option<usize>,
    #[arg(long)]
    window_seasonal_trend: Option<usize>,
    #[arg(long)]
    window_event: Option<usize>,
    /// DST blend weight, used only when a DST transition touches the batch
    #[arg(long)]
    beta: Option<f64>,
    /// Remove the event component when a holiday touches the batch (0 or 1)
    #[arg(long, value_parser = clap::value_parser!(u8).range(0..=1))]
    gamma: Option<u8>,
    #[arg(long)]
    alpha: Option<f64>,
    /// `auto` or a count
    #[arg(long)]
    max_outliers: Option<String>,
    /// robust-mad, robust-mad-raw or classic
    #[arg(long)]
    zscore_mode: Option<String>,
}

impl Tuning {
    pub fn resolve(&self) -> Result<DetectorConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading config {}", path.display()))?;
                DetectorConfig::from_toml(&text)
                    .with_context(|| format!("in config {}", path.display()))?
            }
            None => DetectorConfig::default(),
        };
        for item in &self.overrides {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| UsageError(format!("--set expects KEY=VALUE, got `{item}`")))?;
            cfg.set(key, value).map_err(|e| UsageError(e.to_string()))?;
        }
        let flags = [
            ("season_len", self.season_len.map(|v| v.to_string())),
            ("window_trend", self.window_trend.map(|v| v.to_string())),
            ("window_seasonal", self.window_seasonal.map(|v| v.to_string())),
            ("window_seasonal_trend", self.window_seasonal_trend.map(|v| v.to_string())),
            ("window_event", self.window_event.map(|v| v.to_string())),
            ("beta", self.beta.map(|v| v.to_string())),
            ("gamma", self.gamma.map(|v| v.to_string())),
            ("alpha", self.alpha.map(|v| v.to_string())),
            ("max_outliers", self.max_outliers.clone()),
            ("zscore_mode", self.zscore_mode.clone()),
        ];
        for (key, value) in flags {
            if let Some(value) = value {
                cfg.set(key, &value).map_err(|e| UsageError(format!("--{}: {e}", key.replace('_', "-"))))?;
            }
        }
        cfg.check().map_err(|e| UsageError(e.to_string()))?;
        Ok(cfg)
    }
}
