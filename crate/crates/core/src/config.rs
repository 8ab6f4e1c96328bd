//! Detector parameters.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Samples per weekly season at a one-minute sampling period.
pub const WEEK_OF_MINUTES: usize = 10_080;

/// `1 / Phi^-1(3/4)`: makes the median absolute deviation a consistent
/// estimator of the standard deviation under normality.
pub const MAD_NORMAL_SCALE: f64 = 1.482_602_218_505_602;

/// How the generalized ESD test centres and scales the residual.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZScoreMode {
    /// Median centre; median absolute deviation scaled by
    /// [`MAD_NORMAL_SCALE`] so it estimates the standard deviation of
    /// Gaussian noise.
    #[default]
    RobustMad,
    /// Median centre, unscaled median absolute deviation. About 1.48 times
    /// more sensitive than `RobustMad` on Gaussian residuals.
    RobustMadRaw,
    /// Mean centre, sample standard deviation scale.
    Classic,
}

impl FromStr for ZScoreMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "robust-mad" | "robust" | "mad" => Ok(Self::RobustMad),
            "robust-mad-raw" | "mad-raw" => Ok(Self::RobustMadRaw),
            "classic" => Ok(Self::Classic),
            other => Err(invalid(
                "zscore_mode",
                format!("`{other}` is not one of robust-mad, robust-mad-raw, classic"),
            )),
        }
    }
}

impl fmt::Display for ZScoreMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::RobustMad => "robust-mad",
            Self::RobustMadRaw => "robust-mad-raw",
            Self::Classic => "classic",
        })
    }
}

/// Upper bound on the number of outliers the ESD test may remove.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MaxOutliers {
    /// Two percent of the tested sample, clamped to `[1, n - 3]`.
    #[default]
    #[serde(with = "auto_literal")]
    Auto,
    Count(usize),
}

/// Anomaly rate assumed by [`MaxOutliers::Auto`].
pub const AUTO_ANOMALY_RATE: f64 = 0.02;

impl MaxOutliers {
    /// Resolves the bound for a sample of `n` present residual values.
    pub fn resolve(self, n: usize) -> Result<usize> {
        match self {
            Self::Auto => {
                if n < 4 {
                    return Err(Error::InsufficientData {
                        stage: "esd test",
                        required: 4,
                        available: n,
                    });
                }
                Ok(((AUTO_ANOMALY_RATE * n as f64).round() as usize).clamp(1, n - 3))
            }
            Self::Count(0) => Err(invalid("max_outliers", "must be at least 1")),
            Self::Count(m) => {
                if n < m + 3 {
                    return Err(Error::InsufficientData {
                        stage: "esd test",
                        required: m + 3,
                        available: n,
                    });
                }
                Ok(m)
            }
        }
    }

    /// Smallest sample size the bound can be resolved for.
    pub fn min_sample(self) -> usize {
        match self {
            Self::Auto => 4,
            Self::Count(m) => m.max(1) + 3,
        }
    }
}

impl FromStr for MaxOutliers {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Self::Auto);
        }
        s.parse::<usize>()
            .map(Self::Count)
            .map_err(|_| invalid("max_outliers", format!("`{s}` is neither `auto` nor a count")))
    }
}

mod auto_literal {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str("auto")
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(), D::Error> {
        let s = String::deserialize(d)?;
        if s == "auto" {
            Ok(())
        } else {
            Err(D::Error::custom("expected `auto`"))
        }
    }
}

/// Serializes the event switch as the integer 0 or 1; accepts integers or booleans.
pub(crate) mod gamma_flag {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &bool, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(u8::from(*v))
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Int(i64),
        Bool(bool),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<bool, D::Error> {
        match Raw::deserialize(d)? {
            Raw::Int(0) | Raw::Bool(false) => Ok(false),
            Raw::Int(1) | Raw::Bool(true) => Ok(true),
            Raw::Int(other) => Err(D::Error::custom(format!("gamma must be 0 or 1, got {other}"))),
        }
    }
}

/// Window lengths, weights, and test settings for one detector.
///
/// Window lengths are in samples. Config files use the field names below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectorConfig {
    /// Samples per season.
    pub season_len: usize,
    /// Trend moving-median window; the season length when unset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window_trend: Option<usize>,
    /// Half-width of the window gathered at each season-aligned position.
    pub window_seasonal: usize,
    /// Seasonal-trend moving-median window.
    pub window_seasonal_trend: usize,
    /// Event moving-median window.
    pub window_event: usize,
    /// Weight of the seasonal component against the seasonal trend while a
    /// DST transition is in effect.
    pub beta: f64,
    /// Remove the event component when a holiday is in effect.
    #[serde(with = "gamma_flag")]
    pub gamma: bool,
    pub max_outliers: MaxOutliers,
    /// Significance level of the ESD test.
    pub alpha: f64,
    pub zscore_mode: ZScoreMode,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            season_len: WEEK_OF_MINUTES,
            window_trend: None,
            window_seasonal: 3,
            window_seasonal_trend: 30,
            window_event: 60,
            beta: 0.4,
            gamma: true,
            max_outliers: MaxOutliers::Auto,
            alpha: 0.05,
            zscore_mode: ZScoreMode::RobustMad,
        }
    }
}

/// Keys accepted by [`DetectorConfig::set`].
pub const CONFIG_KEYS: [&str; 10] = [
    "season_len",
    "window_trend",
    "window_seasonal",
    "window_seasonal_trend",
    "window_event",
    "beta",
    "gamma",
    "max_outliers",
    "alpha",
    "zscore_mode",
];

impl DetectorConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn trend_window(&self) -> usize {
        self.window_trend.unwrap_or(self.season_len)
    }

    /// Applies a single `key=value` override. Dashes in `key` are treated as
    /// underscores.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(name: &'static str, v: &str) -> Result<T> {
            v.trim()
                .parse()
                .map_err(|_| invalid(name, format!("cannot parse `{v}`")))
        }
        let key = key.trim().replace('-', "_");
        match key.as_str() {
            "season_len" => self.season_len = num("season_len", value)?,
            "window_trend" => self.window_trend = Some(num("window_trend", value)?),
            "window_seasonal" => self.window_seasonal = num("window_seasonal", value)?,
            "window_seasonal_trend" => {
                self.window_seasonal_trend = num("window_seasonal_trend", value)?
            }
            "window_event" => self.window_event = num("window_event", value)?,
            "beta" => self.beta = num("beta", value)?,
            "gamma" => {
                self.gamma = match value.trim() {
                    "0" | "false" => false,
                    "1" | "true" => true,
                    other => return Err(invalid("gamma", format!("`{other}` is not 0 or 1"))),
                }
            }
            "max_outliers" => self.max_outliers = value.parse()?,
            "alpha" => self.alpha = num("alpha", value)?,
            "zscore_mode" => self.zscore_mode = value.parse()?,
            _ => {
                return Err(Error::InvalidParameter {
                    name: "override",
                    reason: format!("unknown key `{key}`; expected one of {}", CONFIG_KEYS.join(", ")),
                })
            }
        }
        Ok(())
    }

    /// Checks every range constraint that does not depend on the series length.
    pub fn check(&self) -> Result<()> {
        if self.season_len == 0 {
            return Err(invalid("season_len", "must be positive"));
        }
        if self.trend_window() == 0 {
            return Err(invalid("window_trend", "must be positive"));
        }
        if self.window_seasonal >= self.season_len {
            return Err(invalid(
                "window_seasonal",
                format!("half-window {} must be below the season length {}", self.window_seasonal, self.season_len),
            ));
        }
        if self.window_seasonal_trend == 0 {
            return Err(invalid("window_seasonal_trend", "must be positive"));
        }
        if self.window_event == 0 {
            return Err(invalid("window_event", "must be positive"));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(invalid("beta", format!("{} is outside [0, 1]", self.beta)));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(invalid("alpha", format!("{} is outside (0, 1)", self.alpha)));
        }
        if self.max_outliers == MaxOutliers::Count(0) {
            return Err(invalid("max_outliers", "must be at least 1"));
        }
        Ok(())
    }

    /// Minimum series length for a full run when the event component is
    /// (`with_events`) or is not removed.
    pub fn required_len(&self, with_events: bool) -> usize {
        let events = if with_events { self.window_event - 1 } else { 0 };
        self.trend_window() + events + self.max_outliers.min_sample() - 1
    }
}
