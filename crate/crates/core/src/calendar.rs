//! Server-side calendar of DST transitions and holidays, and its resolution
//! into the seasonal blend weight and the event-component switch for a batch.
//!
//! # File format
//!
//! Calendars are TOML documents. Instants are RFC 3339 strings.
//!
//! ```toml
//! dst_effect_seconds = 604800          # optional, defaults to one week
//! dst_transitions = ["2024-03-10T10:00:00Z", "2024-11-03T09:00:00Z"]
//!
//! [[holidays]]
//! start = "2024-12-24T00:00:00Z"
//! end = "2024-12-26T23:59:00Z"
//! label = "christmas"
//! ```

use chrono::{DateTime, TimeDelta, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Default time a DST transition keeps affecting detection: one weekly season.
pub const DEFAULT_DST_EFFECT: TimeDelta = TimeDelta::weeks(1);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Holiday {
    pub start: DateTime<Utc>,
    pub end: DateTime<Utc>,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CalendarConfig {
    dst_transitions: Vec<DateTime<Utc>>,
    dst_effect: TimeDelta,
    holidays: Vec<Holiday>,
}

impl Default for CalendarConfig {
    fn default() -> Self {
        Self {
            dst_transitions: Vec::new(),
            dst_effect: DEFAULT_DST_EFFECT,
            holidays: Vec::new(),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CalendarFile {
    #[serde(default = "default_effect_seconds")]
    dst_effect_seconds: i64,
    #[serde(default)]
    dst_transitions: Vec<DateTime<Utc>>,
    #[serde(default)]
    holidays: Vec<Holiday>,
}

fn default_effect_seconds() -> i64 {
    DEFAULT_DST_EFFECT.num_seconds()
}

impl CalendarConfig {
    /// Builds a calendar, sorting both lists ascending.
    pub fn new(
        mut dst_transitions: Vec<DateTime<Utc>>,
        dst_effect: TimeDelta,
        mut holidays: Vec<Holiday>,
    ) -> Result<Self> {
        if dst_effect < TimeDelta::zero() {
            return Err(invalid("dst_effect", "must not be negative"));
        }
        if let Some(h) = holidays.iter().find(|h| h.start > h.end) {
            return Err(invalid(
                "holidays",
                format!("`{}` ends before it starts", h.label),
            ));
        }
        dst_transitions.sort();
        holidays.sort_by_key(|h| (h.start, h.end));
        Ok(Self {
            dst_transitions,
            dst_effect,
            holidays,
        })
    }

    pub fn dst_transitions(&self) -> &[DateTime<Utc>] {
        &self.dst_transitions
    }

    pub fn dst_effect(&self) -> TimeDelta {
        self.dst_effect
    }

    pub fn holidays(&self) -> &[Holiday] {
        &self.holidays
    }

    pub fn is_empty(&self) -> bool {
        self.dst_transitions.is_empty() && self.holidays.is_empty()
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let file: CalendarFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::new(
            file.dst_transitions,
            TimeDelta::seconds(file.dst_effect_seconds),
            file.holidays,
        )
    }

    pub fn to_toml(&self) -> String {
        let file = CalendarFile {
            dst_effect_seconds: self.dst_effect.num_seconds(),
            dst_transitions: self.dst_transitions.clone(),
            holidays: self.holidays.clone(),
        };
        toml::to_string(&file).expect("calendar serializes")
    }
}

/// Blend weight and event switch resolved for one batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectResolution {
    pub beta: f64,
    #[serde(with = "crate::config::gamma_flag")]
    pub gamma: bool,
    /// Calendar entries that intersected the batch, e.g. `dst:2024-03-10T10:00:00Z`.
    pub reasons: Vec<String>,
}

impl EffectResolution {
    /// No calendar effect: plain seasonal component, no event removal.
    pub fn neutral() -> Self {
        Self {
            beta: 1.0,
            gamma: false,
            reasons: Vec::new(),
        }
    }
}

/// Resolves the weights that apply to a batch covering `span` (inclusive).
///
/// `beta` takes the configured value when a DST transition's effect window
/// `[transition, transition + dst_effect]` meets the span and is 1 otherwise.
/// `gamma` is set when it was requested and a holiday interval meets the span.
pub fn resolve_effects(
    span: (DateTime<Utc>, DateTime<Utc>),
    calendar: &CalendarConfig,
    configured_beta: f64,
    requested_gamma: bool,
) -> EffectResolution {
    let (from, to) = span;
    let mut out = EffectResolution::neutral();

    for t in &calendar.dst_transitions {
        if *t <= to && *t + calendar.dst_effect >= from {
            out.beta = configured_beta;
            out.reasons.push(format!("dst:{}", t.to_rfc3339()));
        }
    }
    for h in &calendar.holidays {
        if h.start <= to && h.end >= from {
            out.reasons.push(format!("holiday:{}", h.label));
            if requested_gamma {
                out.gamma = true;
            }
        }
    }
    out
}
