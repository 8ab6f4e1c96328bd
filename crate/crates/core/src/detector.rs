//! Batch detection: resolve calendar effects, decompose, test the residual,
//! and report anomalies with their evidence.

use std::collections::HashSet;
use std::time::Instant;

use chrono::{DateTime, Utc};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calendar::{resolve_effects, CalendarConfig, EffectResolution};
use crate::config::DetectorConfig;
use crate::decompose::{decompose, DecompositionResult};
use crate::error::{invalid, Error, Result};
use crate::esd::{esd_test, EsdOutcome};
use crate::series::TimeSeries;

/// Version of the report document layout.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Four weeks of one-minute samples.
pub const DEFAULT_BATCH_LEN: usize = 40_320;

/// One week of one-minute samples.
pub const DEFAULT_STRIDE: usize = 10_080;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Anomaly {
    /// 1-based index in the full series.
    pub index: usize,
    pub timestamp: DateTime<Utc>,
    pub value: f64,
    pub residual: f64,
    pub zscore: f64,
    pub critical: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnomalyReport {
    pub schema_version: u32,
    pub series_id: String,
    pub batch_start: DateTime<Utc>,
    pub batch_end: DateTime<Utc>,
    /// Sorted by index.
    pub anomalies: Vec<Anomaly>,
    pub effect: EffectResolution,
    pub config: DetectorConfig,
    /// Resolved ESD bound.
    pub max_outliers: usize,
    /// Present residual values tested.
    pub sample_size: usize,
    /// Wall-clock detection time.
    pub timing_seconds: f64,
}

impl AnomalyReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let report: Self = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if report.schema_version != REPORT_SCHEMA_VERSION {
            return Err(Error::Parse(format!(
                "unsupported report schema version {}",
                report.schema_version
            )));
        }
        Ok(report)
    }

    pub fn indices(&self) -> Vec<usize> {
        self.anomalies.iter().map(|a| a.index).collect()
    }
}

/// Everything one batch run produced.
#[derive(Debug, Clone)]
pub struct BatchRun {
    pub decomposition: DecompositionResult,
    pub esd: EsdOutcome,
    pub report: AnomalyReport,
}

/// Runs detection on one batch, resolving the blend weight and event switch
/// from `calendar` over the batch's time span.
pub fn detect_batch(
    y: &TimeSeries,
    config: &DetectorConfig,
    calendar: &CalendarConfig,
) -> Result<AnomalyReport> {
    let effect = resolve_effects(y.span(), calendar, config.beta, config.gamma);
    run_batch(y, config, effect).map(|run| run.report)
}

/// Runs detection on one batch with explicitly chosen effects.
pub fn run_batch(
    y: &TimeSeries,
    config: &DetectorConfig,
    effect: EffectResolution,
) -> Result<BatchRun> {
    let clock = Instant::now();
    config.check()?;
    if !(0.0..=1.0).contains(&effect.beta) {
        return Err(invalid("beta", format!("{} is outside [0, 1]", effect.beta)));
    }
    if y.present_count() == 0 {
        return Err(Error::AllMissing("batch"));
    }
    let required = config.required_len(effect.gamma);
    if y.len() < required {
        return Err(Error::InsufficientData {
            stage: "detection batch",
            required,
            available: y.len(),
        });
    }

    let decomposition = decompose(y, config, effect.beta, effect.gamma)?;
    let residual = &decomposition.residual;
    let present = residual.values().iter().flatten().count();
    let max_outliers = config.max_outliers.resolve(present)?;
    let esd = esd_test(residual.values(), max_outliers, config.alpha, config.zscore_mode)?;

    let mut anomalies: Vec<Anomaly> = esd
        .outliers()
        .iter()
        .map(|it| {
            let k = residual.start() + it.position - 1;
            Anomaly {
                index: k,
                timestamp: y.time(k),
                value: y.get(k).expect("tested residuals have observed values"),
                residual: it.value,
                zscore: it.zscore,
                critical: it.critical,
            }
        })
        .collect();
    anomalies.sort_by_key(|a| a.index);

    let (batch_start, batch_end) = y.span();
    let report = AnomalyReport {
        schema_version: REPORT_SCHEMA_VERSION,
        series_id: String::new(),
        batch_start,
        batch_end,
        anomalies,
        effect,
        config: config.clone(),
        max_outliers,
        sample_size: esd.sample_size,
        timing_seconds: clock.elapsed().as_secs_f64(),
    };
    Ok(BatchRun {
        decomposition,
        esd,
        report,
    })
}

/// Splits a series into windows of `batch_len` samples every `stride`
/// samples. A final window is added so the last sample is always covered;
/// a series no longer than `batch_len` is a single window.
pub fn sliding_windows(y: &TimeSeries, batch_len: usize, stride: usize) -> Result<Vec<TimeSeries>> {
    if batch_len == 0 || stride == 0 {
        return Err(invalid("batch", "batch length and stride must be positive"));
    }
    let n = y.len();
    if n <= batch_len {
        return Ok(vec![y.clone()]);
    }
    let mut starts: Vec<usize> = (1..=n - batch_len + 1).step_by(stride).collect();
    if starts.last().is_some_and(|&s| s + batch_len - 1 < n) {
        starts.push(n - batch_len + 1);
    }
    starts
        .into_iter()
        .map(|s| y.slice(s, s + batch_len - 1))
        .collect()
}

/// Runs [`detect_batch`] on every window and drops anomalies already reported
/// at the same timestamp by an earlier window.
///
/// Windows are evaluated in parallel; reports come back in window order with
/// indices counted from the first window's start.
pub fn detect_stream(
    windows: &[TimeSeries],
    config: &DetectorConfig,
    calendar: &CalendarConfig,
) -> Result<Vec<AnomalyReport>> {
    let Some(first) = windows.first() else {
        return Ok(Vec::new());
    };
    let period = first.period();
    if let Some(w) = windows.iter().find(|w| w.period() != period) {
        return Err(invalid(
            "sample_period",
            format!("windows mix periods {period} and {}", w.period()),
        ));
    }
    let origin = windows.iter().map(TimeSeries::start).min().expect("non-empty");

    let mut reports = windows
        .par_iter()
        .map(|w| detect_batch(w, config, calendar))
        .collect::<Result<Vec<_>>>()?;

    let period_ms = period.num_milliseconds();
    let mut seen = HashSet::new();
    for report in &mut reports {
        report.anomalies.retain(|a| seen.insert(a.timestamp));
        for a in &mut report.anomalies {
            a.index = ((a.timestamp - origin).num_milliseconds() / period_ms) as usize + 1;
        }
    }
    Ok(reports)
}
