//! Scoring detections against labelled anomaly events.
//!
//! Runs of consecutive detections are condensed to their first index. A
//! condensed detection is a true positive when it falls no earlier than an
//! unmatched label and at most `delay_budget` after it; matching is greedy,
//! earliest first, one to one.

use std::fmt::Write as _;

use chrono::TimeDelta;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calendar::CalendarConfig;
use crate::config::DetectorConfig;
use crate::detector::{detect_batch, DEFAULT_BATCH_LEN};
use crate::error::{invalid, Error, Result};
use crate::series::TimeSeries;

/// Ten minutes: how late a detection may trail its label.
pub const DEFAULT_DELAY_BUDGET: TimeDelta = TimeDelta::minutes(10);

/// First indices (1-based) of the labelled anomaly events of one series.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelSet {
    pub series_id: String,
    labels: Vec<usize>,
}

impl LabelSet {
    pub fn new(series_id: impl Into<String>, labels: Vec<usize>) -> Result<Self> {
        if labels.first() == Some(&0) {
            return Err(invalid("labels", "indices are 1-based"));
        }
        if labels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("labels", "indices must be strictly increasing"));
        }
        Ok(Self {
            series_id: series_id.into(),
            labels,
        })
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Checks every label lies within a series of `len` samples.
    pub fn check_within(&self, len: usize) -> Result<()> {
        match self.labels.last() {
            Some(&last) if last > len => Err(invalid(
                "labels",
                format!("label {last} is beyond the series length {len}"),
            )),
            _ => Ok(()),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("labels serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            series_id: String,
            labels: Vec<usize>,
        }
        let raw: Raw = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::new(raw.series_id, raw.labels)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EvalResult {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl EvalResult {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * recall * precision / (recall + precision)
        };
        Self {
            tp,
            fp,
            fn_,
            precision,
            recall,
            f1,
        }
    }

    /// Metrics of the summed counts.
    pub fn pooled<'a>(results: impl IntoIterator<Item = &'a EvalResult>) -> Self {
        let (tp, fp, fn_) = results
            .into_iter()
            .fold((0, 0, 0), |(a, b, c), r| (a + r.tp, b + r.fp, c + r.fn_));
        Self::from_counts(tp, fp, fn_)
    }
}

/// Collapses each run of consecutive indices to its first index.
pub fn condense(detections: &[usize]) -> Vec<usize> {
    detections
        .iter()
        .enumerate()
        .filter(|&(i, &d)| i == 0 || detections[i - 1] + 1 != d)
        .map(|(_, &d)| d)
        .collect()
}

/// Matches condensed detections to labels and scores the result.
pub fn match_and_score(
    detections: &[usize],
    labels: &[usize],
    sample_period: TimeDelta,
    delay_budget: TimeDelta,
) -> EvalResult {
    let budget = (delay_budget.num_milliseconds() / sample_period.num_milliseconds().max(1)).max(0) as usize;
    let mut tp = 0;
    let mut fp = 0;
    let mut next = 0; // first label not yet matched or expired
    let mut expired = 0;
    for &d in detections {
        while next < labels.len() && labels[next] + budget < d {
            next += 1;
            expired += 1;
        }
        if next < labels.len() && labels[next] <= d {
            tp += 1;
            next += 1;
        } else {
            fp += 1;
        }
    }
    let fn_ = expired + (labels.len() - next);
    EvalResult::from_counts(tp, fp, fn_)
}

/// Score of one batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchScore {
    /// 1-based first and last index of the batch in the series.
    pub first: usize,
    pub last: usize,
    /// First index whose residual was tested; labels before it are not scored.
    pub scored_from: usize,
    pub detections: Vec<usize>,
    pub result: EvalResult,
    pub running_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesScore {
    pub series_id: String,
    pub batches: Vec<BatchScore>,
    /// Metrics of the counts summed over batches.
    pub pooled: EvalResult,
}

impl SeriesScore {
    pub fn running_time(&self) -> f64 {
        self.batches.iter().map(|b| b.running_time).sum()
    }
}

/// Scoring options.
#[derive(Debug, Clone)]
pub struct EvalOptions {
    pub batch_len: usize,
    pub delay_budget: TimeDelta,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            batch_len: DEFAULT_BATCH_LEN,
            delay_budget: DEFAULT_DELAY_BUDGET,
        }
    }
}

/// Splits `series` into consecutive non-overlapping batches, runs detection on
/// each, and scores it against the labels inside its tested range. A trailing
/// remainder too short to test is skipped; a series shorter than one batch is
/// a single batch.
pub fn evaluate_series(
    series: &TimeSeries,
    labels: &LabelSet,
    config: &DetectorConfig,
    calendar: &CalendarConfig,
    options: &EvalOptions,
) -> Result<SeriesScore> {
    labels.check_within(series.len())?;
    if options.batch_len == 0 {
        return Err(invalid("batch_len", "must be positive"));
    }
    let n = series.len();
    let mut ranges = Vec::new();
    let mut first = 1;
    while first <= n {
        let last = (first + options.batch_len - 1).min(n);
        ranges.push((first, last));
        first = last + 1;
    }
    if ranges.len() > 1 {
        let (a, b) = *ranges.last().expect("non-empty");
        if b + 1 - a < config.required_len(config.gamma) {
            ranges.pop();
        }
    }

    let mut batches = Vec::with_capacity(ranges.len());
    for (first, last) in ranges {
        let batch = series.slice(first, last)?;
        let report = detect_batch(&batch, config, calendar)?;
        let offset = first - 1;
        let residual_start = if report.effect.gamma {
            config.trend_window() + config.window_event - 1
        } else {
            config.trend_window()
        };
        let scored_from = offset + residual_start;
        let detections: Vec<usize> = report.anomalies.iter().map(|a| a.index + offset).collect();
        let condensed = condense(&detections);
        let in_batch: Vec<usize> = labels
            .labels()
            .iter()
            .copied()
            .filter(|&l| l >= scored_from && l <= last)
            .collect();
        let result = match_and_score(&condensed, &in_batch, series.period(), options.delay_budget);
        batches.push(BatchScore {
            first,
            last,
            scored_from,
            detections,
            result,
            running_time: report.timing_seconds,
        });
    }
    let pooled = EvalResult::pooled(batches.iter().map(|b| &b.result));
    Ok(SeriesScore {
        series_id: labels.series_id.clone(),
        batches,
        pooled,
    })
}

/// Evaluates several series in parallel, keeping input order.
pub fn evaluate_corpus(
    corpus: &[(TimeSeries, LabelSet)],
    config: &DetectorConfig,
    calendar: &CalendarConfig,
    options: &EvalOptions,
) -> Result<Vec<SeriesScore>> {
    corpus
        .par_iter()
        .map(|(s, l)| evaluate_series(s, l, config, calendar, options))
        .collect()
}

fn mean_of(results: &[EvalResult], times: &[f64]) -> (f64, f64, f64, f64) {
    let n = results.len().max(1) as f64;
    (
        results.iter().map(|r| r.precision).sum::<f64>() / n,
        results.iter().map(|r| r.recall).sum::<f64>() / n,
        results.iter().map(|r| r.f1).sum::<f64>() / n,
        times.iter().sum::<f64>() / n,
    )
}

/// CSV metrics table: one row per series (pooled over its batches), then the
/// mean over series, the mean over batches, and the pooled corpus total.
pub fn metrics_table(scores: &[SeriesScore]) -> String {
    let mut out = String::from("series_id,batches,tp,fp,fn,precision,recall,f1,running_time_s\n");
    let row = |out: &mut String, id: &str, batches: usize, r: &EvalResult, p: f64, rc: f64, f: f64, t: f64| {
        let _ = writeln!(
            out,
            "{id},{batches},{},{},{},{p:.4},{rc:.4},{f:.4},{t:.4}",
            r.tp, r.fp, r.fn_
        );
    };
    for s in scores {
        let r = &s.pooled;
        row(&mut out, &s.series_id, s.batches.len(), r, r.precision, r.recall, r.f1, s.running_time());
    }

    let total = EvalResult::pooled(scores.iter().map(|s| &s.pooled));
    let n_batches: usize = scores.iter().map(|s| s.batches.len()).sum();

    let per_series: Vec<EvalResult> = scores.iter().map(|s| s.pooled).collect();
    let series_times: Vec<f64> = scores.iter().map(SeriesScore::running_time).collect();
    let (p, r, f, t) = mean_of(&per_series, &series_times);
    row(&mut out, "mean_over_series", n_batches, &total, p, r, f, t);

    let per_batch: Vec<EvalResult> = scores.iter().flat_map(|s| s.batches.iter().map(|b| b.result)).collect();
    let batch_times: Vec<f64> = scores.iter().flat_map(|s| s.batches.iter().map(|b| b.running_time)).collect();
    let (p, r, f, t) = mean_of(&per_batch, &batch_times);
    row(&mut out, "mean_over_batches", n_batches, &total, p, r, f, t);

    let total_time: f64 = series_times.iter().sum();
    row(&mut out, "pooled", n_batches, &total, total.precision, total.recall, total.f1, total_time);
    out
}
