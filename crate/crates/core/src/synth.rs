//! Synthetic seasonal metrics with labelled injected anomalies.
//!
//! # Reproducibility
//!
//! All randomness comes from xoshiro256++ seeded through SplitMix64
//! (`seed_from_u64`). Uniform variates are `(next_u64 >> 11) * 2^-53`;
//! normal variates use the cosine branch of Box-Muller with
//! `u1 = 1 - uniform` so the logarithm never sees zero. Two streams are used:
//! the noise stream is seeded with `seed`, the placement stream (see
//! [`random_plan`]) with `seed ^ PLAN_STREAM`. For each sample `k = 1..=len`
//! the noise stream yields one normal variate, then, when `missing_rate > 0`,
//! one uniform that marks the sample missing if it is below the rate.
//!
//! # Signal
//!
//! `level + trend_slope * (k - 1) + weekly * sin(2π φ / L) + daily * sin(14π φ / L)`
//! with `φ = (k - 1 + shift) mod L`, where `shift` is the DST offset from the
//! transition onward and 0 before it. Spikes add their magnitude at a single
//! index, level shifts over their duration, and holiday dips subtract theirs.

use std::f64::consts::TAU;

use chrono::{DateTime, TimeDelta, Utc};
use rand_xoshiro::rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::calendar::{CalendarConfig, Holiday, DEFAULT_DST_EFFECT};
use crate::config::WEEK_OF_MINUTES;
use crate::error::{invalid, Result};
use crate::eval::LabelSet;
use crate::series::TimeSeries;

/// Mixed into the seed for the anomaly-placement stream.
pub const PLAN_STREAM: u64 = 0x9E37_79B9_7F4A_7C15;

/// Portable random source used by the generator.
pub struct SynthRng(Xoshiro256PlusPlus);

impl SynthRng {
    pub fn new(seed: u64) -> Self {
        Self(Xoshiro256PlusPlus::seed_from_u64(seed))
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
    }

    /// Uniform integer in `[lo, hi]`.
    pub fn range(&mut self, lo: usize, hi: usize) -> usize {
        lo + ((self.uniform() * (hi - lo + 1) as f64) as usize).min(hi - lo)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InjectedAnomaly {
    Spike { index: usize, magnitude: f64 },
    LevelShift { start: usize, duration: usize, magnitude: f64 },
}

impl InjectedAnomaly {
    pub fn first(&self) -> usize {
        match *self {
            Self::Spike { index, .. } => index,
            Self::LevelShift { start, .. } => start,
        }
    }

    pub fn last(&self) -> usize {
        match *self {
            Self::Spike { index, .. } => index,
            Self::LevelShift { start, duration, .. } => start + duration.max(1) - 1,
        }
    }

    fn offset_at(&self, k: usize) -> f64 {
        match *self {
            Self::Spike { index, magnitude } if k == index => magnitude,
            Self::LevelShift { magnitude, .. } if k >= self.first() && k <= self.last() => magnitude,
            _ => 0.0,
        }
    }
}

/// Seasonal pattern shifted by `offset` samples from index `at` onward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DstShift {
    pub at: usize,
    pub offset: i64,
}

/// Expected dip over `[start, start + duration - 1]`; recorded as a holiday.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolidayDip {
    pub start: usize,
    pub duration: usize,
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeasonProfile {
    pub level: f64,
    pub weekly_amplitude: f64,
    pub daily_amplitude: f64,
}

impl Default for SeasonProfile {
    fn default() -> Self {
        Self {
            level: 1_000.0,
            weekly_amplitude: 100.0,
            daily_amplitude: 200.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub series_id: String,
    pub start: DateTime<Utc>,
    pub sample_period_seconds: i64,
    pub season_len: usize,
    /// Series length in seasons (weeks at the default season length).
    pub seasons: usize,
    pub profile: SeasonProfile,
    /// Added per sample.
    pub trend_slope: f64,
    pub noise_std: f64,
    pub anomalies: Vec<InjectedAnomaly>,
    pub dst_shift: Option<DstShift>,
    pub holiday: Option<HolidayDip>,
    /// Probability that a sample outside the injected anomalies is missing.
    pub missing_rate: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            series_id: "synthetic".into(),
            start: DateTime::from_timestamp(1_704_067_200, 0).expect("valid instant"), // 2024-01-01
            sample_period_seconds: 60,
            season_len: WEEK_OF_MINUTES,
            seasons: 4,
            profile: SeasonProfile::default(),
            trend_slope: 0.001,
            noise_std: 10.0,
            anomalies: Vec::new(),
            dst_shift: None,
            holiday: None,
            missing_rate: 0.0,
            seed: 0,
        }
    }
}

impl SynthSpec {
    pub fn len(&self) -> usize {
        self.seasons * self.season_len
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn sample_period(&self) -> TimeDelta {
        TimeDelta::seconds(self.sample_period_seconds)
    }

    fn time(&self, k: usize) -> DateTime<Utc> {
        self.start + self.sample_period() * (k as i32 - 1)
    }

    /// Noise-free signal at index `k` including injected effects.
    pub fn clean_value(&self, k: usize) -> f64 {
        let season = self.season_len as i64;
        let shift = match self.dst_shift {
            Some(d) if k >= d.at => d.offset,
            _ => 0,
        };
        let phase = ((k as i64 - 1 + shift).rem_euclid(season)) as f64 / season as f64;
        let p = &self.profile;
        let mut v = p.level
            + self.trend_slope * (k - 1) as f64
            + p.weekly_amplitude * (TAU * phase).sin()
            + p.daily_amplitude * (7.0 * TAU * phase).sin();
        v += self.anomalies.iter().map(|a| a.offset_at(k)).sum::<f64>();
        if let Some(h) = self.holiday {
            if k >= h.start && k < h.start + h.duration {
                v -= h.magnitude;
            }
        }
        v
    }

    fn validate(&self) -> Result<()> {
        if self.seasons < 2 {
            return Err(invalid("seasons", "at least two seasons are needed"));
        }
        if self.season_len == 0 || self.sample_period_seconds <= 0 {
            return Err(invalid("season_len", "season length and period must be positive"));
        }
        if self.noise_std.is_nan() || self.noise_std < 0.0 || !(0.0..1.0).contains(&self.missing_rate) {
            return Err(invalid("noise_std", "noise must be >= 0 and missing rate in [0, 1)"));
        }
        let len = self.len();
        let mut spans: Vec<(usize, usize)> = self.anomalies.iter().map(|a| (a.first(), a.last())).collect();
        spans.sort_unstable();
        for &(a, b) in &spans {
            if a == 0 || b > len {
                return Err(invalid(
                    "anomalies",
                    format!("event [{a}, {b}] lies outside the series [1, {len}]"),
                ));
            }
        }
        if let Some(w) = spans.windows(2).find(|w| w[1].0 <= w[0].1 + 1) {
            return Err(invalid(
                "anomalies",
                format!("events starting at {} and {} touch or overlap", w[0].0, w[1].0),
            ));
        }
        if let Some(d) = self.dst_shift {
            if d.at == 0 || d.at > len {
                return Err(invalid("dst_shift", format!("transition {} is outside the series", d.at)));
            }
        }
        if let Some(h) = self.holiday {
            if h.start == 0 || h.duration == 0 || h.start + h.duration - 1 > len {
                return Err(invalid("holiday", "dip must lie inside the series"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSeries {
    pub series: TimeSeries,
    pub labels: LabelSet,
    pub calendar: CalendarConfig,
}

/// Builds the series, its labels (first index of each injected event), and a
/// calendar holding the DST transition and holiday, if any.
pub fn generate_synthetic(spec: &SynthSpec) -> Result<SyntheticSeries> {
    spec.validate()?;
    let len = spec.len();
    let mut rng = SynthRng::new(spec.seed);
    let anomalous = |k: usize| spec.anomalies.iter().any(|a| k >= a.first() && k <= a.last());

    let values = (1..=len)
        .map(|k| {
            let v = spec.clean_value(k) + spec.noise_std * rng.normal();
            let missing = spec.missing_rate > 0.0 && rng.uniform() < spec.missing_rate;
            (!missing || anomalous(k)).then_some(v)
        })
        .collect();
    let series = TimeSeries::new(spec.start, spec.sample_period(), values)?;

    let mut firsts: Vec<usize> = spec.anomalies.iter().map(InjectedAnomaly::first).collect();
    firsts.sort_unstable();
    let labels = LabelSet::new(spec.series_id.clone(), firsts)?;

    let dst = spec.dst_shift.map(|d| spec.time(d.at)).into_iter().collect();
    let holidays = spec
        .holiday
        .map(|h| Holiday {
            start: spec.time(h.start),
            end: spec.time(h.start + h.duration - 1),
            label: "holiday".into(),
        })
        .into_iter()
        .collect();
    let calendar = CalendarConfig::new(dst, DEFAULT_DST_EFFECT, holidays)?;

    Ok(SyntheticSeries {
        series,
        labels,
        calendar,
    })
}

/// Randomly placed anomalies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanSpec {
    pub spikes: usize,
    pub level_shifts: usize,
    /// Inclusive duration range of level shifts.
    pub shift_duration: (usize, usize),
    /// Absolute magnitude; the sign is drawn at random.
    pub magnitude: f64,
    /// Inclusive index range events must fit into.
    pub region: (usize, usize),
    /// Minimum number of clean samples between events.
    pub min_gap: usize,
}

/// Draws a non-overlapping anomaly plan from the placement stream of `seed`.
pub fn random_plan(plan: &PlanSpec, seed: u64) -> Result<Vec<InjectedAnomaly>> {
    let (lo, hi) = plan.region;
    let (dmin, dmax) = plan.shift_duration;
    if lo == 0 || lo > hi || dmin == 0 || dmin > dmax || dmax > hi - lo + 1 {
        return Err(invalid("plan", "empty region or invalid shift durations"));
    }
    let mut rng = SynthRng::new(seed ^ PLAN_STREAM);
    let mut placed: Vec<InjectedAnomaly> = Vec::new();
    let kinds = std::iter::repeat(false)
        .take(plan.level_shifts)
        .chain(std::iter::repeat(true).take(plan.spikes));
    for spike in kinds {
        let mut attempts = 0;
        loop {
            attempts += 1;
            if attempts > 10_000 {
                return Err(invalid("plan", "could not place every event with the requested gap"));
            }
            let duration = if spike { 1 } else { rng.range(dmin, dmax) };
            let start = rng.range(lo, hi + 1 - duration);
            let sign = if rng.uniform() < 0.5 { -1.0 } else { 1.0 };
            let end = start + duration - 1;
            let clear = placed
                .iter()
                .all(|a| end + plan.min_gap < a.first() || a.last() + plan.min_gap < start);
            if !clear {
                continue;
            }
            let magnitude = sign * plan.magnitude;
            placed.push(if spike {
                InjectedAnomaly::Spike { index: start, magnitude }
            } else {
                InjectedAnomaly::LevelShift { start, duration, magnitude }
            });
            break;
        }
    }
    placed.sort_by_key(InjectedAnomaly::first);
    Ok(placed)
}
