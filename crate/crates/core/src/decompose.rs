//! Median decomposition of a series into trend, seasonal, DST-blended
//! seasonal, event, and residual components.
//!
//! Every component is a [`Component`] on a 1-based domain of the input:
//!
//! | component                    | domain                           |
//! |------------------------------|----------------------------------|
//! | trend, detrended, seasonal   | `[w_trend, len]`                 |
//! | seasonal trend, DST seasonal | `[w_trend, len]`                 |
//! | intermediate residual        | `[w_trend, len]`                 |
//! | event                        | `[w_trend + w_event - 1, len]`   |
//! | residual                     | event domain when events are removed, else `[w_trend, len]` |
//!
//! A subtraction with a missing operand is missing; medians skip missing
//! entries.

use crate::config::DetectorConfig;
use crate::error::{invalid, Error, Result};
use crate::median::{median_in_place, moving_median};
use crate::series::{Component, TimeSeries};

/// All components of one decomposition, aligned to the input's indices.
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionResult {
    pub trend: Component,
    pub detrended: Component,
    pub seasonal: Component,
    pub seasonal_trend: Component,
    pub dst_seasonal: Component,
    /// `y - trend - dst_seasonal`, before event removal.
    pub intermediate: Component,
    /// Present only when the event component was removed.
    pub event: Option<Component>,
    pub residual: Component,
    pub beta: f64,
    pub gamma: bool,
}

impl DecompositionResult {
    /// `trend + dst_seasonal + gamma * event + residual` at `k`, the right-hand
    /// side of the reconstruction identity. `None` off the residual domain or
    /// where any term is missing.
    pub fn reconstruct(&self, k: usize) -> Option<f64> {
        let event = match (&self.event, self.gamma) {
            (Some(e), true) => e.get(k)?,
            _ => 0.0,
        };
        Some(self.trend.get(k)? + self.dst_seasonal.get(k)? + event + self.residual.get(k)?)
    }
}

/// Trailing moving median of `y` with window `window`, on `[window, len]`.
pub fn extract_trend(y: &TimeSeries, window: usize) -> Result<Component> {
    if window == 0 {
        return Err(invalid("window_trend", "must be positive"));
    }
    if window > y.len() {
        return Err(Error::InsufficientData {
            stage: "trend extraction",
            required: window,
            available: y.len(),
        });
    }
    Ok(Component::new(window, moving_median(y.values(), window, false)))
}

/// `y - trend` on the trend's domain.
pub fn detrend(y: &TimeSeries, trend: &Component) -> Result<Component> {
    if trend.is_empty() || trend.end() != y.len() {
        return Err(Error::Misaligned(format!(
            "trend covers [{}, {}] but the series ends at {}",
            trend.start(),
            trend.end(),
            y.len()
        )));
    }
    Ok(Component::new(
        trend.start(),
        trend
            .iter()
            .map(|(k, mu)| Some(y.get(k)? - mu?))
            .collect(),
    ))
}

/// Seasonal component: at each `k`, the median of the detrended values at
/// `k + i * season_len + j` for every integer `i` (both directions) and every
/// `j` in `[-half_window, half_window]` that stays inside the domain.
pub fn extract_seasonal(
    detrended: &Component,
    season_len: usize,
    half_window: usize,
) -> Result<Component> {
    if season_len == 0 {
        return Err(invalid("season_len", "must be positive"));
    }
    if half_window >= season_len {
        return Err(invalid(
            "window_seasonal",
            format!("half-window {half_window} must be below the season length {season_len}"),
        ));
    }
    if detrended.is_empty() {
        return Err(Error::InsufficientData {
            stage: "seasonal extraction",
            required: 1,
            available: 0,
        });
    }

    let values = detrended.values();
    let n = values.len() as isize;
    let season = season_len as isize;
    let half = half_window as isize;
    let mut buf = Vec::new();

    let out = (0..n)
        .map(|p| {
            buf.clear();
            // Offsets whose centre lies within `half` of the domain.
            let i_lo = (-p - half).div_euclid(season) - 1;
            let i_hi = (n - 1 - p + half).div_euclid(season) + 1;
            // Windows overlap when 2 * half + 1 > season; each index counts once.
            let mut next = 0;
            for i in i_lo..=i_hi {
                let centre = p + i * season;
                let from = (centre - half).max(next);
                let to = (centre + half).min(n - 1);
                if from > to {
                    continue;
                }
                buf.extend(values[from as usize..=to as usize].iter().flatten());
                next = to + 1;
            }
            median_in_place(&mut buf)
        })
        .collect();
    Ok(Component::new(detrended.start(), out))
}

/// Short trailing moving median of the detrended series. Windows that would
/// reach before the domain shrink to the available prefix.
pub fn extract_seasonal_trend(detrended: &Component, window: usize) -> Result<Component> {
    if window == 0 {
        return Err(invalid("window_seasonal_trend", "must be positive"));
    }
    Ok(Component::new(
        detrended.start(),
        moving_median(detrended.values(), window, true),
    ))
}

/// `beta * seasonal + (1 - beta) * seasonal_trend`.
///
/// With `beta` exactly 1 (or 0) the result is the seasonal (seasonal-trend)
/// value alone, so a missing value in the unused operand does not propagate.
pub fn blend_dst_seasonal(
    seasonal: &Component,
    seasonal_trend: &Component,
    beta: f64,
) -> Result<Component> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(invalid("beta", format!("{beta} is outside [0, 1]")));
    }
    seasonal.check_same_domain(seasonal_trend, "seasonal vs seasonal trend")?;
    let blended = seasonal
        .values()
        .iter()
        .zip(seasonal_trend.values())
        .map(|(&s, &st)| {
            if beta == 1.0 {
                s
            } else if beta == 0.0 {
                st
            } else {
                Some(beta * s? + (1.0 - beta) * st?)
            }
        })
        .collect();
    Ok(Component::new(seasonal.start(), blended))
}

/// Returns `(intermediate, event)` where `intermediate = y - trend -
/// dst_seasonal` and `event` is its trailing moving median of length `window`.
pub fn extract_event(
    y: &TimeSeries,
    trend: &Component,
    dst_seasonal: &Component,
    window: usize,
) -> Result<(Component, Component)> {
    let intermediate = intermediate_residual(y, trend, dst_seasonal)?;
    if window == 0 {
        return Err(invalid("window_event", "must be positive"));
    }
    if window > intermediate.len() {
        return Err(Error::InsufficientData {
            stage: "event extraction",
            required: trend.start() + window - 1,
            available: y.len(),
        });
    }
    let event = Component::new(
        intermediate.start() + window - 1,
        moving_median(intermediate.values(), window, false),
    );
    Ok((intermediate, event))
}

fn intermediate_residual(
    y: &TimeSeries,
    trend: &Component,
    dst_seasonal: &Component,
) -> Result<Component> {
    trend.check_same_domain(dst_seasonal, "trend vs DST seasonal")?;
    if trend.end() != y.len() {
        return Err(Error::Misaligned(format!(
            "trend ends at {} but the series ends at {}",
            trend.end(),
            y.len()
        )));
    }
    Ok(Component::new(
        trend.start(),
        trend
            .iter()
            .map(|(k, mu)| Some(y.get(k)? - mu? - dst_seasonal.get(k)?))
            .collect(),
    ))
}

/// `intermediate - gamma * event`, on the event's domain when `gamma` is set.
pub fn finalize_residual(
    intermediate: &Component,
    event: Option<&Component>,
    gamma: bool,
) -> Result<Component> {
    if !gamma {
        return Ok(intermediate.clone());
    }
    let event = event.ok_or_else(|| invalid("gamma", "event removal requested without an event component"))?;
    let r = intermediate.tail_from(event.start())?;
    r.check_same_domain(event, "intermediate vs event")?;
    Ok(Component::new(
        event.start(),
        r.values()
            .iter()
            .zip(event.values())
            .map(|(&r, &e)| Some(r? - e?))
            .collect(),
    ))
}

/// Full decomposition with blend weight `beta` and event removal `gamma`.
pub fn decompose(
    y: &TimeSeries,
    config: &DetectorConfig,
    beta: f64,
    gamma: bool,
) -> Result<DecompositionResult> {
    let trend = extract_trend(y, config.trend_window())?;
    let detrended = detrend(y, &trend)?;
    let seasonal = extract_seasonal(&detrended, config.season_len, config.window_seasonal)?;
    let seasonal_trend = extract_seasonal_trend(&detrended, config.window_seasonal_trend)?;
    let dst_seasonal = blend_dst_seasonal(&seasonal, &seasonal_trend, beta)?;

    let (intermediate, event) = if gamma {
        let (r, e) = extract_event(y, &trend, &dst_seasonal, config.window_event)?;
        (r, Some(e))
    } else {
        (intermediate_residual(y, &trend, &dst_seasonal)?, None)
    };
    let residual = finalize_residual(&intermediate, event.as_ref(), gamma)?;

    Ok(DecompositionResult {
        trend,
        detrended,
        seasonal,
        seasonal_trend,
        dst_seasonal,
        intermediate,
        event,
        residual,
        beta,
        gamma,
    })
}
