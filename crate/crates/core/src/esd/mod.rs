//! Generalized extreme Studentized deviate test for an unknown number of
//! outliers, with a classic (mean / standard deviation) and a robust
//! (median / median absolute deviation) z-score.
//!
//! Positions reported by the test are 1-based offsets into the sample slice
//! it was given. Missing entries are skipped but keep their positions.

mod student_t;

pub use student_t::{ln_gamma, regularized_beta, t_cdf, t_pdf, t_quantile};

use serde::{Deserialize, Serialize};

pub use crate::config::{ZScoreMode, MAD_NORMAL_SCALE};
use crate::error::{invalid, Error, Result};
use crate::median::median_in_place;

/// One removal step of the test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EsdIteration {
    /// 1-based position of the removed observation in the sample.
    pub position: usize,
    pub value: f64,
    pub zscore: f64,
    pub critical: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EsdOutcome {
    /// Present observations tested.
    pub sample_size: usize,
    pub iterations: Vec<EsdIteration>,
    /// Largest `i` with `zscore_i > critical_i`; zero when there is none.
    pub num_outliers: usize,
}

impl EsdOutcome {
    /// Iterations declared outliers, in removal order.
    pub fn outliers(&self) -> &[EsdIteration] {
        &self.iterations[..self.num_outliers]
    }

    /// Sorted positions of the outliers.
    pub fn flagged(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.outliers().iter().map(|it| it.position).collect();
        v.sort_unstable();
        v
    }
}

/// Critical value of removal step `i` (1-based) for `n` observations:
///
/// `lambda_i = (n - i) t / sqrt((n - i - 1 + t^2) (n - i + 1))`, where `t` is
/// the `1 - alpha / (2 (n - i + 1))` quantile of Student's t with `n - i - 1`
/// degrees of freedom.
pub fn critical_value(n: usize, i: usize, alpha: f64) -> Result<f64> {
    if i == 0 || n < i + 2 {
        return Err(invalid(
            "i",
            format!("step {i} needs n >= i + 2 observations, got {n}"),
        ));
    }
    let remaining = (n - i) as f64;
    let p = 1.0 - alpha / (2.0 * (remaining + 1.0));
    let t = t_quantile(p, remaining - 1.0)?;
    Ok(remaining * t / ((remaining - 1.0 + t * t) * (remaining + 1.0)).sqrt())
}

/// Scale used in place of a zero spread: `max(1e-12, 1e-12 * |centre|)`.
fn zero_scale_floor(centre: f64) -> f64 {
    (1e-12 * centre.abs()).max(1e-12)
}

/// Runs `max_outliers` removal steps of the generalized ESD test.
///
/// The sample must hold at least `max_outliers + 3` present values. The
/// observation with the largest absolute deviation from the centre is removed
/// at each step; ties go to the lowest position.
pub fn esd_test(
    sample: &[Option<f64>],
    max_outliers: usize,
    alpha: f64,
    mode: ZScoreMode,
) -> Result<EsdOutcome> {
    if max_outliers == 0 {
        return Err(invalid("max_outliers", "must be at least 1"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid("alpha", format!("{alpha} is outside (0, 1)")));
    }
    // Sorted by (value, position): the extreme deviations sit at either end.
    let mut working: Vec<(f64, usize)> = sample
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.map(|x| (x, i + 1)))
        .collect();
    let n = working.len();
    if n == 0 && !sample.is_empty() {
        return Err(Error::AllMissing("esd sample"));
    }
    if n < max_outliers + 3 {
        return Err(Error::InsufficientData {
            stage: "esd test",
            required: max_outliers + 3,
            available: n,
        });
    }
    working.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut scratch = Vec::with_capacity(n);
    let mut iterations = Vec::with_capacity(max_outliers);
    for i in 1..=max_outliers {
        let (centre, scale) = match mode {
            ZScoreMode::RobustMad | ZScoreMode::RobustMadRaw => {
                let centre = sorted_median(&working);
                scratch.clear();
                scratch.extend(working.iter().map(|(v, _)| (v - centre).abs()));
                let mad = median_in_place(&mut scratch).expect("non-empty");
                let factor = if mode == ZScoreMode::RobustMad { MAD_NORMAL_SCALE } else { 1.0 };
                (centre, factor * mad)
            }
            ZScoreMode::Classic => mean_and_sd(&working),
        };
        let scale = if scale > 0.0 { scale } else { zero_scale_floor(centre) };

        let lo = 0;
        let last = working.len() - 1;
        let max_value = working[last].0;
        let hi = working.partition_point(|(v, _)| *v < max_value).min(last);
        let dev_lo = (working[lo].0 - centre).abs();
        let dev_hi = (working[hi].0 - centre).abs();
        let pick = if dev_hi > dev_lo || (dev_hi == dev_lo && working[hi].1 < working[lo].1) {
            hi
        } else {
            lo
        };
        let (value, position) = working.remove(pick);
        iterations.push(EsdIteration {
            position,
            value,
            zscore: dev_lo.max(dev_hi) / scale,
            critical: critical_value(n, i, alpha)?,
        });
    }

    let num_outliers = iterations
        .iter()
        .rposition(|it| it.zscore > it.critical)
        .map_or(0, |i| i + 1);
    Ok(EsdOutcome {
        sample_size: n,
        iterations,
        num_outliers,
    })
}

fn sorted_median(sorted: &[(f64, usize)]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2].0
    } else {
        crate::median::midpoint(sorted[n / 2 - 1].0, sorted[n / 2].0)
    }
}

fn mean_and_sd(values: &[(f64, usize)]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().map(|(v, _)| v).sum::<f64>() / n;
    let ss: f64 = values.iter().map(|(v, _)| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}
