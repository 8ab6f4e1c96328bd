//! Median primitives.
//!
//! Missing entries never take part in a median. An even number of present
//! values yields the mean of the two middle order statistics.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// Median of a window, skipping missing entries.
///
/// Returns `Ok(None)` when every entry is missing and [`Error::EmptyWindow`]
/// for a zero-length window.
pub fn median(window: &[Option<f64>]) -> Result<Option<f64>> {
    if window.is_empty() {
        return Err(Error::EmptyWindow);
    }
    let mut present: Vec<f64> = window.iter().flatten().copied().collect();
    Ok(median_in_place(&mut present))
}

/// Median of `values`, reordering them. `None` for an empty slice.
pub fn median_in_place(values: &mut [f64]) -> Option<f64> {
    let n = values.len();
    if n == 0 {
        return None;
    }
    let mid = n / 2;
    let (lower, upper, _) = values.select_nth_unstable_by(mid, f64::total_cmp);
    let upper = *upper;
    if n % 2 == 1 {
        Some(upper)
    } else {
        let lower = lower.iter().copied().max_by(f64::total_cmp).expect("n >= 2");
        Some(midpoint(lower, upper))
    }
}

#[inline]
pub(crate) fn midpoint(a: f64, b: f64) -> f64 {
    0.5 * (a + b)
}

/// Trailing moving median.
///
/// Output position `i` is the median of `values[i + 1 - window ..= i]`. With
/// `partial_prefix` the first `window - 1` positions use the shorter window
/// that is available and the output has the input's length; otherwise those
/// positions are dropped and the output has `len - window + 1` entries.
pub fn moving_median(values: &[Option<f64>], window: usize, partial_prefix: bool) -> Vec<Option<f64>> {
    assert!(window >= 1, "window must be positive");
    let mut out = Vec::with_capacity(values.len());
    let mut rolling = RollingMedian::new();
    for (i, v) in values.iter().enumerate() {
        if let Some(x) = v {
            rolling.insert(*x, i);
        }
        if i >= window {
            if let Some(old) = values[i - window] {
                rolling.remove(old, i - window);
            }
        }
        if partial_prefix || i + 1 >= window {
            out.push(rolling.median());
        }
    }
    out
}

#[derive(Debug, Clone, Copy)]
struct Key(f64, usize);

impl PartialEq for Key {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

/// Sliding-window median over a multiset split into a lower and upper half.
///
/// Every entry carries a caller-chosen tag (typically its position) so equal
/// values can be removed individually. The lower half holds the extra element
/// when the count is odd.
#[derive(Debug, Default, Clone)]
pub struct RollingMedian {
    lower: BTreeSet<Key>,
    upper: BTreeSet<Key>,
}

impl RollingMedian {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.lower.len() + self.upper.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn insert(&mut self, value: f64, tag: usize) {
        let key = Key(value, tag);
        match self.lower.last() {
            Some(top) if key > *top => self.upper.insert(key),
            _ => self.lower.insert(key),
        };
        self.rebalance();
    }

    /// Removes the entry inserted with `(value, tag)`. Returns false if absent.
    pub fn remove(&mut self, value: f64, tag: usize) -> bool {
        let key = Key(value, tag);
        let removed = self.lower.remove(&key) || self.upper.remove(&key);
        if removed {
            self.rebalance();
        }
        removed
    }

    pub fn median(&self) -> Option<f64> {
        let lo = self.lower.last()?.0;
        if self.lower.len() > self.upper.len() {
            Some(lo)
        } else {
            let hi = self.upper.first().expect("balanced halves").0;
            Some(midpoint(lo, hi))
        }
    }

    fn rebalance(&mut self) {
        while self.lower.len() > self.upper.len() + 1 {
            let k = self.lower.pop_last().expect("non-empty");
            self.upper.insert(k);
        }
        while self.upper.len() > self.lower.len() {
            let k = self.upper.pop_first().expect("non-empty");
            self.lower.insert(k);
        }
    }
}
