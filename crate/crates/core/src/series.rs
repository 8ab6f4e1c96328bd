//! Sampled input series and index-aligned component series.
//!
//! Indices at every public boundary are 1-based, so sample `k` of a series of
//! length `len` satisfies `1 <= k <= len` and lives at `values[k - 1]`.

use chrono::{DateTime, TimeDelta, Utc};

use crate::error::{invalid, Error, Result};

/// A uniformly sampled metric. `None` marks a missing sample.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    start: DateTime<Utc>,
    period: TimeDelta,
    values: Vec<Option<f64>>,
}

impl TimeSeries {
    pub fn new(start: DateTime<Utc>, period: TimeDelta, values: Vec<Option<f64>>) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("values", "series must hold at least one sample"));
        }
        if period <= TimeDelta::zero() {
            return Err(invalid("sample_period", "must be positive"));
        }
        if let Some(pos) = values.iter().position(|v| v.is_some_and(|x| !x.is_finite())) {
            return Err(invalid(
                "values",
                format!("sample {} is not finite", pos + 1),
            ));
        }
        Ok(Self {
            start,
            period,
            values,
        })
    }

    /// Fully observed series starting at the Unix epoch with a one-minute period.
    pub fn from_values(values: impl IntoIterator<Item = f64>) -> Result<Self> {
        Self::new(
            DateTime::UNIX_EPOCH,
            TimeDelta::minutes(1),
            values.into_iter().map(Some).collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always false; a series holds at least one sample.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    pub fn start(&self) -> DateTime<Utc> {
        self.start
    }

    pub fn period(&self) -> TimeDelta {
        self.period
    }

    /// Value at 1-based index `k`; `None` when missing or out of range.
    pub fn get(&self, k: usize) -> Option<f64> {
        k.checked_sub(1)
            .and_then(|i| self.values.get(i))
            .copied()
            .flatten()
    }

    /// Timestamp of 1-based index `k`.
    pub fn time(&self, k: usize) -> DateTime<Utc> {
        self.start + self.period * (k as i32 - 1)
    }

    /// First and last sample timestamps.
    pub fn span(&self) -> (DateTime<Utc>, DateTime<Utc>) {
        (self.start, self.time(self.len()))
    }

    pub fn present_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }

    /// 1-based index of `t` when it falls exactly on the sampling grid.
    pub fn index_of(&self, t: DateTime<Utc>) -> Option<usize> {
        let offset = t - self.start;
        let period = self.period.num_milliseconds();
        let off = offset.num_milliseconds();
        if off < 0 || off % period != 0 {
            return None;
        }
        let k = (off / period) as usize + 1;
        (k <= self.len()).then_some(k)
    }

    /// Sub-series over the inclusive 1-based range `[from, to]`.
    pub fn slice(&self, from: usize, to: usize) -> Result<Self> {
        if from == 0 || from > to || to > self.len() {
            return Err(invalid(
                "range",
                format!("[{from}, {to}] is not within [1, {}]", self.len()),
            ));
        }
        Ok(Self {
            start: self.time(from),
            period: self.period,
            values: self.values[from - 1..to].to_vec(),
        })
    }
}

/// A component series defined on the contiguous 1-based domain
/// `[start, start + len - 1]` of its parent series.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    start: usize,
    values: Vec<Option<f64>>,
}

impl Component {
    pub fn new(start: usize, values: Vec<Option<f64>>) -> Self {
        assert!(start >= 1, "component indices are 1-based");
        Self { start, values }
    }

    /// First index of the domain.
    pub fn start(&self) -> usize {
        self.start
    }

    /// Last index of the domain. Equals `start - 1` for an empty component.
    pub fn end(&self) -> usize {
        self.start + self.values.len() - 1
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    pub fn contains(&self, k: usize) -> bool {
        k >= self.start && k < self.start + self.values.len()
    }

    /// Value at index `k`; `None` when missing or outside the domain.
    pub fn get(&self, k: usize) -> Option<f64> {
        if self.contains(k) {
            self.values[k - self.start]
        } else {
            None
        }
    }

    /// `(k, value)` pairs over the domain.
    pub fn iter(&self) -> impl Iterator<Item = (usize, Option<f64>)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, v)| (self.start + i, *v))
    }

    /// The same component restricted to `[from, self.end()]`.
    pub(crate) fn tail_from(&self, from: usize) -> Result<Self> {
        if from < self.start || from > self.end() + 1 {
            return Err(Error::Misaligned(format!(
                "cannot restrict [{}, {}] to start at {from}",
                self.start,
                self.end()
            )));
        }
        Ok(Self {
            start: from,
            values: self.values[from - self.start..].to_vec(),
        })
    }

    pub(crate) fn check_same_domain(&self, other: &Self, what: &str) -> Result<()> {
        if self.start != other.start || self.len() != other.len() {
            return Err(Error::Misaligned(format!(
                "{what}: [{}, {}] vs [{}, {}]",
                self.start,
                self.end(),
                other.start,
                other.end()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_and_non_finite() {
        assert!(TimeSeries::from_values(Vec::<f64>::new()).is_err());
        assert!(TimeSeries::from_values([1.0, f64::INFINITY]).is_err());
        assert!(TimeSeries::from_values([1.0, f64::NAN]).is_err());
    }

    #[test]
    fn one_based_timestamps() {
        let y = TimeSeries::from_values([1.0, 2.0, 3.0]).unwrap();
        assert_eq!(y.time(1), DateTime::UNIX_EPOCH);
        assert_eq!(y.time(3), DateTime::UNIX_EPOCH + TimeDelta::minutes(2));
        assert_eq!(y.index_of(y.time(2)), Some(2));
        assert_eq!(y.index_of(y.time(2) + TimeDelta::seconds(1)), None);
        assert_eq!(y.get(0), None);
        assert_eq!(y.get(3), Some(3.0));
    }

    #[test]
    fn component_domain() {
        let c = Component::new(4, vec![Some(1.0), None, Some(3.0)]);
        assert_eq!((c.start(), c.end()), (4, 6));
        assert!(!c.contains(3) && c.contains(6) && !c.contains(7));
        assert_eq!(c.get(6), Some(3.0));
        assert_eq!(c.get(5), None);
        let t = c.tail_from(5).unwrap();
        assert_eq!((t.start(), t.len()), (5, 2));
    }
}
