//! Text formats for series and decomposition traces.
//!
//! Series CSV: header `timestamp,value`; RFC 3339 timestamps, strictly
//! increasing at a constant period with no jitter; an empty value is a missing
//! sample.
//!
//! Trace CSV: `index,timestamp,y,trend,seasonal,seasonal_trend,dst_seasonal,event,residual`,
//! one row per sample. Cells outside a component's domain, and missing
//! values, are empty.

use std::io::{Read, Write};

use chrono::{DateTime, SecondsFormat, TimeDelta, Utc};

use crate::decompose::DecompositionResult;
use crate::error::{Error, Result};
use crate::series::{Component, TimeSeries};

fn parse_err(line: u64, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("line {line}: {msg}"))
}

/// Reads a `timestamp,value` CSV. Errors name the offending line.
pub fn read_series_csv(reader: impl Read) -> Result<TimeSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers().map_err(|e| parse_err(1, e))?.clone();
    if headers.len() != 2 || &headers[0] != "timestamp" || &headers[1] != "value" {
        return Err(parse_err(1, "expected header `timestamp,value`"));
    }

    let mut times: Vec<DateTime<Utc>> = Vec::new();
    let mut values = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e)
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 2 {
            return Err(parse_err(line, format!("expected 2 fields, got {}", record.len())));
        }
        let t = DateTime::parse_from_rfc3339(&record[0])
            .map_err(|e| parse_err(line, format!("bad timestamp `{}`: {e}", &record[0])))?
            .with_timezone(&Utc);
        let v = match &record[1] {
            "" => None,
            s => {
                let x: f64 = s
                    .parse()
                    .map_err(|_| parse_err(line, format!("bad value `{s}`")))?;
                if !x.is_finite() {
                    return Err(parse_err(line, format!("value `{s}` is not finite")));
                }
                Some(x)
            }
        };
        if let Some(&prev) = times.last() {
            let step = t - prev;
            if step <= TimeDelta::zero() {
                return Err(parse_err(line, "timestamps must be strictly increasing"));
            }
            if times.len() >= 2 && step != times[1] - times[0] {
                return Err(parse_err(
                    line,
                    format!("sampling step {step} differs from {}", times[1] - times[0]),
                ));
            }
        }
        times.push(t);
        values.push(v);
    }
    let Some(&start) = times.first() else {
        return Err(parse_err(1, "no samples"));
    };
    let period = if times.len() >= 2 {
        times[1] - times[0]
    } else {
        TimeDelta::minutes(1)
    };
    TimeSeries::new(start, period, values)
}

fn fmt_time(t: DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::AutoSi, true)
}

fn fmt_value(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes a `timestamp,value` CSV that [`read_series_csv`] parses back exactly.
pub fn write_series_csv(series: &TimeSeries, writer: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::Parse(e.to_string());
    w.write_record(["timestamp", "value"]).map_err(io)?;
    for (i, v) in series.values().iter().enumerate() {
        w.write_record([fmt_time(series.time(i + 1)), fmt_value(*v)])
            .map_err(io)?;
    }
    w.flush().map_err(|e| Error::Parse(e.to_string()))
}

/// Trace column names.
pub const TRACE_HEADER: [&str; 9] = [
    "index",
    "timestamp",
    "y",
    "trend",
    "seasonal",
    "seasonal_trend",
    "dst_seasonal",
    "event",
    "residual",
];

/// Writes the columnar decomposition trace of `series`.
pub fn write_trace(series: &TimeSeries, d: &DecompositionResult, writer: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::Parse(e.to_string());
    w.write_record(TRACE_HEADER).map_err(io)?;
    let cell = |c: Option<&Component>, k: usize| fmt_value(c.and_then(|c| c.get(k)));
    for k in 1..=series.len() {
        w.write_record([
            k.to_string(),
            fmt_time(series.time(k)),
            fmt_value(series.get(k)),
            cell(Some(&d.trend), k),
            cell(Some(&d.seasonal), k),
            cell(Some(&d.seasonal_trend), k),
            cell(Some(&d.dst_seasonal), k),
            cell(d.event.as_ref(), k),
            cell(Some(&d.residual), k),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::Parse(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reads_missing_cells() {
        let text = "timestamp,value\n2024-01-01T00:00:00Z,1.5\n2024-01-01T00:01:00Z,\n2024-01-01T00:02:00Z,-3\n";
        let s = read_series_csv(text.as_bytes()).unwrap();
        assert_eq!(s.values(), &[Some(1.5), None, Some(-3.0)]);
        assert_eq!(s.period(), TimeDelta::minutes(1));
    }

    #[test]
    fn errors_name_the_line() {
        let bad_value = "timestamp,value\n2024-01-01T00:00:00Z,1\n2024-01-01T00:01:00Z,abc\n";
        let e = read_series_csv(bad_value.as_bytes()).unwrap_err().to_string();
        assert!(e.contains("line 3"), "{e}");
        let jitter = "timestamp,value\n2024-01-01T00:00:00Z,1\n2024-01-01T00:01:00Z,1\n2024-01-01T00:02:01Z,1\n";
        let e = read_series_csv(jitter.as_bytes()).unwrap_err().to_string();
        assert!(e.contains("line 4"), "{e}");
        let backwards = "timestamp,value\n2024-01-01T00:01:00Z,1\n2024-01-01T00:00:00Z,1\n";
        assert!(read_series_csv(backwards.as_bytes()).is_err());
        assert!(read_series_csv("time,value\n".as_bytes()).is_err());
        assert!(read_series_csv("timestamp,value\n".as_bytes()).is_err());
        let ragged = "timestamp,value\n2024-01-01T00:00:00Z,1,2\n";
        assert!(read_series_csv(ragged.as_bytes()).unwrap_err().to_string().contains("line 2"));
    }

    proptest! {
        #[test]
        fn csv_round_trip(
            values in prop::collection::vec(prop::option::weighted(0.9, -1e12f64..1e12), 2..50),
            start in 0i64..4_000_000_000,
            period in 1i64..100_000,
        ) {
            let s = TimeSeries::new(
                DateTime::from_timestamp(start, 0).unwrap(),
                TimeDelta::seconds(period),
                values,
            ).unwrap();
            let mut buf = Vec::new();
            write_series_csv(&s, &mut buf).unwrap();
            prop_assert_eq!(read_series_csv(buf.as_slice()).unwrap(), s);
        }
    }
}
