//! OHLCV minute-bar ingestion and conversion to analysis series.
//!
//! Rows that break the bar invariants are dropped, never repaired; a repair
//! would plant exactly the kind of artificial structure the detector looks
//! for. Trading sessions are concatenated end to end, so the resulting series
//! has one sample per traded minute and no fill for overnight gaps.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use chrono::{Duration, NaiveDateTime};

use crate::error::{Error, Result};
use crate::series::TimeSeries;

pub const DATETIME_FORMAT: &str = "%Y-%m-%d %H:%M";

/// A gap this long or longer starts a new trading session.
pub const SESSION_BREAK_MINUTES: i64 = 60;

/// Column names of the input CSV.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OhlcSchema {
    pub datetime: String,
    pub open: String,
    pub high: String,
    pub low: String,
    pub close: String,
    pub volume: String,
}

impl Default for OhlcSchema {
    fn default() -> Self {
        Self {
            datetime: "datetime".into(),
            open: "open".into(),
            high: "high".into(),
            low: "low".into(),
            close: "close".into(),
            volume: "volume".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bar {
    pub timestamp: NaiveDateTime,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
    pub volume: f64,
}

impl Bar {
    /// Positive finite prices, `low <= min(open, close) <= max(open, close) <= high`,
    /// non-negative volume.
    pub fn is_valid(&self) -> bool {
        let prices = [self.open, self.high, self.low, self.close];
        prices.iter().all(|p| p.is_finite() && *p > 0.0)
            && self.volume.is_finite()
            && self.volume >= 0.0
            && self.low <= self.open.min(self.close)
            && self.open.max(self.close) <= self.high
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TickSeries {
    pub records: Vec<Bar>,
    pub instrument: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CleaningReport {
    pub n_records_in: usize,
    pub n_records_out: usize,
    /// Missing-minute gaps inside a session.
    pub n_gaps: usize,
    pub n_dropped_invalid: usize,
    pub n_dropped_duplicate: usize,
    pub sessions_detected: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PriceField {
    #[default]
    Close,
    Open,
    /// `(high + low) / 2`.
    Mid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SeriesTransform {
    #[default]
    Raw,
    Demean,
    /// `ln(p_t / p_{t-1})`, one sample shorter than the input.
    LogReturn,
}

fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    let s = s.trim();
    NaiveDateTime::parse_from_str(s, DATETIME_FORMAT)
        .or_else(|_| NaiveDateTime::parse_from_str(s, "%Y-%m-%d %H:%M:%S"))
        .ok()
}

/// Load and clean an OHLCV CSV with a header row.
pub fn load_ohlc_csv(path: &Path, schema: &OhlcSchema) -> Result<(TickSeries, CleaningReport)> {
    let file = File::open(path).map_err(|source| Error::FileUnreadable {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let headers = reader.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::SchemaMismatch(name.to_string()))
    };
    let cols = [
        column(&schema.datetime)?,
        column(&schema.open)?,
        column(&schema.high)?,
        column(&schema.low)?,
        column(&schema.close)?,
        column(&schema.volume)?,
    ];

    let mut report = CleaningReport::default();
    let mut records: Vec<Bar> = Vec::new();
    for row in reader.records() {
        let row = row?;
        report.n_records_in += 1;
        let field = |i: usize| row.get(cols[i]);
        let num = |i: usize| field(i).and_then(|s| s.parse::<f64>().ok());
        let bar = (|| {
            Some(Bar {
                timestamp: parse_timestamp(field(0)?)?,
                open: num(1)?,
                high: num(2)?,
                low: num(3)?,
                close: num(4)?,
                volume: num(5)?,
            })
        })();
        let Some(bar) = bar.filter(Bar::is_valid) else {
            report.n_dropped_invalid += 1;
            continue;
        };
        match records.last() {
            Some(prev) if bar.timestamp == prev.timestamp => report.n_dropped_duplicate += 1,
            Some(prev) if bar.timestamp < prev.timestamp => report.n_dropped_invalid += 1,
            _ => records.push(bar),
        }
    }
    if records.is_empty() {
        return Err(Error::NoValidRows(path.to_path_buf()));
    }

    report.n_records_out = records.len();
    report.sessions_detected = 1;
    for pair in records.windows(2) {
        let gap = pair[1].timestamp - pair[0].timestamp;
        if gap >= Duration::minutes(SESSION_BREAK_MINUTES)
            || pair[1].timestamp.date() != pair[0].timestamp.date()
        {
            report.sessions_detected += 1;
        } else if gap > Duration::minutes(1) {
            report.n_gaps += 1;
        }
    }
    let instrument = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok((
        TickSeries {
            records,
            instrument,
        },
        report,
    ))
}

/// Concatenate sessions into a unit-interval series of one price field.
pub fn build_series(
    ticks: &TickSeries,
    field: PriceField,
    transform: SeriesTransform,
) -> Result<TimeSeries> {
    if ticks.records.len() < 2 {
        return Err(Error::TooShort(ticks.records.len()));
    }
    let prices: Vec<f64> = ticks
        .records
        .iter()
        .map(|b| match field {
            PriceField::Close => b.close,
            PriceField::Open => b.open,
            PriceField::Mid => 0.5 * (b.high + b.low),
        })
        .collect();
    let values = match transform {
        SeriesTransform::Raw => prices,
        SeriesTransform::Demean => {
            let mean = prices.iter().sum::<f64>() / prices.len() as f64;
            prices.iter().map(|p| p - mean).collect()
        }
        SeriesTransform::LogReturn => {
            if prices.len() < 3 {
                return Err(Error::TooShort(ticks.records.len()));
            }
            prices.windows(2).map(|w| (w[1] / w[0]).ln()).collect()
        }
    };
    TimeSeries::from_values(
        values,
        format!("{} {field:?} {transform:?}", ticks.instrument),
    )
}

/// Minute bars whose closes are `closes`, laid out in weekday sessions of
/// `session_minutes` starting at `start`. Each bar opens at the previous close
/// and its high/low bracket open and close by `spread`.
pub fn bars_from_closes(
    closes: &[f64],
    start: NaiveDateTime,
    session_minutes: usize,
    spread: f64,
    instrument: impl Into<String>,
) -> TickSeries {
    use chrono::{Datelike, Weekday};
    let mut records = Vec::with_capacity(closes.len());
    let mut day_start = start;
    let mut minute = 0usize;
    let mut prev_close = closes.first().copied().unwrap_or(0.0);
    for &close in closes {
        if minute == session_minutes.max(1) {
            minute = 0;
            day_start += Duration::days(1);
            while matches!(day_start.weekday(), Weekday::Sat | Weekday::Sun) {
                day_start += Duration::days(1);
            }
        }
        let open = prev_close;
        records.push(Bar {
            timestamp: day_start + Duration::minutes(minute as i64),
            open,
            high: open.max(close) + spread,
            low: open.min(close) - spread,
            close,
            volume: 1000.0,
        });
        prev_close = close;
        minute += 1;
    }
    TickSeries {
        records,
        instrument: instrument.into(),
    }
}

/// Write bars in the default schema.
pub fn write_ohlc_csv(path: &Path, ticks: &TickSeries) -> Result<()> {
    let mut out = std::io::BufWriter::new(File::create(path)?);
    writeln!(out, "datetime,open,high,low,close,volume")?;
    for b in &ticks.records {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            b.timestamp.format(DATETIME_FORMAT),
            b.open,
            b.high,
            b.low,
            b.close,
            b.volume
        )?;
    }
    out.flush()?;
    Ok(())
}
