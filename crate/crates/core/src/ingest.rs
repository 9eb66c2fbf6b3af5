//! Reading intraday price files and daily realized-measure files.
//!
//! Tick files are plain CSV with a `timestamp,price` header and an optional
//! third `trade_date` column carrying the vendor's session date (used for
//! evening sessions that cross midnight). Lines starting with `#` are
//! comments. Measures files follow `date,rv[,rsv_plus,rsv_minus,bv,ret]`
//! with variances in raw squared-log-return units.

use std::io::{BufRead, Read};

use chrono::{NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::DailyMeasures;

pub const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M:%S";
pub const DATE_FORMAT: &str = "%Y-%m-%d";

/// Default minimum number of ticks a day needs to become a session.
pub const DEFAULT_MIN_OBS: usize = 10;

/// Relative tolerance on `rsv_plus + rsv_minus == rv` for loaded rows.
const RSV_SUM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceTick {
    pub timestamp: NaiveDateTime,
    pub price: f64,
    /// Vendor trading date, when the file carries one.
    pub trade_date: Option<NaiveDate>,
}

impl PriceTick {
    /// The date this tick's session belongs to.
    pub fn session_date(&self) -> NaiveDate {
        self.trade_date.unwrap_or_else(|| self.timestamp.date())
    }
}

/// One trading day of intraday log returns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntradaySession {
    pub date: NaiveDate,
    pub returns: Vec<f64>,
}

impl IntradaySession {
    pub fn n(&self) -> usize {
        self.returns.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub market: String,
    pub sessions: Vec<IntradaySession>,
}

impl Dataset {
    /// Builds a dataset, checking that sessions are non-empty and strictly increasing by date.
    pub fn new(market: impl Into<String>, sessions: Vec<IntradaySession>) -> Result<Self> {
        for s in &sessions {
            if s.returns.is_empty() {
                return Err(Error::Invalid(format!("session {} has no returns", s.date)));
            }
        }
        for w in sessions.windows(2) {
            if w[1].date <= w[0].date {
                return Err(Error::Invalid(format!(
                    "sessions out of order or duplicated: {} after {}",
                    w[1].date, w[0].date
                )));
            }
        }
        Ok(Dataset { market: market.into(), sessions })
    }

    pub fn len(&self) -> usize {
        self.sessions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sessions.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DroppedDay {
    pub date: NaiveDate,
    pub ticks: usize,
}

/// Output of [`sessions_from_ticks`]: the dataset plus the days that were
/// too thin to keep.
#[derive(Debug, Clone)]
pub struct Sessionized {
    pub dataset: Dataset,
    pub dropped: Vec<DroppedDay>,
}

/// Parses a tick CSV stream.
///
/// Equal consecutive timestamps are accepted here and resolved by
/// [`sessions_from_ticks`] (last tick wins); a timestamp earlier than its
/// predecessor is an error.
pub fn parse_ticks<R: BufRead>(reader: R) -> Result<Vec<PriceTick>> {
    let mut ticks: Vec<PriceTick> = Vec::new();
    let mut has_trade_date = None;

    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();

        let Some(with_date) = has_trade_date else {
            has_trade_date = Some(match fields.as_slice() {
                ["timestamp", "price"] => false,
                ["timestamp", "price", "trade_date"] => true,
                _ => {
                    return Err(Error::parse(
                        lineno,
                        format!("expected header `timestamp,price[,trade_date]`, found `{line}`"),
                    ))
                }
            });
            continue;
        };

        let expected = if with_date { 3 } else { 2 };
        if fields.len() != expected {
            return Err(Error::parse(
                lineno,
                format!("expected {expected} fields, found {}", fields.len()),
            ));
        }
        let timestamp = NaiveDateTime::parse_from_str(fields[0], TIMESTAMP_FORMAT)
            .map_err(|e| Error::parse(lineno, format!("bad timestamp `{}`: {e}", fields[0])))?;
        let price: f64 = fields[1]
            .parse()
            .map_err(|_| Error::parse(lineno, format!("bad price `{}`", fields[1])))?;
        if !(price > 0.0 && price.is_finite()) {
            return Err(Error::parse(lineno, format!("price must be positive, found {price}")));
        }
        let trade_date = if with_date {
            Some(
                NaiveDate::parse_from_str(fields[2], DATE_FORMAT).map_err(|e| {
                    Error::parse(lineno, format!("bad trade_date `{}`: {e}", fields[2]))
                })?,
            )
        } else {
            None
        };
        if let Some(prev) = ticks.last() {
            if timestamp < prev.timestamp {
                return Err(Error::parse(
                    lineno,
                    format!("timestamp {timestamp} precedes {}", prev.timestamp),
                ));
            }
        }
        ticks.push(PriceTick { timestamp, price, trade_date });
    }
    Ok(ticks)
}

/// Groups ticks into per-day sessions of within-day log returns.
///
/// No return crosses a session boundary. Days with fewer than `min_obs`
/// ticks (and always days with fewer than two) are dropped and reported.
pub fn sessions_from_ticks(
    ticks: &[PriceTick],
    min_obs: usize,
    market: impl Into<String>,
) -> Result<Sessionized> {
    let threshold = min_obs.max(2);
    let mut sessions = Vec::new();
    let mut dropped = Vec::new();
    let mut last_date: Option<NaiveDate> = None;

    let mut start = 0;
    while start < ticks.len() {
        let date = ticks[start].session_date();
        let mut end = start + 1;
        while end < ticks.len() && ticks[end].session_date() == date {
            end += 1;
        }

        // last tick wins on duplicate timestamps
        let mut day: Vec<&PriceTick> = Vec::with_capacity(end - start);
        for t in &ticks[start..end] {
            match day.last_mut() {
                Some(last) if last.timestamp == t.timestamp => *last = t,
                _ => day.push(t),
            }
        }

        if let Some(prev) = last_date {
            if date <= prev {
                return Err(Error::Invalid(format!(
                    "ticks for {date} are not contiguous (seen after {prev})"
                )));
            }
        }
        last_date = Some(date);

        if day.len() < threshold {
            log::warn!("dropping {date}: {} ticks below minimum {threshold}", day.len());
            dropped.push(DroppedDay { date, ticks: day.len() });
        } else {
            let returns = day.windows(2).map(|w| w[1].price.ln() - w[0].price.ln()).collect();
            sessions.push(IntradaySession { date, returns });
        }
        start = end;
    }

    Ok(Sessionized { dataset: Dataset::new(market, sessions)?, dropped })
}

/// Writes a tick CSV. `trade_date` is emitted only if every tick has one.
pub fn write_ticks<W: std::io::Write>(mut w: W, ticks: &[PriceTick], comment: &str) -> Result<()> {
    let with_date = !ticks.is_empty() && ticks.iter().all(|t| t.trade_date.is_some());
    writeln!(w, "# {comment}")?;
    if with_date {
        writeln!(w, "timestamp,price,trade_date")?;
    } else {
        writeln!(w, "timestamp,price")?;
    }
    for t in ticks {
        let ts = t.timestamp.format(TIMESTAMP_FORMAT);
        match t.trade_date {
            Some(d) if with_date => writeln!(w, "{ts},{:.16e},{}", t.price, d.format(DATE_FORMAT))?,
            _ => writeln!(w, "{ts},{:.16e}", t.price)?,
        }
    }
    Ok(())
}

/// Rebuilds a tick path from a dataset's returns, one fresh price level per
/// session starting at `open`. Ticks are spread evenly through the calendar day.
pub fn ticks_from_dataset(dataset: &Dataset, open: f64) -> Vec<PriceTick> {
    let mut out = Vec::new();
    for s in &dataset.sessions {
        let step = 86_399 / s.n().max(1) as i64;
        let midnight = s.date.and_hms_opt(0, 0, 0).expect("valid midnight");
        let mut log_price = open.ln();
        out.push(PriceTick { timestamp: midnight, price: open, trade_date: None });
        for (j, r) in s.returns.iter().enumerate() {
            log_price += r;
            out.push(PriceTick {
                timestamp: midnight + chrono::Duration::seconds(step * (j as i64 + 1)),
                price: log_price.exp(),
                trade_date: None,
            });
        }
    }
    out
}

fn parse_optional(
    record: &csv::StringRecord,
    col: Option<usize>,
    line: usize,
    name: &str,
) -> Result<Option<f64>> {
    let Some(i) = col else { return Ok(None) };
    let raw = record.get(i).unwrap_or("").trim();
    if raw.is_empty() || raw.eq_ignore_ascii_case("nan") {
        return Ok(None);
    }
    raw.parse::<f64>()
        .map(Some)
        .map_err(|_| Error::parse(line, format!("bad {name} `{raw}`")))
}

/// Reads a measures CSV. Absent optional columns (or empty cells) leave the
/// corresponding fields unavailable.
pub fn load_measures<R: Read>(reader: R) -> Result<Vec<DailyMeasures>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let date_col = find("date").ok_or_else(|| Error::Invalid("missing column `date`".into()))?;
    let rv_col = find("rv").ok_or_else(|| Error::Invalid("missing column `rv`".into()))?;
    let plus_col = find("rsv_plus");
    let minus_col = find("rsv_minus");
    let bv_col = find("bv");
    let ret_col = find("ret");

    let mut out: Vec<DailyMeasures> = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let date_raw = record.get(date_col).unwrap_or("");
        let date = NaiveDate::parse_from_str(date_raw, DATE_FORMAT)
            .map_err(|e| Error::parse(line, format!("bad date `{date_raw}`: {e}")))?;
        let rv = parse_optional(&record, Some(rv_col), line, "rv")?
            .ok_or_else(|| Error::parse(line, "rv is mandatory"))?;
        if !(rv >= 0.0) || !rv.is_finite() {
            return Err(Error::parse(line, format!("rv must be non-negative, found {rv}")));
        }
        let rsv_plus = parse_optional(&record, plus_col, line, "rsv_plus")?;
        let rsv_minus = parse_optional(&record, minus_col, line, "rsv_minus")?;
        let bv = parse_optional(&record, bv_col, line, "bv")?;
        let ret = parse_optional(&record, ret_col, line, "ret")?;

        for (name, v) in [("rsv_plus", rsv_plus), ("rsv_minus", rsv_minus), ("bv", bv)] {
            if let Some(v) = v {
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(Error::parse(line, format!("{name} must be non-negative, found {v}")));
                }
            }
        }
        let semivariances = match (rsv_plus, rsv_minus) {
            (Some(p), Some(m)) => {
                if (p + m - rv).abs() > RSV_SUM_TOLERANCE * rv.max(f64::MIN_POSITIVE) {
                    return Err(Error::parse(
                        line,
                        format!("rsv_plus + rsv_minus = {} deviates from rv = {rv}", p + m),
                    ));
                }
                Some((p, m))
            }
            (None, None) => None,
            _ => return Err(Error::parse(line, "rsv_plus and rsv_minus must come together")),
        };
        if let Some(prev) = out.last() {
            if date <= prev.date {
                return Err(Error::parse(line, format!("date {date} not after {}", prev.date)));
            }
        }
        out.push(DailyMeasures {
            date,
            rv,
            bv,
            rsv_plus: semivariances.map(|s| s.0),
            rsv_minus: semivariances.map(|s| s.1),
            ret,
            n: None,
        });
    }
    Ok(out)
}
