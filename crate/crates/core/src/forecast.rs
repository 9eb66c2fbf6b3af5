//! Rolling-window one-day-ahead forecasts of `ln RV`.
//!
//! The window counts regression rows. For each origin the model is
//! re-estimated on the `window` rows ending at the origin and the next
//! row's target is predicted from its regressors.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimation::ols;
use crate::features::{ModelSpec, RowSet};
use crate::ingest::DATE_FORMAT;
use crate::measures::DailyMeasures;
use crate::models::common_row_sets;

pub const DEFAULT_WINDOW: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ForecastRecord {
    pub date: NaiveDate,
    pub model: ModelSpec,
    /// Predicted `ln RV`.
    pub predicted: f64,
    /// Realized `ln RV`.
    pub realized: f64,
    pub window_start: NaiveDate,
    pub window_end: NaiveDate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkippedForecast {
    pub date: NaiveDate,
    pub model: ModelSpec,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ForecastRun {
    pub records: Vec<ForecastRecord>,
    pub skipped: Vec<SkippedForecast>,
}

/// Rolls a fixed window over `rows`, producing `rows.len() - window` forecasts
/// minus any windows whose fit was singular.
pub fn rolling_on_rows(rows: &RowSet, window: usize) -> Result<ForecastRun> {
    if window == 0 {
        return Err(Error::Invalid("window must be positive".into()));
    }
    if rows.len() < window + 1 {
        return Err(Error::InsufficientData(format!(
            "{}: {} usable rows, window {window} needs at least {}",
            rows.model,
            rows.len(),
            window + 1
        )));
    }
    let outcomes: Vec<std::result::Result<ForecastRecord, SkippedForecast>> = (window..rows.len())
        .into_par_iter()
        .map(|target| {
            let range = target - window..target;
            let row = &rows.rows[target];
            let fitted = ols(&rows.design(range.clone()), &rows.targets(range.clone()), &rows.labels);
            match fitted {
                Ok(sol) => Ok(ForecastRecord {
                    date: row.date,
                    model: rows.model,
                    predicted: row.regressors.iter().zip(&sol.coefficients).map(|(x, b)| x * b).sum(),
                    realized: row.target,
                    window_start: rows.rows[range.start].date,
                    window_end: rows.rows[range.end - 1].date,
                }),
                Err(e) if e.is_numerical() || matches!(e, Error::InsufficientData(_)) => {
                    Err(SkippedForecast { date: row.date, model: rows.model, reason: e.to_string() })
                }
                Err(e) => Err(SkippedForecast {
                    date: row.date,
                    model: rows.model,
                    reason: format!("unexpected: {e}"),
                }),
            }
        })
        .collect();
    let mut run = ForecastRun::default();
    for o in outcomes {
        match o {
            Ok(r) => run.records.push(r),
            Err(s) => {
                log::warn!("{} {}: window skipped: {}", s.model, s.date, s.reason);
                run.skipped.push(s);
            }
        }
    }
    Ok(run)
}

/// Rolling forecasts of one model on all rows it can form.
pub fn rolling_forecast(measures: &[DailyMeasures], spec: ModelSpec, window: usize) -> Result<ForecastRun> {
    rolling_on_rows(&crate::features::build_rows(measures, spec)?, window)
}

/// Paired forecasts of several models on one set of target dates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForecastPanel {
    pub window: usize,
    pub models: Vec<ModelSpec>,
    pub dates: Vec<NaiveDate>,
    /// One record per model per date, in `models` order.
    pub records: BTreeMap<ModelSpec, Vec<ForecastRecord>>,
    pub skipped: Vec<SkippedForecast>,
}

impl ForecastPanel {
    pub fn for_model(&self, model: ModelSpec) -> Option<&[ForecastRecord]> {
        self.records.get(&model).map(Vec::as_slice)
    }

    /// Records ordered by date, then model.
    pub fn ordered(&self) -> Vec<ForecastRecord> {
        let mut out = Vec::with_capacity(self.dates.len() * self.models.len());
        for i in 0..self.dates.len() {
            for m in &self.models {
                out.push(self.records[m][i]);
            }
        }
        out
    }

    /// Builds a panel from loose records, keeping dates every model covers.
    pub fn from_records(window: usize, records: Vec<ForecastRecord>) -> Result<Self> {
        let mut by_model: BTreeMap<ModelSpec, Vec<ForecastRecord>> = BTreeMap::new();
        for r in records {
            by_model.entry(r.model).or_default().push(r);
        }
        if by_model.is_empty() {
            return Err(Error::InsufficientData("no forecast records".into()));
        }
        let mut common: Option<BTreeSet<NaiveDate>> = None;
        for recs in by_model.values_mut() {
            recs.sort_by_key(|r| r.date);
            if recs.windows(2).any(|w| w[0].date == w[1].date) {
                return Err(Error::Invalid(format!("duplicate forecast dates for {}", recs[0].model)));
            }
            let d: BTreeSet<NaiveDate> = recs.iter().map(|r| r.date).collect();
            common = Some(match common {
                None => d,
                Some(c) => c.intersection(&d).copied().collect(),
            });
        }
        let common = common.unwrap_or_default();
        for recs in by_model.values_mut() {
            recs.retain(|r| common.contains(&r.date));
        }
        Ok(ForecastPanel {
            window,
            models: by_model.keys().copied().collect(),
            dates: common.into_iter().collect(),
            records: by_model,
            skipped: Vec::new(),
        })
    }
}

/// Rolling forecasts for `models` on their common row set. A date skipped
/// by any model is dropped from all of them so comparisons stay paired.
pub fn rolling_panel(measures: &[DailyMeasures], models: &[ModelSpec], window: usize) -> Result<ForecastPanel> {
    let (sets, skipped_models, _) = common_row_sets(measures, models)?;
    for s in &skipped_models {
        log::warn!("forecast: skipping {}", s.reason);
    }
    if sets.is_empty() {
        return Err(Error::Unavailable("no model can be forecast on these measures".into()));
    }
    let runs: Vec<ForecastRun> = sets.iter().map(|s| rolling_on_rows(s, window)).collect::<Result<_>>()?;
    let dropped: BTreeSet<NaiveDate> = runs.iter().flat_map(|r| r.skipped.iter().map(|s| s.date)).collect();
    let mut records = BTreeMap::new();
    let mut skipped = Vec::new();
    for (set, run) in sets.iter().zip(runs) {
        let kept: Vec<ForecastRecord> = run.records.into_iter().filter(|r| !dropped.contains(&r.date)).collect();
        records.insert(set.model, kept);
        skipped.extend(run.skipped);
    }
    let models: Vec<ModelSpec> = sets.iter().map(|s| s.model).collect();
    let dates = records[&models[0]].iter().map(|r| r.date).collect();
    Ok(ForecastPanel { window, models, dates, records, skipped })
}

/// `date,model,predicted_lnrv,realized_lnrv`, ordered by date then model.
pub fn write_forecasts<W: Write>(mut w: W, panel: &ForecastPanel) -> Result<()> {
    writeln!(
        w,
        "# one-day-ahead rolling forecasts; window = {} rows; units: ln RV (raw squared log returns)",
        panel.window
    )?;
    writeln!(w, "date,model,predicted_lnrv,realized_lnrv")?;
    for r in panel.ordered() {
        writeln!(w, "{},{},{:.16e},{:.16e}", r.date.format(DATE_FORMAT), r.model, r.predicted, r.realized)?;
    }
    Ok(())
}

/// Plot-ready per-model series `date,predicted_lnrv,realized_lnrv`.
pub fn write_model_series<W: Write>(mut w: W, records: &[ForecastRecord]) -> Result<()> {
    let model = records.first().map(|r| r.model.name()).unwrap_or("");
    writeln!(w, "# {model} forecasts; units: ln RV (raw squared log returns)")?;
    writeln!(w, "date,predicted_lnrv,realized_lnrv")?;
    for r in records {
        writeln!(w, "{},{:.16e},{:.16e}", r.date.format(DATE_FORMAT), r.predicted, r.realized)?;
    }
    Ok(())
}

/// Reads a forecast CSV back. Window bounds are not stored in the file and
/// are set to the target date.
pub fn read_forecasts<R: Read>(reader: R) -> Result<Vec<ForecastRecord>> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Invalid(format!("forecast file lacks column `{name}`")))
    };
    let (dc, mc, pc, rc) = (col("date")?, col("model")?, col("predicted_lnrv")?, col("realized_lnrv")?);
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        let field = |i: usize| rec.get(i).unwrap_or("");
        let date = NaiveDate::parse_from_str(field(dc), DATE_FORMAT)
            .map_err(|e| Error::Parse { line, msg: format!("bad date: {e}") })?;
        let model: ModelSpec = field(mc).parse()?;
        let num = |i: usize| {
            field(i).parse::<f64>().map_err(|_| Error::Parse { line, msg: format!("bad number `{}`", field(i)) })
        };
        out.push(ForecastRecord {
            date,
            model,
            predicted: num(pc)?,
            realized: num(rc)?,
            window_start: date,
            window_end: date,
        });
    }
    Ok(out)
}
