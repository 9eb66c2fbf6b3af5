//! The eight-model suite: fit every specification on one shared row set and
//! lay the results out as a coefficient-by-model table.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimation::{fit, FitOptions, FitResult};
use crate::features::{build_rows, restrict_to_common_dates, ModelSpec, RowSet};
use crate::measures::DailyMeasures;

/// Fewer common rows than this makes a suite fit meaningless.
pub const MIN_SUITE_ROWS: usize = 100;

pub fn fit_rows(rows: &RowSet, options: &FitOptions) -> Result<FitResult> {
    let n = rows.len();
    fit(
        rows.model.name(),
        &rows.model.coefficient_names(),
        &rows.design(0..n),
        &rows.targets(0..n),
        options,
    )
}

/// Fits one model on all rows it can form.
pub fn fit_model(measures: &[DailyMeasures], spec: ModelSpec, options: &FitOptions) -> Result<FitResult> {
    fit_rows(&build_rows(measures, spec)?, options)
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelFit {
    pub model: ModelSpec,
    pub fit: FitResult,
    /// Rows this model alone rejected before intersecting.
    pub rejected_rows: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SkippedModel {
    pub model: ModelSpec,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteResult {
    pub market: String,
    pub nobs: usize,
    pub first_date: Option<NaiveDate>,
    pub last_date: Option<NaiveDate>,
    pub fits: Vec<ModelFit>,
    pub skipped: Vec<SkippedModel>,
}

impl SuiteResult {
    pub fn get(&self, model: ModelSpec) -> Option<&FitResult> {
        self.fits.iter().find(|f| f.model == model).map(|f| &f.fit)
    }
}

/// Row sets of every model the measures support, restricted to their common
/// dates, plus the models that had to be skipped.
pub fn common_row_sets(
    measures: &[DailyMeasures],
    models: &[ModelSpec],
) -> Result<(Vec<RowSet>, Vec<SkippedModel>, BTreeSet<NaiveDate>)> {
    let mut sets = Vec::new();
    let mut skipped = Vec::new();
    for &model in models {
        match model.unavailable_reason(measures) {
            Some(reason) => skipped.push(SkippedModel { model, reason }),
            None => sets.push(build_rows(measures, model)?),
        }
    }
    let common = restrict_to_common_dates(&mut sets);
    Ok((sets, skipped, common))
}

/// Fits all eight models on the intersection of their usable rows.
pub fn fit_suite(market: &str, measures: &[DailyMeasures], options: &FitOptions) -> Result<SuiteResult> {
    let (sets, skipped, common) = common_row_sets(measures, &ModelSpec::ALL)?;
    if sets.is_empty() {
        return Err(Error::Unavailable("no model can be fitted on these measures".into()));
    }
    if common.len() < MIN_SUITE_ROWS {
        return Err(Error::InsufficientData(format!(
            "{} common rows; the suite needs at least {MIN_SUITE_ROWS}",
            common.len()
        )));
    }
    let rejected: Vec<usize> = sets.iter().map(|s| s.rejected.len()).collect();
    let fits: Vec<FitResult> = sets.par_iter().map(|s| fit_rows(s, options)).collect::<Result<_>>()?;
    let fits = sets
        .iter()
        .zip(fits)
        .zip(rejected)
        .map(|((s, fit), rejected_rows)| ModelFit { model: s.model, fit, rejected_rows })
        .collect();
    Ok(SuiteResult {
        market: market.to_string(),
        nobs: common.len(),
        first_date: common.first().copied(),
        last_date: common.last().copied(),
        fits,
        skipped,
    })
}

fn all_coefficient_names() -> Vec<String> {
    let mut names = vec!["c".to_string()];
    names.extend((1..=6).map(|i| format!("α{i}")));
    names.extend((1..=6).map(|i| format!("β{i}")));
    names.extend((1..=6).map(|i| format!("δ{i}")));
    names
}

fn format_estimate(v: f64) -> String {
    let a = v.abs();
    if a >= 1000.0 {
        format!("{v:.1}")
    } else if a >= 10.0 {
        format!("{v:.2}")
    } else {
        format!("{v:.3}")
    }
}

/// Coefficient-by-model table with significance stars.
pub fn suite_table(suite: &SuiteResult) -> String {
    const W: usize = 13;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# {}: HAR-family estimates on {} common rows ({} to {}); HAC (Newey-West, Bartlett) t-tests; *** 1%, ** 5%, * 10%",
        suite.market,
        suite.nobs,
        suite.first_date.map(|d| d.to_string()).unwrap_or_default(),
        suite.last_date.map(|d| d.to_string()).unwrap_or_default(),
    );
    let _ = write!(out, "{:<8}", "");
    for f in &suite.fits {
        let _ = write!(out, "{:>W$}", f.model.name());
    }
    out.push('\n');
    for name in all_coefficient_names() {
        if !suite.fits.iter().any(|f| f.fit.names.contains(&name)) {
            continue;
        }
        let _ = write!(out, "{name:<8}");
        for f in &suite.fits {
            let cell = match f.fit.names.iter().position(|n| *n == name) {
                Some(i) => format!(
                    "{}{}",
                    format_estimate(f.fit.coefficients[i]),
                    f.fit.significance(i).stars()
                ),
                None => String::new(),
            };
            let _ = write!(out, "{cell:>W$}");
        }
        out.push('\n');
    }
    let _ = write!(out, "{:<8}", "Adj.R2");
    for f in &suite.fits {
        let _ = write!(out, "{:>W$.3}", f.fit.adj_r2);
    }
    out.push('\n');
    let _ = write!(out, "{:<8}", "NW lag");
    for f in &suite.fits {
        let _ = write!(out, "{:>W$}", f.fit.bandwidth_used);
    }
    out.push('\n');
    for s in &suite.skipped {
        let _ = writeln!(out, "# skipped {}: {}", s.model, s.reason);
    }
    out
}
