//! Descriptive statistics and Ljung-Box tests for the daily series.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::DailyMeasures;
use crate::stats::chi_square_sf;

pub const DEFAULT_LB_LAGS: usize = 20;

/// Display multiplier for variance-type rows.
pub const DISPLAY_SCALE: f64 = 1000.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DescriptiveRow {
    pub name: String,
    pub n: usize,
    pub mean: f64,
    pub median: f64,
    pub max: f64,
    pub min: f64,
    /// Sample standard deviation (n-1 denominator).
    pub std_dev: f64,
    pub skewness: f64,
    /// Excess kurtosis.
    pub kurtosis: f64,
    /// Ljung-Box statistic and p-value; absent for short or constant series.
    pub q20: Option<f64>,
    pub q20_pvalue: Option<f64>,
    /// Zero variance: skewness and kurtosis are undefined (NaN).
    pub degenerate: bool,
    /// Whether the location/scale columns were multiplied by [`DISPLAY_SCALE`].
    pub scaled: bool,
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

pub fn describe(series: &[f64], name: &str) -> Result<DescriptiveRow> {
    let n = series.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!("{name}: need at least two observations")));
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::Invalid(format!("{name}: non-finite value")));
    }
    let nf = n as f64;
    let mean = series.iter().sum::<f64>() / nf;
    let central = |p: i32| series.iter().map(|v| (v - mean).powi(p)).sum::<f64>() / nf;
    let (m2, m3, m4) = (central(2), central(3), central(4));
    let degenerate = !(m2 > 0.0);
    let mut sorted = series.to_vec();
    sorted.sort_by(f64::total_cmp);

    let (q20, q20_pvalue) = match ljung_box(series, DEFAULT_LB_LAGS) {
        Ok((q, p)) => (Some(q), Some(p)),
        Err(_) => (None, None),
    };
    Ok(DescriptiveRow {
        name: name.to_string(),
        n,
        mean,
        median: median(&sorted),
        max: sorted[n - 1],
        min: sorted[0],
        std_dev: (m2 * nf / (nf - 1.0)).sqrt(),
        skewness: if degenerate { f64::NAN } else { m3 / m2.powf(1.5) },
        kurtosis: if degenerate { f64::NAN } else { m4 / (m2 * m2) - 3.0 },
        q20,
        q20_pvalue,
        degenerate,
        scaled: false,
    })
}

/// `Q = T(T+2) Σ_{k=1..L} ρ_k² / (T-k)` with a chi-square(L) p-value.
pub fn ljung_box(series: &[f64], max_lag: usize) -> Result<(f64, f64)> {
    let t = series.len();
    if max_lag == 0 || t <= max_lag + 1 {
        return Err(Error::InsufficientData(format!(
            "Ljung-Box with {max_lag} lags needs more than {} observations, found {t}",
            max_lag + 1
        )));
    }
    let mean = series.iter().sum::<f64>() / t as f64;
    let dev: Vec<f64> = series.iter().map(|v| v - mean).collect();
    let denom: f64 = dev.iter().map(|d| d * d).sum();
    if !(denom > 0.0) {
        return Err(Error::Invalid("Ljung-Box on a constant series".into()));
    }
    let tf = t as f64;
    let mut q = 0.0;
    for k in 1..=max_lag {
        let rho = (k..t).map(|i| dev[i] * dev[i - k]).sum::<f64>() / denom;
        q += rho * rho / (tf - k as f64);
    }
    q *= tf * (tf + 2.0);
    Ok((q, chi_square_sf(q, max_lag)))
}

impl DescriptiveRow {
    fn scale(mut self, factor: f64) -> Self {
        self.mean *= factor;
        self.median *= factor;
        self.max *= factor;
        self.min *= factor;
        self.std_dev *= factor;
        self.scaled = true;
        self
    }
}

/// The fifteen daily variables of the descriptive table. Rows whose inputs
/// are unavailable are omitted; log rows drop days where the log is undefined.
pub fn describe_measures(measures: &[DailyMeasures], display_scaling: bool) -> Result<Vec<DescriptiveRow>> {
    type Getter = fn(&DailyMeasures) -> Option<f64>;
    let rows: [(&str, Getter, bool); 15] = [
        ("RV", |m| Some(m.rv), true),
        ("RSV+", |m| m.rsv_plus, true),
        ("RSV-", |m| m.rsv_minus, true),
        ("J", |m| m.j(), true),
        ("J+", |m| m.j_plus(), true),
        ("J-", |m| m.j_minus(), true),
        ("r", |m| m.ret, false),
        ("ln RV", |m| Some(m.rv.ln()), false),
        ("ln RSV+", |m| m.rsv_plus.map(f64::ln), false),
        ("ln RSV-", |m| m.rsv_minus.map(f64::ln), false),
        ("ln(J+1)", |m| m.j().map(f64::ln_1p), true),
        ("ln(J++1)", |m| m.j_plus().map(f64::ln_1p), true),
        ("ln(J-+1)", |m| m.j_minus().map(f64::ln_1p), true),
        ("|r|", |m| m.ret.map(f64::abs), false),
        ("|r|I{r<0}", |m| m.ret.map(|r| if r < 0.0 { -r } else { 0.0 }), false),
    ];
    let mut out = Vec::new();
    for (name, get, scaled) in rows {
        let values: Option<Vec<f64>> = measures.iter().map(get).collect();
        let Some(values) = values else { continue };
        let finite: Vec<f64> = values.into_iter().filter(|v| v.is_finite()).collect();
        if finite.len() < 2 {
            continue;
        }
        let row = describe(&finite, name)?;
        out.push(if scaled && display_scaling { row.scale(DISPLAY_SCALE) } else { row });
    }
    Ok(out)
}

fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        return "n/a".into();
    }
    let a = v.abs();
    if a != 0.0 && !(1e-3..1e5).contains(&a) {
        format!("{v:.4e}")
    } else {
        format!("{v:.4}")
    }
}

pub fn descriptive_table(market: &str, rows: &[DescriptiveRow]) -> String {
    let mut out = String::new();
    let scaled: Vec<&str> = rows.iter().filter(|r| r.scaled).map(|r| r.name.as_str()).collect();
    let _ = writeln!(
        out,
        "# {market}: descriptive statistics; kurtosis is EXCESS kurtosis; std dev uses n-1; Q(20) Ljung-Box with *** 1%, ** 5%, * 10%"
    );
    if scaled.is_empty() {
        let _ = writeln!(out, "# units: raw (no display scaling)");
    } else {
        let _ = writeln!(out, "# units: {} multiplied by 1,000 (location and scale columns)", scaled.join(", "));
    }
    let _ = writeln!(
        out,
        "{:<11}{:>12}{:>12}{:>12}{:>12}{:>12}{:>12}{:>12}{:>14}{:>7}",
        "variable", "Mean", "Median", "Maximum", "Minimum", "Std.Dev.", "Skewness", "Kurtosis", "Q(20)", "N"
    );
    for r in rows {
        let q = match (r.q20, r.q20_pvalue) {
            (Some(q), Some(p)) => {
                format!("{}{}", fmt_num(q), crate::estimation::Significance::from_p(p).stars())
            }
            _ => "n/a".into(),
        };
        let _ = writeln!(
            out,
            "{:<11}{:>12}{:>12}{:>12}{:>12}{:>12}{:>12}{:>12}{:>14}{:>7}",
            r.name,
            fmt_num(r.mean),
            fmt_num(r.median),
            fmt_num(r.max),
            fmt_num(r.min),
            fmt_num(r.std_dev),
            fmt_num(r.skewness),
            fmt_num(r.kurtosis),
            q,
            r.n
        );
    }
    out
}
