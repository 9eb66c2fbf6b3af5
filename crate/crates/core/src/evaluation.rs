//! Forecast loss functions and Diebold-Mariano tests of equal accuracy.
//!
//! Losses are computed on `ln RV`: `p` is the prediction and `a` the
//! realization. The H-losses divide by `a`; records with `a == 0` are left
//! out of those two losses.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimation::Significance;
use crate::features::ModelSpec;
use crate::forecast::{ForecastPanel, ForecastRecord};
use crate::stats::two_sided_normal_p;

/// Largest share of records the H-losses may drop before failing.
pub const MAX_H_EXCLUDED_SHARE: f64 = 0.01;

/// Fewest paired forecasts a DM test accepts.
pub const MIN_DM_PAIRS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum LossKind {
    Mse,
    Mae,
    Hmse,
    Hmae,
}

impl LossKind {
    pub const ALL: [LossKind; 4] = [LossKind::Mse, LossKind::Mae, LossKind::Hmse, LossKind::Hmae];

    pub fn name(self) -> &'static str {
        match self {
            LossKind::Mse => "MSE",
            LossKind::Mae => "MAE",
            LossKind::Hmse => "HMSE",
            LossKind::Hmae => "HMAE",
        }
    }

    /// Pointwise loss; `None` when an H-loss meets `realized == 0`.
    pub fn pointwise(self, predicted: f64, realized: f64) -> Option<f64> {
        match self {
            LossKind::Mse => Some((predicted - realized).powi(2)),
            LossKind::Mae => Some((predicted - realized).abs()),
            LossKind::Hmse => (realized != 0.0).then(|| (1.0 - predicted / realized).powi(2)),
            LossKind::Hmae => (realized != 0.0).then(|| (1.0 - predicted / realized).abs()),
        }
    }

    fn is_heteroscedasticity_adjusted(self) -> bool {
        matches!(self, LossKind::Hmse | LossKind::Hmae)
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LossKind::ALL
            .into_iter()
            .find(|l| l.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Invalid(format!("unknown loss `{s}` (mse, mae, hmse, hmae)")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LossReport {
    pub model: Option<ModelSpec>,
    pub mse: f64,
    pub mae: f64,
    pub hmse: f64,
    pub hmae: f64,
    pub m: usize,
    /// Records left out of HMSE/HMAE because `realized == 0`.
    pub h_excluded: usize,
}

impl LossReport {
    pub fn get(&self, kind: LossKind) -> f64 {
        match kind {
            LossKind::Mse => self.mse,
            LossKind::Mae => self.mae,
            LossKind::Hmse => self.hmse,
            LossKind::Hmae => self.hmae,
        }
    }
}

fn check_h_exclusions(excluded: usize, total: usize) -> Result<()> {
    if excluded as f64 > MAX_H_EXCLUDED_SHARE * total as f64 {
        return Err(Error::Invalid(format!(
            "{excluded} of {total} forecasts have realized ln RV = 0; H-losses undefined"
        )));
    }
    Ok(())
}

pub fn losses(records: &[ForecastRecord]) -> Result<LossReport> {
    let m = records.len();
    if m == 0 {
        return Err(Error::InsufficientData("no forecasts to evaluate".into()));
    }
    let mean = |kind: LossKind| -> (f64, usize) {
        let vals: Vec<f64> = records.iter().filter_map(|r| kind.pointwise(r.predicted, r.realized)).collect();
        let n = vals.len();
        (if n == 0 { f64::NAN } else { vals.iter().sum::<f64>() / n as f64 }, m - n)
    };
    let (mse, _) = mean(LossKind::Mse);
    let (mae, _) = mean(LossKind::Mae);
    let (hmse, h_excluded) = mean(LossKind::Hmse);
    let (hmae, _) = mean(LossKind::Hmae);
    check_h_exclusions(h_excluded, m)?;
    Ok(LossReport { model: records.first().map(|r| r.model), mse, mae, hmse, hmae, m, h_excluded })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DmResult {
    pub benchmark: ModelSpec,
    pub comparison: ModelSpec,
    pub loss: LossKind,
    /// Positive when the comparison model has the smaller loss.
    pub statistic: f64,
    pub p_value: f64,
    pub m: usize,
    pub lrv_lag: usize,
    /// The loss differential had zero variance but nonzero mean.
    pub degenerate: bool,
}

impl DmResult {
    pub fn significance(&self) -> Significance {
        Significance::from_p(self.p_value)
    }
}

/// Bartlett-weighted long-run variance of `d` (population autocovariances).
pub fn long_run_variance(d: &[f64], lag: usize) -> f64 {
    let m = d.len();
    let mean = d.iter().sum::<f64>() / m as f64;
    let autocov = |l: usize| -> f64 {
        (l..m).map(|t| (d[t] - mean) * (d[t - l] - mean)).sum::<f64>() / m as f64
    };
    let mut lrv = autocov(0);
    for l in 1..=lag.min(m.saturating_sub(1)) {
        lrv += 2.0 * (1.0 - l as f64 / (lag as f64 + 1.0)) * autocov(l);
    }
    lrv
}

/// DM statistic on the loss differential `d_t = L(bench_t) - L(comp_t)`.
pub fn dm_test(
    bench: &[ForecastRecord],
    comp: &[ForecastRecord],
    loss: LossKind,
    lrv_lag: usize,
) -> Result<DmResult> {
    if bench.len() != comp.len() || bench.iter().zip(comp).any(|(b, c)| b.date != c.date) {
        return Err(Error::Invalid("benchmark and comparison forecasts are not paired by date".into()));
    }
    let (bm, cm) = match (bench.first(), comp.first()) {
        (Some(b), Some(c)) => (b.model, c.model),
        _ => return Err(Error::InsufficientData("no forecasts to compare".into())),
    };
    let mut d = Vec::with_capacity(bench.len());
    for (b, c) in bench.iter().zip(comp) {
        if let (Some(lb), Some(lc)) =
            (loss.pointwise(b.predicted, b.realized), loss.pointwise(c.predicted, c.realized))
        {
            d.push(lb - lc);
        }
    }
    if loss.is_heteroscedasticity_adjusted() {
        check_h_exclusions(bench.len() - d.len(), bench.len())?;
    }
    let m = d.len();
    if m < MIN_DM_PAIRS {
        return Err(Error::InsufficientData(format!("{m} paired forecasts; DM needs {MIN_DM_PAIRS}")));
    }
    let mean = d.iter().sum::<f64>() / m as f64;
    let lrv = long_run_variance(&d, lrv_lag);
    let (statistic, degenerate) = if lrv > 0.0 {
        (mean / (lrv / m as f64).sqrt(), false)
    } else if mean == 0.0 {
        return Err(Error::IdenticalLosses);
    } else {
        (f64::INFINITY.copysign(mean), true)
    };
    Ok(DmResult {
        benchmark: bm,
        comparison: cm,
        loss,
        statistic,
        p_value: if degenerate { 0.0 } else { two_sided_normal_p(statistic) },
        m,
        lrv_lag,
        degenerate,
    })
}

/// Every benchmark/comparison pair (benchmark earlier in model order) for each loss.
pub fn dm_matrix(panel: &ForecastPanel, kinds: &[LossKind], lrv_lag: usize) -> Result<Vec<DmResult>> {
    let pairs: Vec<(ModelSpec, ModelSpec)> = panel
        .models
        .iter()
        .enumerate()
        .flat_map(|(i, &b)| panel.models[i + 1..].iter().map(move |&c| (b, c)))
        .collect();
    let blocks: Vec<Vec<DmResult>> = pairs
        .par_iter()
        .map(|&(b, c)| kinds.iter().map(|&k| dm_test(&panel.records[&b], &panel.records[&c], k, lrv_lag)).collect())
        .collect::<Result<_>>()?;
    Ok(blocks.into_iter().flatten().collect())
}

pub fn loss_table(reports: &[LossReport]) -> String {
    let mut out = String::from("# out-of-sample losses on ln RV (no display scaling)\n");
    let _ = writeln!(out, "{:<11}{:>13}{:>13}{:>13}{:>13}{:>7}", "model", "MSE", "MAE", "HMSE", "HMAE", "M");
    for r in reports {
        let name = r.model.map(ModelSpec::name).unwrap_or("-");
        let _ = writeln!(
            out,
            "{name:<11}{:>13.6}{:>13.6}{:>13.6e}{:>13.6e}{:>7}",
            r.mse, r.mae, r.hmse, r.hmae, r.m
        );
    }
    out
}

/// Benchmark blocks with one row per comparison model and one column per loss.
pub fn dm_table(results: &[DmResult]) -> String {
    let mut out = String::from(
        "# Diebold-Mariano statistics, d = L(benchmark) - L(comparison); positive favours the comparison model; *** 1%, ** 5%, * 10%\n",
    );
    let mut kinds: Vec<LossKind> = results.iter().map(|r| r.loss).collect();
    kinds.sort();
    kinds.dedup();
    let mut benches: Vec<ModelSpec> = results.iter().map(|r| r.benchmark).collect();
    benches.sort();
    benches.dedup();
    for b in benches {
        let _ = write!(out, "benchmark {:<11}", b.name());
        for k in &kinds {
            let _ = write!(out, "{:>12}", k.name());
        }
        out.push('\n');
        let mut comps: Vec<ModelSpec> =
            results.iter().filter(|r| r.benchmark == b).map(|r| r.comparison).collect();
        comps.dedup();
        for c in comps {
            let _ = write!(out, "  {:<19}", c.name());
            for k in &kinds {
                let cell = results
                    .iter()
                    .find(|r| r.benchmark == b && r.comparison == c && r.loss == *k)
                    .map(|r| format!("{:.3}{}", r.statistic, r.significance().stars()))
                    .unwrap_or_default();
                let _ = write!(out, "{cell:>12}");
            }
            out.push('\n');
        }
    }
    out
}
