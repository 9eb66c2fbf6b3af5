//! Daily/weekly/monthly aggregates and per-model regression rows.
//!
//! A row for target day `t` uses only measures dated `t-1` and earlier:
//! daily values at `t-1`, and 5- and 22-trading-day trailing means ending at
//! `t-1`. Volatility blocks are logs of level means; jump blocks are
//! `ln(1 + mean)` of raw jump levels.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use chrono::NaiveDate;
use nalgebra::DMatrix;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::ingest::DATE_FORMAT;
use crate::measures::DailyMeasures;

pub const WEEK: usize = 5;
pub const MONTH: usize = 22;

/// Largest share of candidate rows that may be rejected before
/// [`build_rows`] fails.
pub const MAX_REJECTED_SHARE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VolBlock {
    /// `ln RV` daily/weekly/monthly.
    Rv,
    /// `ln RSV+` then `ln RSV-`, each daily/weekly/monthly.
    Rsv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JumpBlock {
    Symmetric,
    Asymmetric,
}

/// The eight model specifications, in reporting order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelSpec {
    HarJ,
    HarAj,
    HarJLe,
    HarAjLe,
    RsvJ,
    RsvAj,
    RsvJLe,
    RsvAjLe,
}

impl ModelSpec {
    pub const ALL: [ModelSpec; 8] = [
        ModelSpec::HarJ,
        ModelSpec::HarAj,
        ModelSpec::HarJLe,
        ModelSpec::HarAjLe,
        ModelSpec::RsvJ,
        ModelSpec::RsvAj,
        ModelSpec::RsvJLe,
        ModelSpec::RsvAjLe,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelSpec::HarJ => "HAR-J",
            ModelSpec::HarAj => "HAR-AJ",
            ModelSpec::HarJLe => "HAR-J-LE",
            ModelSpec::HarAjLe => "HAR-AJ-LE",
            ModelSpec::RsvJ => "RSV-J",
            ModelSpec::RsvAj => "RSV-AJ",
            ModelSpec::RsvJLe => "RSV-J-LE",
            ModelSpec::RsvAjLe => "RSV-AJ-LE",
        }
    }

    pub fn vol_block(self) -> VolBlock {
        match self {
            ModelSpec::HarJ | ModelSpec::HarAj | ModelSpec::HarJLe | ModelSpec::HarAjLe => VolBlock::Rv,
            _ => VolBlock::Rsv,
        }
    }

    pub fn jump_block(self) -> JumpBlock {
        match self {
            ModelSpec::HarJ | ModelSpec::HarJLe | ModelSpec::RsvJ | ModelSpec::RsvJLe => {
                JumpBlock::Symmetric
            }
            _ => JumpBlock::Asymmetric,
        }
    }

    pub fn has_leverage(self) -> bool {
        matches!(
            self,
            ModelSpec::HarJLe | ModelSpec::HarAjLe | ModelSpec::RsvJLe | ModelSpec::RsvAjLe
        )
    }

    /// Number of regressors including the intercept.
    pub fn dimension(self) -> usize {
        let vol = match self.vol_block() {
            VolBlock::Rv => 3,
            VolBlock::Rsv => 6,
        };
        let jump = match self.jump_block() {
            JumpBlock::Symmetric => 3,
            JumpBlock::Asymmetric => 6,
        };
        1 + vol + jump + if self.has_leverage() { 6 } else { 0 }
    }

    /// Coefficient names: `c`, then `α1..`, `β1..`, `δ1..`.
    pub fn coefficient_names(self) -> Vec<String> {
        let (vol, jump) = (self.vol_width(), self.jump_width());
        let mut names = vec!["c".to_string()];
        names.extend((1..=vol).map(|i| format!("α{i}")));
        names.extend((1..=jump).map(|i| format!("β{i}")));
        if self.has_leverage() {
            names.extend((1..=6).map(|i| format!("δ{i}")));
        }
        names
    }

    /// Column labels for design-matrix dumps.
    pub fn regressor_labels(self) -> Vec<String> {
        let mut labels = vec!["const".to_string()];
        let trio = |base: &str, wrap: fn(&str, &str) -> String| -> Vec<String> {
            ["d", "w", "m"].iter().map(|h| wrap(base, h)).collect()
        };
        let ln = |b: &str, h: &str| format!("ln_{b}_{h}");
        let ln1p = |b: &str, h: &str| format!("ln1p_{b}_{h}");
        match self.vol_block() {
            VolBlock::Rv => labels.extend(trio("rv", ln)),
            VolBlock::Rsv => {
                labels.extend(trio("rsv_plus", ln));
                labels.extend(trio("rsv_minus", ln));
            }
        }
        match self.jump_block() {
            JumpBlock::Symmetric => labels.extend(trio("j", ln1p)),
            JumpBlock::Asymmetric => {
                labels.extend(trio("j_plus", ln1p));
                labels.extend(trio("j_minus", ln1p));
            }
        }
        if self.has_leverage() {
            labels.extend(["absret_d", "absret_w", "absret_m", "negabsret_d", "negabsret_w", "negabsret_m"].map(String::from));
        }
        labels
    }

    fn vol_width(self) -> usize {
        match self.vol_block() {
            VolBlock::Rv => 3,
            VolBlock::Rsv => 6,
        }
    }

    fn jump_width(self) -> usize {
        match self.jump_block() {
            JumpBlock::Symmetric => 3,
            JumpBlock::Asymmetric => 6,
        }
    }

    /// Base variables this model reads.
    pub fn required_vars(self) -> Vec<BaseVar> {
        let mut v = vec![BaseVar::Rv];
        match self.vol_block() {
            VolBlock::Rv => {}
            VolBlock::Rsv => v.extend([BaseVar::RsvPlus, BaseVar::RsvMinus]),
        }
        match self.jump_block() {
            JumpBlock::Symmetric => v.push(BaseVar::J),
            JumpBlock::Asymmetric => v.extend([BaseVar::JPlus, BaseVar::JMinus]),
        }
        if self.has_leverage() {
            v.extend([BaseVar::AbsRet, BaseVar::Ret]);
        }
        v
    }

    /// Why this model cannot be fitted on `measures`, if it cannot.
    pub fn unavailable_reason(self, measures: &[DailyMeasures]) -> Option<String> {
        let missing: Vec<&str> = self
            .required_vars()
            .into_iter()
            .filter(|v| !measures.iter().all(|m| v.value(m).is_some()))
            .map(BaseVar::name)
            .collect();
        if missing.is_empty() {
            None
        } else {
            Some(format!("{}: unavailable fields {}", self.name(), missing.join(", ")))
        }
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelSpec::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Invalid(format!("unknown model `{s}`")))
    }
}

impl Serialize for ModelSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for ModelSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Daily variables that get weekly and monthly aggregates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BaseVar {
    Rv,
    J,
    JPlus,
    JMinus,
    RsvPlus,
    RsvMinus,
    AbsRet,
    Ret,
}

impl BaseVar {
    pub const ALL: [BaseVar; 8] = [
        BaseVar::Rv,
        BaseVar::J,
        BaseVar::JPlus,
        BaseVar::JMinus,
        BaseVar::RsvPlus,
        BaseVar::RsvMinus,
        BaseVar::AbsRet,
        BaseVar::Ret,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BaseVar::Rv => "rv",
            BaseVar::J => "j",
            BaseVar::JPlus => "j_plus",
            BaseVar::JMinus => "j_minus",
            BaseVar::RsvPlus => "rsv_plus",
            BaseVar::RsvMinus => "rsv_minus",
            BaseVar::AbsRet => "abs_ret",
            BaseVar::Ret => "ret",
        }
    }

    pub fn value(self, m: &DailyMeasures) -> Option<f64> {
        match self {
            BaseVar::Rv => Some(m.rv),
            BaseVar::J => m.j(),
            BaseVar::JPlus => m.j_plus(),
            BaseVar::JMinus => m.j_minus(),
            BaseVar::RsvPlus => m.rsv_plus,
            BaseVar::RsvMinus => m.rsv_minus,
            BaseVar::AbsRet => m.ret.map(f64::abs),
            BaseVar::Ret => m.ret,
        }
    }
}

/// Daily values with trailing 5- and 22-day means; `None` until the window is full.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub daily: Vec<f64>,
    pub weekly: Vec<Option<f64>>,
    pub monthly: Vec<Option<f64>>,
}

impl Aggregate {
    fn new(daily: Vec<f64>) -> Self {
        let weekly = trailing_means(&daily, WEEK);
        let monthly = trailing_means(&daily, MONTH);
        Aggregate { daily, weekly, monthly }
    }

    fn at(&self, s: usize) -> Option<[f64; 3]> {
        Some([self.daily[s], self.weekly[s]?, self.monthly[s]?])
    }
}

fn trailing_means(x: &[f64], width: usize) -> Vec<Option<f64>> {
    (0..x.len())
        .map(|i| {
            (i + 1 >= width).then(|| x[i + 1 - width..=i].iter().sum::<f64>() / width as f64)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregatedSeries {
    pub dates: Vec<NaiveDate>,
    /// Only variables available on every day are present.
    pub vars: BTreeMap<BaseVar, Aggregate>,
}

impl AggregatedSeries {
    pub fn get(&self, var: BaseVar) -> Option<&Aggregate> {
        self.vars.get(&var)
    }
}

pub fn aggregate(measures: &[DailyMeasures]) -> AggregatedSeries {
    let mut vars = BTreeMap::new();
    for var in BaseVar::ALL {
        let daily: Option<Vec<f64>> = measures.iter().map(|m| var.value(m)).collect();
        if let Some(daily) = daily {
            vars.insert(var, Aggregate::new(daily));
        }
    }
    AggregatedSeries { dates: measures.iter().map(|m| m.date).collect(), vars }
}

fn leverage_at(agg: &AggregatedSeries, s: usize) -> Option<[f64; 6]> {
    let abs = agg.get(BaseVar::AbsRet)?.at(s)?;
    let signed = agg.get(BaseVar::Ret)?.at(s)?;
    let neg = |a: f64, r: f64| if r < 0.0 { a } else { 0.0 };
    Some([
        abs[0],
        abs[1],
        abs[2],
        neg(abs[0], signed[0]),
        neg(abs[1], signed[1]),
        neg(abs[2], signed[2]),
    ])
}

/// Return-size and leverage regressors for target date `t`:
/// `(|r|, |r|^w, |r|^m, |r| I{r<0}, |r|^w I{r^w<0}, |r|^m I{r^m<0})`, all dated `t-1`.
/// Magnitudes are means of absolute returns; indicators use signed mean returns.
pub fn leverage_vector(measures: &[DailyMeasures], t: NaiveDate) -> Result<[f64; 6]> {
    let idx = measures
        .binary_search_by_key(&t, |m| m.date)
        .map_err(|_| Error::Invalid(format!("date {t} not in measures")))?;
    if idx < MONTH {
        return Err(Error::InsufficientData(format!(
            "{t}: leverage vector needs {MONTH} days of history, found {idx}"
        )));
    }
    let agg = aggregate(&measures[idx - MONTH..idx]);
    leverage_at(&agg, MONTH - 1)
        .ok_or_else(|| Error::Unavailable(format!("{t}: daily returns unavailable")))
}

/// Regressors (with leading intercept) built from information up to index `s`.
/// `Err` carries the reason a row cannot be formed.
fn regressors_at(
    agg: &AggregatedSeries,
    s: usize,
    spec: ModelSpec,
) -> std::result::Result<Vec<f64>, String> {
    let fetch = |var: BaseVar| -> std::result::Result<[f64; 3], String> {
        agg.get(var)
            .ok_or_else(|| format!("{} unavailable", var.name()))?
            .at(s)
            .ok_or_else(|| "insufficient history".to_string())
    };
    let logs = |var: BaseVar| -> std::result::Result<[f64; 3], String> {
        let v = fetch(var)?;
        if v.iter().any(|x| *x <= 0.0) {
            return Err(format!("zero {} aggregate", var.name()));
        }
        Ok(v.map(f64::ln))
    };
    let log1p = |var: BaseVar| fetch(var).map(|v| v.map(f64::ln_1p));

    let mut x = Vec::with_capacity(spec.dimension());
    x.push(1.0);
    match spec.vol_block() {
        VolBlock::Rv => x.extend(logs(BaseVar::Rv)?),
        VolBlock::Rsv => {
            x.extend(logs(BaseVar::RsvPlus)?);
            x.extend(logs(BaseVar::RsvMinus)?);
        }
    }
    match spec.jump_block() {
        JumpBlock::Symmetric => x.extend(log1p(BaseVar::J)?),
        JumpBlock::Asymmetric => {
            x.extend(log1p(BaseVar::JPlus)?);
            x.extend(log1p(BaseVar::JMinus)?);
        }
    }
    if spec.has_leverage() {
        x.extend(leverage_at(agg, s).ok_or_else(|| "daily returns unavailable".to_string())?);
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err("non-finite regressor".into());
    }
    Ok(x)
}

/// Regressors for the day following `history`, using its last 22 days.
pub fn next_regressors(history: &[DailyMeasures], spec: ModelSpec) -> Result<Vec<f64>> {
    if history.len() < MONTH {
        return Err(Error::InsufficientData(format!(
            "need {MONTH} days of history, found {}",
            history.len()
        )));
    }
    let agg = aggregate(&history[history.len() - MONTH..]);
    regressors_at(&agg, MONTH - 1, spec).map_err(Error::Invalid)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub date: NaiveDate,
    /// `ln RV_t`.
    pub target: f64,
    /// Intercept first, then the model's blocks.
    pub regressors: Vec<f64>,
}

/// All regression rows of one model over a measures series.
#[derive(Debug, Clone, PartialEq)]
pub struct RowSet {
    pub model: ModelSpec,
    pub labels: Vec<String>,
    pub rows: Vec<FeatureRow>,
    /// Dates whose rows could not be formed (zero variance aggregates).
    pub rejected: Vec<NaiveDate>,
}

impl RowSet {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dates(&self) -> Vec<NaiveDate> {
        self.rows.iter().map(|r| r.date).collect()
    }

    /// Design matrix of rows `range`.
    pub fn design(&self, range: std::ops::Range<usize>) -> DMatrix<f64> {
        let k = self.labels.len();
        let rows = &self.rows[range];
        DMatrix::from_fn(rows.len(), k, |i, j| rows[i].regressors[j])
    }

    pub fn targets(&self, range: std::ops::Range<usize>) -> Vec<f64> {
        self.rows[range].iter().map(|r| r.target).collect()
    }

    /// Keeps only rows whose date is in `dates`.
    pub fn retain_dates(&mut self, dates: &BTreeSet<NaiveDate>) {
        self.rows.retain(|r| dates.contains(&r.date));
    }
}

/// Builds one regression row per date with a full 22-day history.
pub fn build_rows(measures: &[DailyMeasures], spec: ModelSpec) -> Result<RowSet> {
    if let Some(reason) = spec.unavailable_reason(measures) {
        return Err(Error::Unavailable(reason));
    }
    if measures.len() <= MONTH {
        return Err(Error::InsufficientData(format!(
            "{}: need more than {MONTH} days, found {}",
            spec.name(),
            measures.len()
        )));
    }
    let agg = aggregate(measures);
    let mut rows = Vec::with_capacity(measures.len() - MONTH);
    let mut rejected = Vec::new();
    for (t, m) in measures.iter().enumerate().skip(MONTH) {
        let built = if m.rv > 0.0 {
            regressors_at(&agg, t - 1, spec)
        } else {
            Err("zero rv at target".to_string())
        };
        match built {
            Ok(regressors) => rows.push(FeatureRow { date: m.date, target: m.rv.ln(), regressors }),
            Err(reason) => {
                log::warn!("{}: rejecting row {}: {reason}", spec.name(), m.date);
                rejected.push(m.date);
            }
        }
    }
    let candidates = measures.len() - MONTH;
    if rejected.len() as f64 > MAX_REJECTED_SHARE * candidates as f64 {
        return Err(Error::Invalid(format!(
            "{}: {} of {candidates} rows rejected for zero variance aggregates",
            spec.name(),
            rejected.len()
        )));
    }
    Ok(RowSet { model: spec, labels: spec.regressor_labels(), rows, rejected })
}

/// Restricts every row set to the dates present in all of them.
pub fn restrict_to_common_dates(sets: &mut [RowSet]) -> BTreeSet<NaiveDate> {
    let mut common: Option<BTreeSet<NaiveDate>> = None;
    for s in sets.iter() {
        let d: BTreeSet<NaiveDate> = s.rows.iter().map(|r| r.date).collect();
        common = Some(match common {
            None => d,
            Some(c) => c.intersection(&d).copied().collect(),
        });
    }
    let common = common.unwrap_or_default();
    for s in sets.iter_mut() {
        s.retain_dates(&common);
    }
    common
}

/// Dumps `date,target,<labels>` for external verification.
pub fn write_design<W: Write>(mut w: W, rows: &RowSet) -> Result<()> {
    writeln!(w, "# {} design matrix; target = ln RV (raw units); regressors per label", rows.model)?;
    writeln!(w, "date,target,{}", rows.labels.join(","))?;
    for r in &rows.rows {
        let xs: Vec<String> = r.regressors.iter().map(|x| format!("{x:.16e}")).collect();
        writeln!(w, "{},{:.16e},{}", r.date.format(DATE_FORMAT), r.target, xs.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn day(i: usize) -> NaiveDate {
        NaiveDate::from_ymd_opt(2010, 1, 1).unwrap() + chrono::Duration::days(i as i64)
    }

    fn series(rv: &[f64]) -> Vec<DailyMeasures> {
        rv.iter()
            .enumerate()
            .map(|(i, &v)| DailyMeasures {
                date: day(i),
                rv: v,
                bv: Some(0.8 * v),
                rsv_plus: Some(0.4 * v),
                rsv_minus: Some(0.6 * v),
                ret: Some(if i % 3 == 0 { -0.01 } else { 0.005 }),
                n: None,
            })
            .collect()
    }

    #[test]
    fn weekly_means() {
        let m = series(&[5.0, 5.0, 5.0, 5.0, 5.0]);
        assert_eq!(aggregate(&m).get(BaseVar::Rv).unwrap().weekly[4], Some(5.0));
        let m = series(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let agg = aggregate(&m);
        let rv = agg.get(BaseVar::Rv).unwrap();
        assert_eq!(rv.weekly[4], Some(3.0));
        assert_eq!(rv.weekly[3], None);
        assert_eq!(rv.monthly[4], None);
    }

    #[test]
    fn leverage_indicator_logic() {
        // 22 days ending at t-1: returns mostly positive, last day negative
        let mut m = series(&[1e-4; 23]);
        for (i, x) in m.iter_mut().enumerate() {
            x.ret = Some(if i == 21 { -0.01 } else { 0.0075 });
        }
        let v = leverage_vector(&m, day(22)).unwrap();
        assert_eq!(v[0], 0.01);
        assert!((v[1] - (0.01 + 4.0 * 0.0075) / 5.0).abs() < 1e-15);
        assert_eq!(v[3], 0.01);
        assert_eq!(v[4], 0.0); // signed weekly mean is positive
        assert_eq!(v[5], 0.0);

        for x in m.iter_mut() {
            x.ret = Some(0.003);
        }
        let v = leverage_vector(&m, day(22)).unwrap();
        assert_eq!(&v[3..], &[0.0, 0.0, 0.0]);

        for x in m.iter_mut() {
            x.ret = Some(-0.004);
        }
        let v = leverage_vector(&m, day(22)).unwrap();
        for e in v {
            assert!((e - 0.004).abs() < 1e-15);
        }
        assert!(leverage_vector(&m, day(21)).is_err());
    }

    #[test]
    fn row_counts_and_dimensions() {
        let m = series(&[1e-4; 23]);
        let rows = build_rows(&m, ModelSpec::HarJ).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows.rows[0].date, day(22));
        assert_eq!(rows.rows[0].regressors.len(), 7);
        assert!(build_rows(&m[..22], ModelSpec::HarJ).is_err());

        let m = series(&[1e-4; 24]);
        assert_eq!(build_rows(&m, ModelSpec::HarJ).unwrap().len(), 2);
        let r = build_rows(&m, ModelSpec::RsvAjLe).unwrap();
        assert_eq!(r.rows[0].regressors.len(), 19);
        assert_eq!(r.labels.len(), 19);
        assert_eq!(ModelSpec::RsvAjLe.coefficient_names().len(), 19);
        for spec in ModelSpec::ALL {
            assert_eq!(spec.coefficient_names().len(), spec.dimension());
            assert_eq!(spec.regressor_labels().len(), spec.dimension());
            assert_eq!(spec.name().parse::<ModelSpec>().unwrap(), spec);
        }
    }

    #[test]
    fn jump_block_zero_iff_zero_jumps() {
        let mut m = series(&vec![1e-4; 30]);
        for x in m.iter_mut() {
            x.bv = Some(x.rv);
        }
        let rows = build_rows(&m, ModelSpec::HarJ).unwrap();
        assert!(rows.rows.iter().all(|r| r.regressors[4..7] == [0.0, 0.0, 0.0]));
        let rows = build_rows(&series(&vec![1e-4; 30]), ModelSpec::HarJ).unwrap();
        assert!(rows.rows.iter().all(|r| r.regressors[4..7].iter().all(|v| *v > 0.0)));
    }

    #[test]
    fn zero_rv_rows_rejected_and_budget_enforced() {
        let mut rv = vec![1e-4; 400];
        rv[200] = 0.0;
        let rows = build_rows(&series(&rv), ModelSpec::HarJ).unwrap();
        // day 200 is a zero target; its daily log regressor poisons day 201
        assert_eq!(rows.rejected, vec![day(200), day(201)]);
        let mut rv = vec![1e-4; 100];
        rv[50] = 0.0;
        assert!(build_rows(&series(&rv), ModelSpec::HarJ).is_err());
    }

    #[test]
    fn missing_semivariances_refuse_rsv() {
        let m: Vec<DailyMeasures> = series(&vec![1e-4; 30])
            .into_iter()
            .map(|mut x| {
                x.rsv_plus = None;
                x.rsv_minus = None;
                x
            })
            .collect();
        assert!(matches!(build_rows(&m, ModelSpec::RsvJ), Err(Error::Unavailable(_))));
        assert!(matches!(build_rows(&m, ModelSpec::HarAj), Err(Error::Unavailable(_))));
        assert!(build_rows(&m, ModelSpec::HarJLe).is_ok());
    }

    #[test]
    fn le_columns_only_append() {
        let rv: Vec<f64> = (0..60).map(|i| 1e-4 * (1.0 + (i as f64 * 0.7).sin().abs())).collect();
        let m = series(&rv);
        let a = build_rows(&m, ModelSpec::HarJ).unwrap();
        let b = build_rows(&m, ModelSpec::HarJLe).unwrap();
        for (x, y) in a.rows.iter().zip(&b.rows) {
            assert_eq!(x.regressors[..], y.regressors[..7]);
        }
    }

    #[test]
    fn no_look_ahead() {
        let rv: Vec<f64> = (0..40).map(|i| 1e-4 * (1.5 + (i as f64).cos())).collect();
        let m = series(&rv);
        let before = build_rows(&m, ModelSpec::RsvAjLe).unwrap();
        let mut perturbed = m.clone();
        perturbed[30].rv *= 3.0;
        perturbed[30].rsv_plus = perturbed[30].rsv_plus.map(|v| v * 3.0);
        perturbed[30].rsv_minus = perturbed[30].rsv_minus.map(|v| v * 3.0);
        perturbed[30].ret = Some(-0.05);
        let after = build_rows(&perturbed, ModelSpec::RsvAjLe).unwrap();
        let i = before.rows.iter().position(|r| r.date == day(30)).unwrap();
        assert_eq!(before.rows[i].regressors, after.rows[i].regressors);
        assert_ne!(before.rows[i].target, after.rows[i].target);
        assert_ne!(before.rows[i + 1].regressors, after.rows[i + 1].regressors);
    }

    proptest! {
        #[test]
        fn aggregate_within_window_bounds(xs in prop::collection::vec(1e-6f64..1e-2, 22..80)) {
            let m = series(&xs);
            let agg = aggregate(&m);
            let rv = agg.get(BaseVar::Rv).unwrap();
            for s in 0..xs.len() {
                for (w, means) in [(WEEK, &rv.weekly), (MONTH, &rv.monthly)] {
                    if let Some(v) = means[s] {
                        let win = &xs[s + 1 - w..=s];
                        let lo = win.iter().cloned().fold(f64::INFINITY, f64::min);
                        let hi = win.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                        prop_assert!(v >= lo * (1.0 - 1e-12) && v <= hi * (1.0 + 1e-12));
                    }
                }
            }
        }

        #[test]
        fn first_regressor_monotone_in_lagged_rv(bump in 1.01f64..10.0) {
            let rv: Vec<f64> = (0..30).map(|i| 1e-4 * (1.2 + (i as f64 * 0.3).sin())).collect();
            let m = series(&rv);
            let mut hi = m.clone();
            hi[25].rv *= bump;
            let a = build_rows(&m, ModelSpec::HarJ).unwrap();
            let b = build_rows(&hi, ModelSpec::HarJ).unwrap();
            let i = a.rows.iter().position(|r| r.date == day(26)).unwrap();
            prop_assert!(b.rows[i].regressors[1] > a.rows[i].regressors[1]);
        }
    }
}
