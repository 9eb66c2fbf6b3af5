//! Synthetic intraday data from a jump-diffusion log price, and synthetic
//! daily measures from a HAR-family data-generating process.
//!
//! Time is measured in trading days; each day is split into `n_per_day`
//! Euler steps of length `1/n_per_day`. Volatility is either constant or a
//! daily log-variance AR(1) whose shock can be correlated with the previous
//! day's diffusive return.

use std::io::Write;

use chrono::{Datelike, NaiveDate, Weekday};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{next_regressors, ModelSpec, VolBlock, MONTH};
use crate::ingest::{Dataset, IntradaySession, DATE_FORMAT};
use crate::measures::DailyMeasures;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum VolProcess {
    /// Daily volatility `sigma` (so the daily integrated variance is `sigma^2`).
    Constant { sigma: f64 },
    /// `h_{d+1} = mean + persistence (h_d - mean) + vol_of_vol * eta_d`, `sigma_d^2 = exp(h_d)`.
    LogOu { mean_log_var: f64, persistence: f64, vol_of_vol: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum JumpSign {
    Both,
    PositiveOnly,
    NegativeOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub days: usize,
    pub n_per_day: usize,
    /// Drift per day.
    pub drift: f64,
    pub vol: VolProcess,
    /// Correlation between a day's diffusive shock and the next log-variance
    /// shock; negative values plant a leverage effect.
    pub leverage_rho: f64,
    /// Expected jumps per day.
    pub jump_intensity: f64,
    pub jump_mean: f64,
    pub jump_sd: f64,
    pub jump_sign: JumpSign,
    pub seed: u64,
    pub start: NaiveDate,
    pub market: String,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            days: 1000,
            n_per_day: 78,
            drift: 0.0,
            vol: VolProcess::LogOu { mean_log_var: -8.8, persistence: 0.97, vol_of_vol: 0.2 },
            leverage_rho: 0.0,
            jump_intensity: 0.15,
            jump_mean: 0.0,
            jump_sd: 0.004,
            jump_sign: JumpSign::Both,
            seed: 1,
            start: NaiveDate::from_ymd_opt(2001, 1, 4).expect("valid date"),
            market: "simulated".into(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Invalid(format!("simulation config: {m}")));
        if self.n_per_day < 2 {
            return bad("n_per_day must be at least 2");
        }
        if !(self.jump_intensity >= 0.0) || !self.jump_intensity.is_finite() {
            return bad("jump intensity must be non-negative");
        }
        if !(self.jump_sd >= 0.0) {
            return bad("jump size sd must be non-negative");
        }
        if !(-1.0..=1.0).contains(&self.leverage_rho) {
            return bad("leverage correlation must lie in [-1, 1]");
        }
        match self.vol {
            VolProcess::Constant { sigma } if !(sigma >= 0.0) || !sigma.is_finite() => {
                bad("sigma must be non-negative")
            }
            VolProcess::LogOu { persistence, vol_of_vol, mean_log_var }
                if !(persistence.abs() < 1.0) || !(vol_of_vol >= 0.0) || !mean_log_var.is_finite() =>
            {
                bad("log-variance process needs |persistence| < 1 and vol_of_vol >= 0")
            }
            _ => Ok(()),
        }
    }
}

/// Exact per-day quantities behind a simulated path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruthDay {
    pub date: NaiveDate,
    /// Sum over steps of `sigma^2 * dt`.
    pub iv: f64,
    /// Sum of squared upward (and zero) jumps.
    pub jump2_plus: f64,
    pub jump2_minus: f64,
    pub jump_count: usize,
}

impl TruthDay {
    pub fn jump2(&self) -> f64 {
        self.jump2_plus + self.jump2_minus
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimTruth {
    pub days: Vec<TruthDay>,
}

/// Weekdays from `start` onward.
pub fn trading_days(start: NaiveDate, count: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(count);
    let mut d = start;
    while out.len() < count {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d = d.succ_opt().expect("date in range");
    }
    out
}

pub fn simulate(config: &SimConfig) -> Result<(Dataset, SimTruth)> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = config.n_per_day;
    let dt = 1.0 / n as f64;
    let poisson = (config.jump_intensity > 0.0)
        .then(|| Poisson::new(config.jump_intensity))
        .transpose()
        .map_err(|e| Error::Invalid(format!("jump intensity: {e}")))?;
    let jump_size = Normal::new(config.jump_mean, config.jump_sd)
        .map_err(|e| Error::Invalid(format!("jump size: {e}")))?;

    let mut log_var = match config.vol {
        VolProcess::Constant { sigma } => (sigma * sigma).ln(),
        VolProcess::LogOu { mean_log_var, .. } => mean_log_var,
    };

    let dates = trading_days(config.start, config.days);
    let mut sessions = Vec::with_capacity(config.days);
    let mut truth = Vec::with_capacity(config.days);
    for date in dates {
        let var = match config.vol {
            VolProcess::Constant { sigma } => sigma * sigma,
            VolProcess::LogOu { .. } => log_var.exp(),
        };
        let step_sd = (var * dt).sqrt();
        let mut returns = Vec::with_capacity(n);
        let mut iv = 0.0;
        let mut shock_sum = 0.0;
        for _ in 0..n {
            let z: f64 = StandardNormal.sample(&mut rng);
            shock_sum += z;
            iv += var * dt;
            returns.push(config.drift * dt + step_sd * z);
        }

        let count = poisson.as_ref().map(|p| p.sample(&mut rng) as usize).unwrap_or(0);
        let (mut plus, mut minus) = (0.0, 0.0);
        for _ in 0..count {
            let raw: f64 = jump_size.sample(&mut rng);
            let k = match config.jump_sign {
                JumpSign::Both => raw,
                JumpSign::PositiveOnly => raw.abs(),
                JumpSign::NegativeOnly => -raw.abs(),
            };
            let at = rng.random_range(0..n);
            returns[at] += k;
            if k >= 0.0 {
                plus += k * k;
            } else {
                minus += k * k;
            }
        }

        if let VolProcess::LogOu { mean_log_var, persistence, vol_of_vol } = config.vol {
            let z_day = shock_sum / (n as f64).sqrt();
            let xi: f64 = StandardNormal.sample(&mut rng);
            let rho = config.leverage_rho;
            let eta = rho * z_day + (1.0 - rho * rho).sqrt() * xi;
            log_var = mean_log_var + persistence * (log_var - mean_log_var) + vol_of_vol * eta;
        }

        sessions.push(IntradaySession { date, returns });
        truth.push(TruthDay { date, iv, jump2_plus: plus, jump2_minus: minus, jump_count: count });
    }
    Ok((Dataset::new(config.market.clone(), sessions)?, SimTruth { days: truth }))
}

pub fn write_truth<W: Write>(mut w: W, truth: &SimTruth) -> Result<()> {
    writeln!(w, "# simulation truth; raw squared log-return units (iv, jump2_plus, jump2_minus)")?;
    writeln!(w, "date,iv,jump2_plus,jump2_minus")?;
    for d in &truth.days {
        writeln!(
            w,
            "{},{:.16e},{:.16e},{:.16e}",
            d.date.format(DATE_FORMAT),
            d.iv,
            d.jump2_plus,
            d.jump2_minus
        )?;
    }
    Ok(())
}

/// Days generated and discarded before a HAR data-generating process is recorded.
pub const HAR_BURN_IN: usize = 500;

/// Generates daily measures whose `ln RV` follows `spec`'s regression
/// equation exactly with Gaussian innovations of sd `noise_sd`.
///
/// `coefficients` follows `spec.coefficient_names()`. The auxiliary daily
/// quantities are drawn as follows, given that day's RV:
/// - positive semivariance share uniform on (0.3, 0.7);
/// - a jump with probability 0.3, taking a uniform (0, 0.4) share of RV,
///   with BV = RV - jump;
/// - daily return `sqrt(RV) * z`, `z` standard normal.
pub fn simulate_har_dgp(
    coefficients: &[f64],
    spec: ModelSpec,
    days: usize,
    noise_sd: f64,
    seed: u64,
) -> Result<Vec<DailyMeasures>> {
    if coefficients.len() != spec.dimension() {
        return Err(Error::Invalid(format!(
            "{} expects {} coefficients, got {}",
            spec,
            spec.dimension(),
            coefficients.len()
        )));
    }
    let persistence: f64 = match spec.vol_block() {
        VolBlock::Rv => coefficients[1..4].iter().sum(),
        VolBlock::Rsv => coefficients[1..7].iter().sum(),
    };
    if !(persistence.abs() < 1.0) {
        return Err(Error::Invalid(format!(
            "explosive coefficients: volatility block sums to {persistence}"
        )));
    }
    if !(noise_sd >= 0.0) {
        return Err(Error::Invalid("noise sd must be non-negative".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = days + HAR_BURN_IN;
    let dates = trading_days(NaiveDate::from_ymd_opt(1990, 1, 1).expect("valid date"), total);
    let level = coefficients[0] / (1.0 - persistence);

    let mut out: Vec<DailyMeasures> = Vec::with_capacity(total);
    for (i, date) in dates.into_iter().enumerate() {
        let eps: f64 = StandardNormal.sample(&mut rng);
        let ln_rv = if i < MONTH {
            level + noise_sd * eps
        } else {
            let x = next_regressors(&out, spec)?;
            x.iter().zip(coefficients).map(|(a, b)| a * b).sum::<f64>() + noise_sd * eps
        };
        if !ln_rv.is_finite() || ln_rv > 0.0 {
            return Err(Error::Numerical(format!("HAR process left its range (ln RV = {ln_rv})")));
        }
        let rv = ln_rv.exp();
        let share: f64 = rng.random_range(0.3..0.7);
        let jump = if rng.random_bool(0.3) { rng.random_range(0.0..0.4) * rv } else { 0.0 };
        let z: f64 = StandardNormal.sample(&mut rng);
        let rsv_plus = share * rv;
        out.push(DailyMeasures {
            date,
            rv,
            bv: Some(rv - jump),
            rsv_plus: Some(rsv_plus),
            rsv_minus: Some(rv - rsv_plus),
            ret: Some(rv.sqrt() * z),
            n: None,
        });
    }
    Ok(out.split_off(HAR_BURN_IN))
}
