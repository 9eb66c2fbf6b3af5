//! Per-day realized quantities: realized variance, bipower variation,
//! realized semivariances, and the symmetric and signed jump components.
//!
//! All values are in raw squared-log-return units. Display scaling (x1000)
//! happens only in reports.

use std::f64::consts::FRAC_PI_2;
use std::io::Write;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{Dataset, IntradaySession, DATE_FORMAT};

/// `mu_1^{-2}` where `mu_1 = E|Z| = sqrt(2/pi)`.
pub const BIPOWER_SCALE: f64 = FRAC_PI_2;

/// Realized measures of one trading day.
///
/// Fields that were not supplied (measures loaded from a partial file) are
/// `None`; jump components are derived on demand so they always satisfy
/// their truncation identities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DailyMeasures {
    pub date: NaiveDate,
    pub rv: f64,
    pub bv: Option<f64>,
    pub rsv_plus: Option<f64>,
    pub rsv_minus: Option<f64>,
    /// Within-session log return.
    pub ret: Option<f64>,
    pub n: Option<usize>,
}

impl DailyMeasures {
    /// Measures carrying only a realized variance.
    pub fn from_rv(date: NaiveDate, rv: f64) -> Self {
        DailyMeasures { date, rv, bv: None, rsv_plus: None, rsv_minus: None, ret: None, n: None }
    }

    pub fn j(&self) -> Option<f64> {
        self.bv.map(|bv| (self.rv - bv).max(0.0))
    }

    pub fn j_plus(&self) -> Option<f64> {
        Some((self.rsv_plus? - 0.5 * self.bv?).max(0.0))
    }

    pub fn j_minus(&self) -> Option<f64> {
        Some((self.rsv_minus? - 0.5 * self.bv?).max(0.0))
    }

    pub fn has_semivariances(&self) -> bool {
        self.rsv_plus.is_some() && self.rsv_minus.is_some()
    }
}

pub fn realized_volatility(returns: &[f64]) -> Result<f64> {
    if returns.is_empty() {
        return Err(Error::InsufficientData("realized variance needs at least one return".into()));
    }
    Ok(returns.iter().map(|r| r * r).sum())
}

pub fn bipower_variation(returns: &[f64]) -> Result<f64> {
    if returns.len() < 2 {
        return Err(Error::InsufficientData("bipower variation needs at least two returns".into()));
    }
    let s: f64 = returns.windows(2).map(|w| w[1].abs() * w[0].abs()).sum();
    Ok(BIPOWER_SCALE * s)
}

fn check_nonneg(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 {
        Ok(())
    } else {
        Err(Error::Invalid(format!("{name} must be non-negative, found {v}")))
    }
}

/// `max(rv - bv, 0)`.
pub fn jump_component(rv: f64, bv: f64) -> Result<f64> {
    check_nonneg("rv", rv)?;
    check_nonneg("bv", bv)?;
    Ok((rv - bv).max(0.0))
}

/// Upside and downside semivariance. Zero returns count as upside.
pub fn semivariances(returns: &[f64]) -> Result<(f64, f64)> {
    if returns.is_empty() {
        return Err(Error::InsufficientData("semivariances need at least one return".into()));
    }
    let mut plus = 0.0;
    let mut minus = 0.0;
    for &r in returns {
        if r >= 0.0 {
            plus += r * r;
        } else {
            minus += r * r;
        }
    }
    Ok((plus, minus))
}

/// `(max(rsv+ - bv/2, 0), max(rsv- - bv/2, 0))`.
pub fn signed_jumps(rsv_plus: f64, rsv_minus: f64, bv: f64) -> Result<(f64, f64)> {
    check_nonneg("rsv_plus", rsv_plus)?;
    check_nonneg("rsv_minus", rsv_minus)?;
    check_nonneg("bv", bv)?;
    Ok(((rsv_plus - 0.5 * bv).max(0.0), (rsv_minus - 0.5 * bv).max(0.0)))
}

/// All realized measures of a session. `rv` is stored as the sum of the two
/// semivariances so the decomposition holds exactly.
pub fn compute_daily(session: &IntradaySession) -> Result<DailyMeasures> {
    if session.n() < 2 {
        return Err(Error::InsufficientData(format!(
            "session {} has {} returns; bipower variation needs two",
            session.date,
            session.n()
        )));
    }
    let (plus, minus) = semivariances(&session.returns)?;
    let bv = bipower_variation(&session.returns)?;
    Ok(DailyMeasures {
        date: session.date,
        rv: plus + minus,
        bv: Some(bv),
        rsv_plus: Some(plus),
        rsv_minus: Some(minus),
        ret: Some(session.returns.iter().sum()),
        n: Some(session.n()),
    })
}

pub fn compute_all(dataset: &Dataset) -> Result<Vec<DailyMeasures>> {
    dataset.sessions.par_iter().map(compute_daily).collect()
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.16e}")).unwrap_or_default()
}

/// Writes the measures CSV read by [`crate::ingest::load_measures`].
/// Values carry 17 significant digits, so the round trip is exact.
pub fn write_measures<W: Write>(mut w: W, measures: &[DailyMeasures]) -> Result<()> {
    writeln!(w, "# units: raw squared log returns (rv, rsv_plus, rsv_minus, bv); ret in log-return units; no display scaling")?;
    writeln!(w, "date,rv,rsv_plus,rsv_minus,bv,ret")?;
    for m in measures {
        writeln!(
            w,
            "{},{:.16e},{},{},{},{}",
            m.date.format(DATE_FORMAT),
            m.rv,
            cell(m.rsv_plus),
            cell(m.rsv_minus),
            cell(m.bv),
            cell(m.ret)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
    }

    #[test]
    fn rv_examples() {
        assert!(close(realized_volatility(&[0.01, -0.02, 0.01]).unwrap(), 6.0e-4, 1e-14));
        assert_eq!(realized_volatility(&[0.0, 0.0, 0.0]).unwrap(), 0.0);
        assert!(realized_volatility(&[]).is_err());
    }

    #[test]
    fn bv_examples() {
        let bv = bipower_variation(&[0.01, 0.01, 0.01]).unwrap();
        assert!(close(bv, FRAC_PI_2 * 2e-4, 1e-14));
        assert!(close(bv, 3.14159265e-4, 1e-8));
        assert_eq!(bipower_variation(&[0.01, 0.0]).unwrap(), 0.0);
        assert!(bipower_variation(&[0.01]).is_err());
    }

    #[test]
    fn jump_examples() {
        assert_eq!(jump_component(6e-4, 8e-4).unwrap(), 0.0);
        assert!(close(jump_component(6e-4, 4e-4).unwrap(), 2e-4, 1e-12));
        assert!(jump_component(-1.0, 0.0).is_err());
    }

    #[test]
    fn semivariance_examples() {
        let (p, m) = semivariances(&[0.01, -0.02, 0.01]).unwrap();
        assert!(close(p, 2e-4, 1e-14) && close(m, 4e-4, 1e-14));
        let (p, m) = semivariances(&[0.01, 0.03]).unwrap();
        assert_eq!(m, 0.0);
        assert_eq!(p, realized_volatility(&[0.01, 0.03]).unwrap());
        assert_eq!(semivariances(&[0.0]).unwrap(), (0.0, 0.0));
        assert!(semivariances(&[]).is_err());
    }

    #[test]
    fn signed_jump_examples() {
        assert_eq!(signed_jumps(2e-4, 0.0, 6e-4).unwrap().0, 0.0);
        assert!(close(signed_jumps(0.0, 5e-4, 6e-4).unwrap().1, 2e-4, 1e-12));
        assert!(signed_jumps(0.0, -1e-4, 0.0).is_err());
    }

    #[test]
    fn daily_composition() {
        let s = IntradaySession {
            date: NaiveDate::from_ymd_opt(2019, 9, 20).unwrap(),
            returns: vec![0.01, -0.02, 0.01],
        };
        let m = compute_daily(&s).unwrap();
        assert!(close(m.rv, 6e-4, 1e-14));
        assert!(close(m.rsv_plus.unwrap(), 2e-4, 1e-14));
        assert!(close(m.rsv_minus.unwrap(), 4e-4, 1e-14));
        let bv = FRAC_PI_2 * 4e-4;
        assert!(close(m.bv.unwrap(), bv, 1e-14));
        assert_eq!(m.j(), Some(0.0));
        assert_eq!(m.j_plus(), Some(0.0));
        assert!(close(m.j_minus().unwrap(), 4e-4 - bv / 2.0, 1e-12));
        assert_eq!(m.ret, Some(0.0));

        let zeros = IntradaySession { date: s.date, returns: vec![0.0; 5] };
        let z = compute_daily(&zeros).unwrap();
        assert_eq!((z.rv, z.bv, z.j(), z.j_plus(), z.j_minus()), (0.0, Some(0.0), Some(0.0), Some(0.0), Some(0.0)));

        let short = IntradaySession { date: s.date, returns: vec![0.01] };
        assert!(compute_daily(&short).is_err());
    }

    #[test]
    fn measures_csv_round_trip_is_exact() {
        let s = IntradaySession {
            date: NaiveDate::from_ymd_opt(2019, 9, 20).unwrap(),
            returns: vec![0.0123456789, -0.0211111, 1.0 / 3.0 * 1e-3],
        };
        let m = vec![compute_daily(&s).unwrap()];
        let mut buf = Vec::new();
        write_measures(&mut buf, &m).unwrap();
        let back = crate::ingest::load_measures(buf.as_slice()).unwrap();
        assert_eq!(back[0].rv.to_bits(), m[0].rv.to_bits());
        assert_eq!(back[0].bv, m[0].bv);
        assert_eq!(back[0].rsv_plus, m[0].rsv_plus);
        assert_eq!(back[0].ret, m[0].ret);
    }

    proptest! {
        #[test]
        fn truncations_nonnegative_and_scale_equivariant(
            returns in prop::collection::vec(-0.05f64..0.05, 2..60),
            c in 0.1f64..10.0,
        ) {
            let date = NaiveDate::from_ymd_opt(2020, 1, 2).unwrap();
            let m = compute_daily(&IntradaySession { date, returns: returns.clone() }).unwrap();
            prop_assert!(m.j().unwrap() >= 0.0 && m.j_plus().unwrap() >= 0.0 && m.j_minus().unwrap() >= 0.0);
            prop_assert_eq!(m.rsv_plus.unwrap() + m.rsv_minus.unwrap(), m.rv);

            let scaled: Vec<f64> = returns.iter().map(|r| r * c).collect();
            let s = compute_daily(&IntradaySession { date, returns: scaled }).unwrap();
            let c2 = c * c;
            let tol = 1e-12 * c2 * m.rv.max(1e-300) + 1e-300;
            prop_assert!((s.rv - c2 * m.rv).abs() <= tol * 10.0);
            prop_assert!((s.bv.unwrap() - c2 * m.bv.unwrap()).abs() <= 1e-12 * c2 * m.bv.unwrap() + 1e-300);
            prop_assert!((s.rsv_plus.unwrap() - c2 * m.rsv_plus.unwrap()).abs() <= 1e-12 * c2 * m.rv + 1e-300);
            prop_assert!((s.j().unwrap() - c2 * m.j().unwrap()).abs() <= 1e-11 * c2 * m.rv + 1e-300);
            prop_assert!((s.j_minus().unwrap() - c2 * m.j_minus().unwrap()).abs() <= 1e-11 * c2 * m.rv + 1e-300);
        }
    }
}
