//! Library results checked against naive, independently written references.

mod common;

use common::{compensated_sum, normal_equations, rel_err, simulated_measures};
use harvol::diagnostics::{describe, ljung_box};
use harvol::estimation::ols;
use harvol::evaluation::{dm_test, losses, LossKind};
use harvol::features::{build_rows, ModelSpec};
use harvol::forecast::rolling_on_rows;
use harvol::ingest::IntradaySession;
use harvol::measures::{self, DailyMeasures};
use harvol::stats::{chi_square_sf, normal_cdf};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn random_system(rows: usize, cols: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut z = || -> f64 { StandardNormal.sample(&mut rng) };
    let x: Vec<Vec<f64>> = (0..rows)
        .map(|_| std::iter::once(1.0).chain((1..cols).map(|_| z())).collect())
        .collect();
    let y = x.iter().map(|r| r.iter().enumerate().map(|(j, v)| v * (j as f64 * 0.3 - 1.0)).sum::<f64>() + z()).collect();
    (x, y)
}

fn to_matrix(x: &[Vec<f64>]) -> DMatrix<f64> {
    DMatrix::from_fn(x.len(), x[0].len(), |i, j| x[i][j])
}

fn names(k: usize) -> Vec<String> {
    (0..k).map(|i| format!("x{i}")).collect()
}

#[test]
fn ols_agrees_with_normal_equations() {
    for (rows, cols, seed) in [(50, 3, 1), (200, 7, 2), (1000, 12, 3)] {
        let (x, y) = random_system(rows, cols, seed);
        let sol = ols(&to_matrix(&x), &y, &names(cols)).unwrap();
        let oracle = normal_equations(&x, &y);
        for (a, b) in sol.coefficients.iter().zip(&oracle) {
            assert!(rel_err(*a, *b) < 1e-9, "{a} vs {b}");
        }
    }
}

/// Row construction written out directly from the definitions.
fn naive_row(m: &[DailyMeasures], t: usize, spec: ModelSpec) -> Vec<f64> {
    let s = t - 1;
    let mean = |f: &dyn Fn(&DailyMeasures) -> f64, w: usize| -> f64 {
        let mut acc = 0.0;
        for d in &m[s + 1 - w..=s] {
            acc += f(d);
        }
        acc / w as f64
    };
    let trio = |f: &dyn Fn(&DailyMeasures) -> f64| [f(&m[s]), mean(f, 5), mean(f, 22)];
    let mut x = vec![1.0];
    if spec.name().starts_with("HAR") {
        x.extend(trio(&|d| d.rv).map(f64::ln));
    } else {
        x.extend(trio(&|d| d.rsv_plus.unwrap()).map(f64::ln));
        x.extend(trio(&|d| d.rsv_minus.unwrap()).map(f64::ln));
    }
    if spec.name().contains("AJ") {
        x.extend(trio(&|d| d.j_plus().unwrap()).map(f64::ln_1p));
        x.extend(trio(&|d| d.j_minus().unwrap()).map(f64::ln_1p));
    } else {
        x.extend(trio(&|d| d.j().unwrap()).map(f64::ln_1p));
    }
    if spec.name().ends_with("LE") {
        let a = trio(&|d| d.ret.unwrap().abs());
        let r = trio(&|d| d.ret.unwrap());
        x.extend(a);
        for i in 0..3 {
            x.push(if r[i] < 0.0 { a[i] } else { 0.0 });
        }
    }
    x
}

#[test]
fn rows_agree_with_naive_builder() {
    let m = simulated_measures(120, 11);
    for spec in ModelSpec::ALL {
        let rows = build_rows(&m, spec).unwrap();
        assert_eq!(rows.len(), m.len() - 22);
        for (i, row) in rows.rows.iter().enumerate() {
            let t = i + 22;
            assert_eq!(row.date, m[t].date);
            assert_eq!(row.target, m[t].rv.ln());
            let naive = naive_row(&m, t, spec);
            assert_eq!(naive.len(), row.regressors.len());
            for (a, b) in row.regressors.iter().zip(&naive) {
                assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "{spec} day {t}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn rolling_agrees_with_naive_refit() {
    let m = simulated_measures(300, 12);
    let rows = build_rows(&m, ModelSpec::HarJLe).unwrap();
    let window = 150;
    let run = rolling_on_rows(&rows, window).unwrap();
    assert_eq!(run.records.len(), rows.len() - window);
    for (i, rec) in run.records.iter().enumerate() {
        let target = window + i;
        let x: Vec<Vec<f64>> = rows.rows[target - window..target].iter().map(|r| r.regressors.clone()).collect();
        let y: Vec<f64> = rows.rows[target - window..target].iter().map(|r| r.target).collect();
        let b = normal_equations(&x, &y);
        let p: f64 = rows.rows[target].regressors.iter().zip(&b).map(|(a, c)| a * c).sum();
        assert!((rec.predicted - p).abs() < 1e-7 * p.abs(), "{} vs {p}", rec.predicted);
        assert_eq!(rec.realized, rows.rows[target].target);
    }
}

#[test]
fn measures_agree_with_naive_loops() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in [2usize, 3, 17, 390] {
        let r: Vec<f64> = (0..n).map(|_| 0.001 * Distribution::<f64>::sample(&StandardNormal, &mut rng)).collect();
        let rv = compensated_sum(r.iter().map(|v| v * v));
        let mut bv = 0.0;
        for j in 1..n {
            bv += r[j].abs() * r[j - 1].abs();
        }
        bv *= std::f64::consts::PI / 2.0;
        let mut plus = 0.0;
        let mut minus = 0.0;
        for v in &r {
            if *v >= 0.0 {
                plus += v * v;
            } else {
                minus += v * v;
            }
        }
        assert!(rel_err(measures::realized_volatility(&r).unwrap(), rv) < 1e-13);
        assert!(rel_err(measures::bipower_variation(&r).unwrap(), bv) < 1e-13);
        let d = measures::compute_daily(&IntradaySession {
            date: chrono::NaiveDate::from_ymd_opt(2020, 3, 2).unwrap(),
            returns: r.clone(),
        })
        .unwrap();
        assert!(rel_err(d.rv, rv) < 1e-13);
        assert!((d.rsv_plus.unwrap() - plus).abs() <= 1e-13 * rv);
        assert!((d.rsv_minus.unwrap() - minus).abs() <= 1e-13 * rv);
        assert!((d.j().unwrap() - (rv - bv).max(0.0)).abs() <= 1e-12 * rv);
        assert!((d.j_plus().unwrap() - (plus - bv / 2.0).max(0.0)).abs() <= 1e-12 * rv);
        assert!((d.j_minus().unwrap() - (minus - bv / 2.0).max(0.0)).abs() <= 1e-12 * rv);
        assert_eq!(d.ret.unwrap(), r.iter().sum::<f64>());
    }
}

fn synthetic_records(model: ModelSpec, seed: u64, m: usize) -> Vec<harvol::forecast::ForecastRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = chrono::NaiveDate::from_ymd_opt(2010, 1, 1).unwrap();
    (0..m)
        .map(|i| {
            let a: f64 = -9.0 + Distribution::<f64>::sample(&StandardNormal, &mut rng);
            let e: f64 = StandardNormal.sample(&mut rng);
            let date = start + chrono::Duration::days(i as i64);
            harvol::forecast::ForecastRecord {
                date,
                model,
                predicted: a + 0.4 * e,
                realized: a,
                window_start: date,
                window_end: date,
            }
        })
        .collect()
}

#[test]
fn losses_and_dm_agree_with_naive_loops() {
    let a = synthetic_records(ModelSpec::HarJ, 1, 400);
    let mut b = synthetic_records(ModelSpec::RsvJ, 2, 400);
    for (x, y) in b.iter_mut().zip(&a) {
        x.realized = y.realized;
    }
    let rep = losses(&a).unwrap();
    let (mut mse, mut mae, mut hmse, mut hmae) = (0.0, 0.0, 0.0, 0.0);
    for r in &a {
        let e = r.predicted - r.realized;
        mse += e * e;
        mae += e.abs();
        let h = 1.0 - r.predicted / r.realized;
        hmse += h * h;
        hmae += h.abs();
    }
    let m = a.len() as f64;
    assert!(rel_err(rep.mse, mse / m) < 1e-12);
    assert!(rel_err(rep.mae, mae / m) < 1e-12);
    assert!(rel_err(rep.hmse, hmse / m) < 1e-12);
    assert!(rel_err(rep.hmae, hmae / m) < 1e-12);

    let dm = dm_test(&a, &b, LossKind::Mae, 0).unwrap();
    let d: Vec<f64> = a
        .iter()
        .zip(&b)
        .map(|(x, y)| (x.predicted - x.realized).abs() - (y.predicted - y.realized).abs())
        .collect();
    let mean = d.iter().sum::<f64>() / m;
    let var = d.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / m;
    assert!(rel_err(dm.statistic, mean / (var / m).sqrt()) < 1e-10);
}

#[test]
fn chi_square_matches_even_df_closed_form() {
    // even df = 2k: P(X > x) = exp(-x/2) sum_{i<k} (x/2)^i / i!
    for k in 1..=15usize {
        for x in [0.1, 1.0, 5.0, 12.5, 31.4, 60.0] {
            let h: f64 = x / 2.0;
            let mut term = 1.0;
            let mut s = 0.0;
            for i in 0..k {
                if i > 0 {
                    term *= h / i as f64;
                }
                s += term;
            }
            let oracle = (-h).exp() * s;
            assert!((chi_square_sf(x, 2 * k) - oracle).abs() < 1e-10, "df {} x {x}", 2 * k);
        }
    }
}

#[test]
fn normal_cdf_matches_series() {
    // Phi(z) = 1/2 + phi(z) sum_n z^{2n+1} / (1*3*...*(2n+1)); statrs erfc carries ~1e-11 absolute error
    for z in [0.05, 0.5, 1.0, 1.645, 1.96, 2.576, 3.0] {
        let phi = (-z * z / 2.0f64).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let mut term = z;
        let mut s = z;
        for n in 1..200 {
            term *= z * z / (2 * n + 1) as f64;
            s += term;
        }
        let oracle = 0.5 + phi * s;
        assert!((normal_cdf(z) - oracle).abs() < 1e-10, "z {z}: {:e}", normal_cdf(z) - oracle);
        assert!((normal_cdf(-z) - (1.0 - oracle)).abs() < 1e-10);
    }
}

#[test]
fn normal_sample_has_no_excess_kurtosis() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let s: Vec<f64> = (0..100_000).map(|_| StandardNormal.sample(&mut rng)).collect();
    let row = describe(&s, "z").unwrap();
    assert!(row.kurtosis.abs() < 0.1, "{}", row.kurtosis);
    assert!(row.skewness.abs() < 0.05);
    assert!(row.min <= row.median && row.median <= row.max);
}

#[test]
fn ljung_box_matches_direct_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let s: Vec<f64> = (0..300).map(|_| StandardNormal.sample(&mut rng)).collect();
    let t = s.len() as f64;
    let mean = s.iter().sum::<f64>() / t;
    let c0: f64 = s.iter().map(|v| (v - mean).powi(2)).sum();
    let mut q = 0.0;
    for k in 1..=20 {
        let mut ck = 0.0;
        for i in k..s.len() {
            ck += (s[i] - mean) * (s[i - k] - mean);
        }
        q += (ck / c0).powi(2) / (t - k as f64);
    }
    q *= t * (t + 2.0);
    let (lq, p) = ljung_box(&s, 20).unwrap();
    assert!(rel_err(lq, q) < 1e-12);
    assert!((0.0..=1.0).contains(&p));
}
