//! Least squares with Newey-West HAC inference.
//!
//! OLS is solved through a Householder QR factorization of the
//! column-equilibrated design, never the normal equations. The same
//! factorization supplies `(X'X)^{-1}` for the HAC sandwich and the
//! condition number used for the rank check.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};

/// Designs whose column-equilibrated condition number exceeds this are rejected.
pub const CONDITION_LIMIT: f64 = 1e10;

/// Two-sided standard normal critical values at 10%, 5% and 1%.
pub const CRITICAL_10: f64 = 1.645;
pub const CRITICAL_5: f64 = 1.960;
pub const CRITICAL_1: f64 = 2.576;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
pub enum Bandwidth {
    /// `floor(4 (T/100)^{2/9})`.
    #[default]
    Auto,
    Fixed(usize),
}

impl Bandwidth {
    pub fn resolve(self, nobs: usize) -> usize {
        match self {
            Bandwidth::Auto => auto_bandwidth(nobs),
            Bandwidth::Fixed(l) => l,
        }
    }
}

impl std::str::FromStr for Bandwidth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Bandwidth::Auto);
        }
        s.parse()
            .map(Bandwidth::Fixed)
            .map_err(|_| Error::Invalid(format!("bandwidth must be `auto` or a lag count, got `{s}`")))
    }
}

pub fn auto_bandwidth(nobs: usize) -> usize {
    (4.0 * (nobs as f64 / 100.0).powf(2.0 / 9.0)).floor() as usize
}

/// Bartlett kernel weight `1 - l/(L+1)`.
pub fn bartlett_weight(lag: usize, bandwidth: usize) -> f64 {
    1.0 - lag as f64 / (bandwidth as f64 + 1.0)
}

/// QR factorization of `X D`, `D` scaling each column to unit norm.
struct Factorization {
    qr: nalgebra::linalg::QR<f64, nalgebra::Dyn, nalgebra::Dyn>,
    r: DMatrix<f64>,
    scale: DVector<f64>,
    condition: f64,
}

fn factorize(x: &DMatrix<f64>, names: &[String]) -> Result<Factorization> {
    let (nobs, k) = x.shape();
    if nobs <= k {
        return Err(Error::InsufficientData(format!("{nobs} observations for {k} regressors")));
    }
    let col_name = |j: usize| names.get(j).cloned().unwrap_or_else(|| format!("x{j}"));
    let mut scale = DVector::zeros(k);
    for j in 0..k {
        let norm = x.column(j).norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::RankDeficient { condition: f64::INFINITY, columns: vec![col_name(j)] });
        }
        scale[j] = 1.0 / norm;
    }
    let mut xs = x.clone();
    for (j, mut col) in xs.column_iter_mut().enumerate() {
        col *= scale[j];
    }
    let qr = xs.qr();
    let r = qr.r();
    let sv = r.clone().svd(false, false).singular_values;
    let (smax, smin) = (sv.max(), sv.min());
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition <= CONDITION_LIMIT) {
        let dmax = (0..k).map(|j| r[(j, j)].abs()).fold(0.0, f64::max);
        let mut columns: Vec<String> =
            (0..k).filter(|&j| r[(j, j)].abs() <= 1e-8 * dmax).map(col_name).collect();
        if columns.is_empty() {
            let worst = (0..k)
                .min_by(|&a, &b| r[(a, a)].abs().total_cmp(&r[(b, b)].abs()))
                .unwrap_or(0);
            columns.push(col_name(worst));
        }
        return Err(Error::RankDeficient { condition, columns });
    }
    Ok(Factorization { qr, r, scale, condition })
}

impl Factorization {
    fn solve(&self, y: &[f64]) -> Result<DVector<f64>> {
        let k = self.r.ncols();
        let mut qty = DVector::from_column_slice(y);
        self.qr.q_tr_mul(&mut qty);
        let rhs = qty.rows(0, k).into_owned();
        let b = self
            .r
            .solve_upper_triangular(&rhs)
            .ok_or_else(|| Error::Numerical("singular triangular factor".into()))?;
        Ok(b.component_mul(&self.scale))
    }

    /// `(X'X)^{-1} = D R^{-1} R^{-T} D`.
    fn bread(&self) -> Result<DMatrix<f64>> {
        let k = self.r.ncols();
        let rinv = self
            .r
            .solve_upper_triangular(&DMatrix::identity(k, k))
            .ok_or_else(|| Error::Numerical("singular triangular factor".into()))?;
        let d = DMatrix::from_diagonal(&self.scale);
        Ok(&d * &rinv * rinv.transpose() * &d)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OlsSolution {
    pub coefficients: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Condition number of the column-equilibrated design.
    pub condition: f64,
}

/// Least-squares coefficients and residuals. `names` label columns in errors.
pub fn ols(x: &DMatrix<f64>, y: &[f64], names: &[String]) -> Result<OlsSolution> {
    if y.len() != x.nrows() {
        return Err(Error::Invalid(format!("{} targets for {} rows", y.len(), x.nrows())));
    }
    let f = factorize(x, names)?;
    let b = f.solve(y)?;
    let fitted = x * &b;
    let residuals = y.iter().zip(fitted.iter()).map(|(yi, fi)| yi - fi).collect();
    Ok(OlsSolution { coefficients: b.as_slice().to_vec(), residuals, condition: f.condition })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HacCovariance {
    pub matrix: DMatrix<f64>,
    pub bandwidth: usize,
    /// Set when the kernel-weighted core or the covariance diagonal is not
    /// positive; standard errors are then unreliable.
    pub flagged: bool,
}

impl HacCovariance {
    /// Square roots of the diagonal; NaN where the diagonal is not positive.
    pub fn standard_errors(&self) -> Vec<f64> {
        self.matrix
            .diagonal()
            .iter()
            .map(|v| if *v > 0.0 { v.sqrt() } else { f64::NAN })
            .collect()
    }
}

/// Newey-West covariance of OLS coefficients with Bartlett weights.
///
/// `(X'X)^{-1} [Γ_0 + Σ_{l=1..L} w_l (Γ_l + Γ_l')] (X'X)^{-1}` with
/// `Γ_l = Σ_t e_t e_{t-l} x_t x_{t-l}'`. No degrees-of-freedom correction.
pub fn newey_west_cov(
    x: &DMatrix<f64>,
    residuals: &[f64],
    bandwidth: Bandwidth,
) -> Result<HacCovariance> {
    let (nobs, k) = x.shape();
    if residuals.len() != nobs {
        return Err(Error::Invalid(format!("{} residuals for {nobs} rows", residuals.len())));
    }
    let lags = bandwidth.resolve(nobs);
    if lags >= nobs {
        return Err(Error::Invalid(format!("bandwidth {lags} not below nobs {nobs}")));
    }
    let names: Vec<String> = (0..k).map(|j| format!("x{j}")).collect();
    let bread = factorize(x, &names)?.bread()?;

    let mut u = x.clone();
    for (i, mut row) in u.row_iter_mut().enumerate() {
        row *= residuals[i];
    }
    let mut core = u.transpose() * &u;
    for l in 1..=lags {
        let w = bartlett_weight(l, lags);
        let gamma = u.rows(l, nobs - l).transpose() * u.rows(0, nobs - l);
        core += (&gamma + gamma.transpose()) * w;
    }

    let mut flagged = false;
    let eig = core.clone().symmetric_eigen().eigenvalues;
    let top = eig.iter().cloned().fold(0.0, f64::max);
    if eig.iter().any(|v| *v < -1e-12 * top) {
        log::warn!("HAC core is not positive semi-definite (min eigenvalue {:.3e})", eig.min());
        flagged = true;
    }

    let cov = &bread * core * &bread;
    let matrix = (&cov + cov.transpose()) * 0.5;
    if matrix.diagonal().iter().any(|v| !(*v > 0.0)) {
        log::warn!("HAC covariance has a non-positive diagonal entry");
        flagged = true;
    }
    Ok(HacCovariance { matrix, bandwidth: lags, flagged })
}

fn total_sum_of_squares(y: &[f64]) -> f64 {
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    y.iter().map(|v| (v - mean) * (v - mean)).sum()
}

pub fn r_squared(y: &[f64], residuals: &[f64]) -> Result<f64> {
    let sst = total_sum_of_squares(y);
    if !(sst > 0.0) {
        return Err(Error::Invalid("constant dependent variable: R² undefined".into()));
    }
    let ssr: f64 = residuals.iter().map(|e| e * e).sum();
    Ok(1.0 - ssr / sst)
}

/// `1 - (SSR/(n-k)) / (SST/(n-1))`.
pub fn adjusted_r2(y: &[f64], residuals: &[f64], k: usize) -> Result<f64> {
    let n = y.len();
    if n <= k {
        return Err(Error::InsufficientData(format!("{n} observations for {k} regressors")));
    }
    let sst = total_sum_of_squares(y);
    if !(sst > 0.0) {
        return Err(Error::Invalid("constant dependent variable: adjusted R² undefined".into()));
    }
    let ssr: f64 = residuals.iter().map(|e| e * e).sum();
    Ok(1.0 - (ssr / (n - k) as f64) / (sst / (n - 1) as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Significance {
    None,
    Ten,
    Five,
    One,
}

impl Significance {
    /// Two-sided large-sample test; boundaries count as rejections.
    pub fn from_t(t: f64) -> Self {
        let a = t.abs();
        if a >= CRITICAL_1 {
            Significance::One
        } else if a >= CRITICAL_5 {
            Significance::Five
        } else if a >= CRITICAL_10 {
            Significance::Ten
        } else {
            Significance::None
        }
    }

    pub fn from_p(p: f64) -> Self {
        if p <= 0.01 {
            Significance::One
        } else if p <= 0.05 {
            Significance::Five
        } else if p <= 0.10 {
            Significance::Ten
        } else {
            Significance::None
        }
    }

    pub fn stars(self) -> &'static str {
        match self {
            Significance::None => "",
            Significance::Ten => "*",
            Significance::Five => "**",
            Significance::One => "***",
        }
    }
}

pub fn significance_stars(t_stat: f64) -> Significance {
    Significance::from_t(t_stat)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FitOptions {
    pub bandwidth: Bandwidth,
    /// Multiply the HAC covariance by `n/(n-k)`.
    pub small_sample: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub label: String,
    pub names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub hac_se: Vec<f64>,
    pub t_stats: Vec<f64>,
    pub r2: f64,
    pub adj_r2: f64,
    #[serde(skip)]
    pub residuals: Vec<f64>,
    pub nobs: usize,
    pub bandwidth_used: usize,
    pub cov_flagged: bool,
    pub condition: f64,
}

impl FitResult {
    pub fn significance(&self, i: usize) -> Significance {
        Significance::from_t(self.t_stats[i])
    }

    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.coefficients[i])
    }
}

/// OLS + HAC standard errors + t statistics + (adjusted) R².
pub fn fit(
    label: impl Into<String>,
    names: &[String],
    x: &DMatrix<f64>,
    y: &[f64],
    options: &FitOptions,
) -> Result<FitResult> {
    let sol = ols(x, y, names)?;
    let mut hac = newey_west_cov(x, &sol.residuals, options.bandwidth)?;
    let (nobs, k) = x.shape();
    if options.small_sample {
        hac.matrix *= nobs as f64 / (nobs - k) as f64;
    }
    let hac_se = hac.standard_errors();
    let t_stats = sol.coefficients.iter().zip(&hac_se).map(|(b, s)| b / s).collect();
    Ok(FitResult {
        label: label.into(),
        names: names.to_vec(),
        r2: r_squared(y, &sol.residuals)?,
        adj_r2: adjusted_r2(y, &sol.residuals, k)?,
        coefficients: sol.coefficients,
        hac_se,
        t_stats,
        residuals: sol.residuals,
        nobs,
        bandwidth_used: hac.bandwidth,
        cov_flagged: hac.flagged,
        condition: sol.condition,
    })
}
