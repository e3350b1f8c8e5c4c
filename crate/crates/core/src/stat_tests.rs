//! Unit-root (ADF, Phillips-Perron, DF-GLS), stationarity (KPSS) and
//! Johansen maximum-eigenvalue cointegration tests, plus the combined
//! verdict used when the tests disagree.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{gaussian_loglik, ModelCriteria};
use crate::linalg::least_squares;
use crate::series::{AnnualSeries, SeriesFrame};

/// Samples shorter than this get a low-power warning on every report.
pub const LOW_POWER_N: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TestKind {
    #[serde(rename = "ADF")]
    Adf,
    #[serde(rename = "PP")]
    Pp,
    #[serde(rename = "KPSS")]
    Kpss,
    #[serde(rename = "DFGLS")]
    Dfgls,
}

impl TestKind {
    pub fn null_hypothesis(self) -> &'static str {
        match self {
            TestKind::Kpss => "stationarity",
            _ => "unit root",
        }
    }

    /// True when small statistics reject (left-tailed tests).
    pub fn left_tailed(self) -> bool {
        self != TestKind::Kpss
    }
}

impl fmt::Display for TestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TestKind::Adf => "ADF",
            TestKind::Pp => "PP",
            TestKind::Kpss => "KPSS",
            TestKind::Dfgls => "DF-GLS",
        })
    }
}

/// Deterministic terms in the test regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Deterministic {
    None,
    Constant,
    ConstantTrend,
}

impl Deterministic {
    fn count(self) -> usize {
        match self {
            Deterministic::None => 0,
            Deterministic::Constant => 1,
            Deterministic::ConstantTrend => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalValues {
    #[serde(rename = "1%")]
    pub pct1: f64,
    #[serde(rename = "5%")]
    pub pct5: f64,
    #[serde(rename = "10%")]
    pub pct10: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub test_name: TestKind,
    pub series: String,
    pub spec: Deterministic,
    /// Augmentation lags (ADF, DF-GLS) or Bartlett bandwidth (PP, KPSS).
    pub lags: usize,
    pub statistic: f64,
    pub critical_values: CriticalValues,
    pub reject_at_5pct: bool,
    pub null_hypothesis: String,
    pub n_obs: usize,
    pub low_power_warning: bool,
}

impl TestReport {
    fn new(
        kind: TestKind,
        series: &AnnualSeries,
        spec: Deterministic,
        lags: usize,
        statistic: f64,
        critical_values: CriticalValues,
        n_obs: usize,
    ) -> Self {
        let reject = if kind.left_tailed() {
            statistic < critical_values.pct5
        } else {
            statistic > critical_values.pct5
        };
        Self {
            test_name: kind,
            series: series.name().to_string(),
            spec,
            lags,
            statistic,
            critical_values,
            reject_at_5pct: reject,
            null_hypothesis: kind.null_hypothesis().to_string(),
            n_obs,
            low_power_warning: series.len() < LOW_POWER_N,
        }
    }

    /// Whether this report, read in its own direction, points to stationarity.
    pub fn indicates_stationary(&self) -> bool {
        match self.test_name {
            TestKind::Kpss => !self.reject_at_5pct,
            _ => self.reject_at_5pct,
        }
    }
}

// MacKinnon (2010) response surfaces for the Dickey-Fuller t statistic,
// one regressor: cv(T) = b0 + b1/T + b2/T² + b3/T³, rows 1%, 5%, 10%.
const DF_SURFACE_NONE: [[f64; 4]; 3] = [
    [-2.56574, -2.2358, -3.627, 0.0],
    [-1.94100, -0.2686, -3.365, 31.223],
    [-1.61682, 0.2656, -2.714, 25.364],
];
const DF_SURFACE_CONSTANT: [[f64; 4]; 3] = [
    [-3.43035, -6.5393, -16.786, -79.433],
    [-2.86154, -2.8903, -4.234, -40.040],
    [-2.56677, -1.5384, -2.809, 0.0],
];
const DF_SURFACE_TREND: [[f64; 4]; 3] = [
    [-3.95877, -9.0531, -28.428, -134.155],
    [-3.41049, -4.3904, -9.036, -45.374],
    [-3.12705, -2.5856, -3.925, -22.380],
];

/// Dickey-Fuller critical values at effective sample size `n_obs`.
pub fn df_critical_values(spec: Deterministic, n_obs: usize) -> CriticalValues {
    let table = match spec {
        Deterministic::None => &DF_SURFACE_NONE,
        Deterministic::Constant => &DF_SURFACE_CONSTANT,
        Deterministic::ConstantTrend => &DF_SURFACE_TREND,
    };
    let t = n_obs as f64;
    let eval = |b: &[f64; 4]| b[0] + b[1] / t + b[2] / (t * t) + b[3] / (t * t * t);
    CriticalValues {
        pct1: eval(&table[0]),
        pct5: eval(&table[1]),
        pct10: eval(&table[2]),
    }
}

/// Asymptotic KPSS critical values.
pub fn kpss_critical_values(spec: Deterministic) -> Result<CriticalValues> {
    match spec {
        Deterministic::Constant => Ok(CriticalValues {
            pct1: 0.739,
            pct5: 0.463,
            pct10: 0.347,
        }),
        Deterministic::ConstantTrend => Ok(CriticalValues {
            pct1: 0.216,
            pct5: 0.146,
            pct10: 0.119,
        }),
        Deterministic::None => Err(Error::InvalidArgument(
            "KPSS needs a constant or constant+trend specification".into(),
        )),
    }
}

/// `floor(4 (n/100)^{2/9})`, the Bartlett bandwidth for PP and KPSS.
pub fn newey_west_bandwidth(n: usize) -> usize {
    (4.0 * (n as f64 / 100.0).powf(2.0 / 9.0)).floor() as usize
}

/// Bartlett-kernel long-run variance of `e` (mean assumed zero).
pub fn long_run_variance(e: &[f64], bandwidth: usize) -> f64 {
    let n = e.len() as f64;
    let gamma = |j: usize| (j..e.len()).map(|t| e[t] * e[t - j]).sum::<f64>() / n;
    let mut lrv = gamma(0);
    for j in 1..=bandwidth.min(e.len().saturating_sub(1)) {
        lrv += 2.0 * (1.0 - j as f64 / (bandwidth as f64 + 1.0)) * gamma(j);
    }
    lrv
}

struct DfRegression {
    t_stat: f64,
    gamma: f64,
    se_gamma: f64,
    residuals: Vec<f64>,
    n_obs: usize,
    n_coef: usize,
}

/// `Δy_t = det + γ y_{t-1} + Σ_{i=1..lags} δ_i Δy_{t-i}` over rows `t = start..n`.
fn df_regression(y: &[f64], lags: usize, spec: Deterministic, start: usize) -> Result<DfRegression> {
    let n = y.len();
    let rows = n - start;
    let det = spec.count();
    let n_coef = det + 1 + lags;
    if rows <= n_coef {
        return Err(Error::TooShort {
            needed: start + n_coef + 1,
            got: n,
        });
    }
    let x = DMatrix::from_fn(rows, n_coef, |i, j| {
        let t = start + i;
        match (j, spec) {
            (0, Deterministic::Constant | Deterministic::ConstantTrend) => 1.0,
            (1, Deterministic::ConstantTrend) => t as f64,
            _ => {
                let j = j - det;
                if j == 0 {
                    y[t - 1]
                } else {
                    y[t - j] - y[t - j - 1]
                }
            }
        }
    });
    let dy = DVector::from_fn(rows, |i, _| y[start + i] - y[start + i - 1]);
    let fit = least_squares(&x, &dy).map_err(|e| match e {
        Error::RankDeficient => Error::SingularRegression,
        other => other,
    })?;
    let s2 = fit.ssr / (rows - n_coef) as f64;
    let se = (s2 * fit.xtx_inv[(det, det)]).sqrt();
    if !(se > 0.0) || !se.is_finite() {
        return Err(Error::SingularRegression);
    }
    let gamma = fit.beta[det];
    Ok(DfRegression {
        t_stat: gamma / se,
        gamma,
        se_gamma: se,
        residuals: fit.residuals.iter().copied().collect(),
        n_obs: rows,
        n_coef,
    })
}

/// Lag order minimizing AICc on the common sample `t = max_lags+1..n`.
fn select_lags(y: &[f64], max_lags: usize, spec: Deterministic) -> Result<usize> {
    let start = max_lags + 1;
    let mut best: Option<(f64, usize)> = None;
    for k in 0..=max_lags {
        let reg = df_regression(y, k, spec, start)?;
        let ssr: f64 = reg.residuals.iter().map(|e| e * e).sum();
        let loglik = gaussian_loglik(ssr, reg.n_obs);
        let crit = ModelCriteria::new(loglik, reg.n_coef + 1, reg.n_obs).aicc_or_aic();
        if best.is_none_or(|(b, _)| crit < b) {
            best = Some((crit, k));
        }
    }
    Ok(best.map(|(_, k)| k).unwrap_or(0))
}

fn augmented_df(
    kind: TestKind,
    series: &AnnualSeries,
    y: &[f64],
    max_lags: usize,
    spec: Deterministic,
) -> Result<TestReport> {
    let lags = select_lags(y, max_lags, spec)?;
    let reg = df_regression(y, lags, spec, lags + 1)?;
    Ok(TestReport::new(
        kind,
        series,
        spec,
        lags,
        reg.t_stat,
        df_critical_values(spec, reg.n_obs),
        reg.n_obs,
    ))
}

/// Augmented Dickey-Fuller test with AICc lag selection up to `max_lags`.
pub fn adf_test(series: &AnnualSeries, max_lags: usize, spec: Deterministic) -> Result<TestReport> {
    let needed = max_lags + 8;
    if series.len() < needed {
        return Err(Error::TooShort {
            needed,
            got: series.len(),
        });
    }
    augmented_df(TestKind::Adf, series, series.values(), max_lags, spec)
}

/// Phillips-Perron Z-tau: the DF(0) t-ratio corrected with a Bartlett
/// long-run variance of the regression residuals.
pub fn pp_test(series: &AnnualSeries, spec: Deterministic) -> Result<TestReport> {
    let n = series.len();
    if n < 10 {
        return Err(Error::TooShort { needed: 10, got: n });
    }
    let reg = df_regression(series.values(), 0, spec, 1)?;
    let t = reg.n_obs as f64;
    let e = &reg.residuals;
    let bandwidth = newey_west_bandwidth(reg.n_obs);
    let gamma0 = e.iter().map(|v| v * v).sum::<f64>() / t;
    let lambda2 = long_run_variance(e, bandwidth);
    if !(lambda2 > 0.0) {
        return Err(Error::SingularRegression);
    }
    let s = (e.iter().map(|v| v * v).sum::<f64>() / (reg.n_obs - reg.n_coef) as f64).sqrt();
    let lambda = lambda2.sqrt();
    let z_tau = (gamma0 / lambda2).sqrt() * reg.t_stat
        - 0.5 * (lambda2 - gamma0) / lambda * (t * reg.se_gamma / s);
    debug_assert!(reg.gamma.is_finite());
    Ok(TestReport::new(
        TestKind::Pp,
        series,
        spec,
        bandwidth,
        z_tau,
        df_critical_values(spec, reg.n_obs),
        reg.n_obs,
    ))
}

/// KPSS stationarity test; rejects in the right tail.
pub fn kpss_test(series: &AnnualSeries, spec: Deterministic) -> Result<TestReport> {
    let n = series.len();
    if n < 10 {
        return Err(Error::TooShort { needed: 10, got: n });
    }
    let cv = kpss_critical_values(spec)?;
    let y = series.values();
    let x = DMatrix::from_fn(n, spec.count(), |t, j| if j == 0 { 1.0 } else { t as f64 });
    let fit = least_squares(&x, &DVector::from_column_slice(y))?;
    let e: Vec<f64> = fit.residuals.iter().copied().collect();
    let bandwidth = newey_west_bandwidth(n);
    let lrv = long_run_variance(&e, bandwidth);
    if !(lrv > 0.0) {
        return Err(Error::ZeroVariance(series.name().to_string()));
    }
    let mut partial = 0.0;
    let mut sum_sq = 0.0;
    for v in &e {
        partial += v;
        sum_sq += partial * partial;
    }
    let stat = sum_sq / ((n * n) as f64 * lrv);
    Ok(TestReport::new(TestKind::Kpss, series, spec, bandwidth, stat, cv, n))
}

/// Local-to-unity parameter for the constant-only DF-GLS test.
pub const DFGLS_CBAR: f64 = -7.0;

/// GLS demeaning: the constant is estimated on quasi-differenced data with
/// `α = 1 + c̄/n` and subtracted from the series.
pub fn gls_demean(y: &[f64]) -> Vec<f64> {
    let n = y.len();
    let alpha = 1.0 + DFGLS_CBAR / n as f64;
    let mut num = y[0];
    let mut den = 1.0;
    let z = 1.0 - alpha;
    for t in 1..n {
        num += z * (y[t] - alpha * y[t - 1]);
        den += z * z;
    }
    let mu = num / den;
    y.iter().map(|v| v - mu).collect()
}

/// Elliott-Rothenberg-Stock DF-GLS test (constant case): an ADF regression
/// without deterministic terms on the GLS-demeaned series.
pub fn dfgls_test(series: &AnnualSeries, max_lags: usize) -> Result<TestReport> {
    let needed = max_lags + 10;
    if series.len() < needed {
        return Err(Error::TooShort {
            needed,
            got: series.len(),
        });
    }
    let y = series.values();
    // Lag length is chosen on the OLS-demeaned series; on GLS-demeaned data
    // extra lags soak up the GLS mean offset and cost power.
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let demeaned: Vec<f64> = y.iter().map(|v| v - mean).collect();
    let lags = select_lags(&demeaned, max_lags, Deterministic::None)?;
    let yd = gls_demean(y);
    let reg = df_regression(&yd, lags, Deterministic::None, lags + 1)?;
    // The test is the constant case; the regression itself has no constant.
    Ok(TestReport::new(
        TestKind::Dfgls,
        series,
        Deterministic::Constant,
        lags,
        reg.t_stat,
        df_critical_values(Deterministic::None, reg.n_obs),
        reg.n_obs,
    ))
}

// Osterwald-Lenum maximum-eigenvalue critical values, unrestricted constant,
// by number of common stochastic trends under the null (n - r = 1..5):
// 10%, 5%, 1%.
const MAX_EIGEN_CV: [[f64; 3]; 5] = [
    [2.69, 3.76, 6.65],
    [12.07, 14.07, 18.63],
    [18.60, 20.97, 25.52],
    [24.73, 27.07, 32.24],
    [30.90, 33.46, 38.77],
];

pub const JOHANSEN_CASE: &str = "unrestricted constant";

/// 5% maximum-eigenvalue critical value for `dim = n - r` common trends.
pub fn max_eigen_critical_value_5pct(dim: usize) -> Result<f64> {
    MAX_EIGEN_CV
        .get(dim.wrapping_sub(1))
        .map(|row| row[1])
        .ok_or_else(|| Error::InvalidArgument(format!("no critical values for dimension {dim}")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JohansenReport {
    pub columns: Vec<String>,
    pub lag_order: usize,
    pub eigenvalues: Vec<f64>,
    pub max_eigen_statistics: Vec<f64>,
    pub critical_values_5pct: Vec<f64>,
    pub cointegration_rank: usize,
    pub deterministic_case: String,
    pub n_obs: usize,
    pub low_power_warning: bool,
}

fn check_moment(s: &DMatrix<f64>) -> Result<()> {
    let eig = s.clone().symmetric_eigen().eigenvalues;
    let max = eig.max();
    if !(max > 0.0) || eig.min() <= 1e-10 * max {
        return Err(Error::SingularMoment);
    }
    Ok(())
}

/// Johansen maximum-eigenvalue test in a VAR of order `lag_order` (levels)
/// with an unrestricted constant.
pub fn johansen_max_eigen(frame: &SeriesFrame, lag_order: usize) -> Result<JohansenReport> {
    let names: Vec<String> = frame.column_names().map(String::from).collect();
    let m = names.len();
    if m < 2 {
        return Err(Error::InvalidArgument("Johansen test needs at least two series".into()));
    }
    if lag_order == 0 {
        return Err(Error::InvalidArgument("lag order must be at least 1".into()));
    }
    let n = frame.len();
    let needed = m * lag_order + 8;
    if n < needed {
        return Err(Error::TooShort { needed, got: n });
    }
    if m > MAX_EIGEN_CV.len() {
        return Err(Error::InvalidArgument(format!(
            "critical values available for up to {} series",
            MAX_EIGEN_CV.len()
        )));
    }
    let data: Vec<&[f64]> = names
        .iter()
        .map(|c| frame.column(c).map(AnnualSeries::values))
        .collect::<Result<_>>()?;
    let k = lag_order;
    let rows = n - k;
    let dy = |t: usize, i: usize| data[i][t] - data[i][t - 1];
    let z0 = DMatrix::from_fn(rows, m, |r, i| dy(k + r, i));
    let z1 = DMatrix::from_fn(rows, m, |r, i| data[i][k + r - 1]);
    let n_short = 1 + m * (k - 1);
    let z2 = DMatrix::from_fn(rows, n_short, |r, j| {
        if j == 0 {
            1.0
        } else {
            let lag = 1 + (j - 1) / m;
            let i = (j - 1) % m;
            dy(k + r - lag, i)
        }
    });
    let residualize = |z: &DMatrix<f64>| -> Result<DMatrix<f64>> {
        let mut out = DMatrix::zeros(rows, m);
        for i in 0..m {
            let fit = least_squares(&z2, &z.column(i).into_owned()).map_err(|_| Error::SingularMoment)?;
            out.set_column(i, &fit.residuals);
        }
        Ok(out)
    };
    let r0 = residualize(&z0)?;
    let r1 = residualize(&z1)?;
    let t = rows as f64;
    let s00 = r0.transpose() * &r0 / t;
    let s11 = r1.transpose() * &r1 / t;
    let s01 = r0.transpose() * &r1 / t;
    check_moment(&s00)?;
    check_moment(&s11)?;
    let chol = s11.clone().cholesky().ok_or(Error::SingularMoment)?;
    let l_inv = chol.l().try_inverse().ok_or(Error::SingularMoment)?;
    let s00_inv = s00.try_inverse().ok_or(Error::SingularMoment)?;
    let inner = &l_inv * s01.transpose() * s00_inv * &s01 * l_inv.transpose();
    let sym = (&inner + inner.transpose()) * 0.5;
    let mut eigenvalues: Vec<f64> = sym
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .map(|v| v.clamp(0.0, 1.0 - 1e-15))
        .collect();
    eigenvalues.sort_by(|a, b| b.total_cmp(a));
    let stats: Vec<f64> = eigenvalues.iter().map(|l| -t * (1.0 - l).ln()).collect();
    let cvs = (0..m)
        .map(|r| max_eigen_critical_value_5pct(m - r))
        .collect::<Result<Vec<_>>>()?;
    let rank = stats.iter().zip(&cvs).take_while(|(s, c)| s > c).count();
    Ok(JohansenReport {
        columns: names,
        lag_order,
        eigenvalues,
        max_eigen_statistics: stats,
        critical_values_5pct: cvs,
        cointegration_rank: rank,
        deterministic_case: JOHANSEN_CASE.to_string(),
        n_obs: rows,
        low_power_warning: n < LOW_POWER_N,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RecommendedTransform {
    #[serde(rename = "level")]
    Level,
    #[serde(rename = "difference-1")]
    Difference1,
    #[serde(rename = "HP")]
    Hp,
    #[serde(rename = "log")]
    Log,
}

impl fmt::Display for RecommendedTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RecommendedTransform::Level => "level",
            RecommendedTransform::Difference1 => "difference-1",
            RecommendedTransform::Hp => "HP",
            RecommendedTransform::Log => "log",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationarityVerdict {
    pub per_test: Vec<TestReport>,
    pub concordant: bool,
    /// Set only when every test agrees.
    pub stationary: Option<bool>,
    pub recommended_transforms: Vec<RecommendedTransform>,
}

/// Growth is "trend-like" when the series is strictly positive and at
/// least three quarters of its year-on-year changes share one sign.
pub fn has_trend_like_growth(series: &AnnualSeries) -> bool {
    let v = series.values();
    if v.len() < 3 || v.iter().any(|&x| x <= 0.0) {
        return false;
    }
    let ups = v.windows(2).filter(|w| w[1] > w[0]).count();
    let downs = v.windows(2).filter(|w| w[1] < w[0]).count();
    4 * ups.max(downs) >= 3 * (v.len() - 1)
}

/// Combines test outcomes, accounting for the reversed KPSS null.
///
/// Concordant stationary evidence recommends the level; anything else
/// recommends first differences and the HP cycle, plus logs when the tests
/// disagree and `series` (if given) is strictly positive with trend-like growth.
pub fn stationarity_verdict(reports: &[TestReport], series: Option<&AnnualSeries>) -> StationarityVerdict {
    let votes: Vec<bool> = reports.iter().map(TestReport::indicates_stationary).collect();
    let concordant = votes.windows(2).all(|w| w[0] == w[1]);
    let stationary = if concordant { votes.first().copied() } else { None };
    let mut recommended = match stationary {
        Some(true) => vec![RecommendedTransform::Level],
        _ => vec![RecommendedTransform::Difference1, RecommendedTransform::Hp],
    };
    if !concordant && series.is_some_and(has_trend_like_growth) {
        recommended.push(RecommendedTransform::Log);
    }
    StationarityVerdict {
        per_test: reports.to_vec(),
        concordant,
        stationary,
        recommended_transforms: recommended,
    }
}
