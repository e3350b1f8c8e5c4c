//! OLS, regression with ARMA errors (iterated feasible GLS with CSS),
//! AR(1) submodels and information criteria.

pub mod arma;
mod working;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::least_squares;
use crate::series::{AnnualSeries, SeriesFrame};
use crate::transforms::HP_LAMBDA_ANNUAL;

pub use working::{apply_transform, ColumnAnchor, TransformState, TransformTag};

pub const INTERCEPT_NAME: &str = "const";

/// GLS/CSS alternation stops once the largest relative coefficient change
/// drops below this.
pub const GLS_TOL: f64 = 1e-6;
/// Iteration cap for the GLS/CSS alternation.
pub const GLS_MAX_ITER: usize = 50;
/// Above this change at the cap the fit is reported as non-convergent.
pub const GLS_FAIL_TOL: f64 = 1e-4;

pub const ESTIMATION_METHOD: &str = "iterated feasible GLS; ARMA errors by conditional sum of \
     squares (Hannan-Rissanen start, Nelder-Mead, objective tol 1e-8); coefficient tol 1e-6, \
     max 50 iterations";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InformationCriteria {
    pub aic: f64,
    pub aicc: f64,
    pub bic: f64,
}

/// `aic = 2k - 2ℓ`, `aicc = aic + 2k(k+1)/(n-k-1)`, `bic = k ln n - 2ℓ`.
pub fn information_criteria(loglik: f64, k: usize, n: usize) -> Result<InformationCriteria> {
    if n <= k + 1 {
        return Err(Error::AiccUndefined { n, k });
    }
    let kf = k as f64;
    let aic = 2.0 * kf - 2.0 * loglik;
    Ok(InformationCriteria {
        aic,
        aicc: aic + 2.0 * kf * (kf + 1.0) / (n as f64 - kf - 1.0),
        bic: kf * (n as f64).ln() - 2.0 * loglik,
    })
}

/// Criteria with AICc left empty when it is undefined for the sample size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelCriteria {
    pub aic: f64,
    pub aicc: Option<f64>,
    pub bic: f64,
}

impl ModelCriteria {
    pub fn new(loglik: f64, k: usize, n: usize) -> Self {
        let kf = k as f64;
        let aic = 2.0 * kf - 2.0 * loglik;
        ModelCriteria {
            aic,
            aicc: information_criteria(loglik, k, n).ok().map(|c| c.aicc),
            bic: kf * (n as f64).ln() - 2.0 * loglik,
        }
    }

    /// AICc, or AIC when the sample is too small for the correction.
    pub fn aicc_or_aic(&self) -> f64 {
        self.aicc.unwrap_or(self.aic)
    }
}

/// Concentrated Gaussian log-likelihood for `n` residuals with sum of squares `ssr`.
pub fn gaussian_loglik(ssr: f64, n: usize) -> f64 {
    let nf = n as f64;
    let s2 = (ssr / nf).max(f64::MIN_POSITIVE);
    -0.5 * nf * ((2.0 * std::f64::consts::PI).ln() + s2.ln() + 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
}

fn coefficient_block(names: &[String], beta: &DVector<f64>, cov: &DMatrix<f64>, s2: f64) -> Vec<Coefficient> {
    names
        .iter()
        .enumerate()
        .map(|(j, name)| Coefficient {
            name: name.clone(),
            estimate: beta[j],
            std_error: (s2 * cov[(j, j)]).max(0.0).sqrt(),
        })
        .collect()
}

fn lookup<'a>(coefficients: &'a [Coefficient], name: &str) -> Option<&'a Coefficient> {
    coefficients.iter().find(|c| c.name == name)
}

/// Ordinary least squares fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub target: String,
    pub coefficients: Vec<Coefficient>,
    pub intercept_included: bool,
    pub residuals: AnnualSeries,
    /// Unbiased residual variance `SSR / (n - coefficients)`.
    pub sigma2: f64,
    pub loglik: f64,
    pub r2: f64,
    /// Regression coefficients plus one for the innovation variance.
    pub n_params: usize,
    pub n_obs: usize,
    pub criteria: ModelCriteria,
}

impl LinearModel {
    pub fn coefficient(&self, name: &str) -> Option<f64> {
        lookup(&self.coefficients, name).map(|c| c.estimate)
    }

    pub fn fitted(&self, row: &[f64]) -> f64 {
        self.coefficients
            .iter()
            .zip(row)
            .map(|(c, x)| c.estimate * x)
            .sum()
    }
}

fn r_squared(y: &[f64], ssr: f64, centered: bool) -> f64 {
    let mean = if centered {
        y.iter().sum::<f64>() / y.len() as f64
    } else {
        0.0
    };
    let sst: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    if sst == 0.0 {
        if ssr == 0.0 {
            1.0
        } else {
            f64::NEG_INFINITY
        }
    } else {
        1.0 - ssr / sst
    }
}

fn regressor_names(predictors: &[&str], intercept: bool) -> Vec<String> {
    let mut names: Vec<String> = predictors.iter().map(|s| s.to_string()).collect();
    if intercept {
        names.insert(0, INTERCEPT_NAME.to_string());
    }
    names
}

fn design_from(columns: &[&[f64]], intercept: bool) -> DMatrix<f64> {
    let n = columns.first().map_or(0, |c| c.len());
    let offset = usize::from(intercept);
    DMatrix::from_fn(n, columns.len() + offset, |i, j| {
        if intercept && j == 0 {
            1.0
        } else {
            columns[j - offset][i]
        }
    })
}

/// OLS of `target` on `predictors` over the whole frame.
pub fn ols_fit(
    frame: &SeriesFrame,
    target: &str,
    predictors: &[&str],
    intercept: bool,
) -> Result<LinearModel> {
    let y = frame.column(target)?;
    let cols = predictors
        .iter()
        .map(|p| frame.column(p).map(AnnualSeries::values))
        .collect::<Result<Vec<_>>>()?;
    ols_on(y, &cols, predictors, intercept)
}

fn ols_on(y: &AnnualSeries, cols: &[&[f64]], predictors: &[&str], intercept: bool) -> Result<LinearModel> {
    let n = y.len();
    let k = predictors.len() + usize::from(intercept);
    if n <= k {
        return Err(Error::TooFewObservations { params: k, got: n });
    }
    let x = design_from(cols, intercept);
    let fit = least_squares(&x, &DVector::from_column_slice(y.values()))?;
    let names = regressor_names(predictors, intercept);
    let sigma2 = fit.ssr / (n - k) as f64;
    let loglik = gaussian_loglik(fit.ssr, n);
    let n_params = k + 1;
    Ok(LinearModel {
        target: y.name().to_string(),
        coefficients: coefficient_block(&names, &fit.beta, &fit.xtx_inv, sigma2),
        intercept_included: intercept,
        residuals: AnnualSeries::new(
            format!("{}_residual", y.name()),
            y.start_year(),
            fit.residuals.iter().copied().collect(),
        )?,
        sigma2,
        loglik,
        r2: r_squared(y.values(), fit.ssr, intercept),
        n_params,
        n_obs: n,
        criteria: ModelCriteria::new(loglik, n_params, n),
    })
}

/// OLS with a single predictor.
pub fn simple_regression(
    frame: &SeriesFrame,
    target: &str,
    predictor: &str,
    intercept: bool,
) -> Result<LinearModel> {
    ols_fit(frame, target, &[predictor], intercept)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ArimaOrder {
    pub p: usize,
    pub d: usize,
    pub q: usize,
}

impl ArimaOrder {
    pub fn new(p: usize, d: usize, q: usize) -> Result<Self> {
        if d > 2 {
            return Err(Error::InvalidArgument(format!(
                "differencing order must be 0, 1 or 2, got {d}"
            )));
        }
        Ok(Self { p, d, q })
    }

    pub const fn white_noise() -> Self {
        Self { p: 0, d: 0, q: 0 }
    }
}

impl std::fmt::Display for ArimaOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.p, self.d, self.q)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegArimaOptions {
    pub intercept: bool,
    pub hp_lambda: f64,
}

impl Default for RegArimaOptions {
    fn default() -> Self {
        Self {
            intercept: false,
            hp_lambda: HP_LAMBDA_ANNUAL,
        }
    }
}

/// Regression with ARIMA(p, d, q) errors, fitted on transformed data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegArimaModel {
    pub target: String,
    pub predictors: Vec<String>,
    pub regression: Vec<Coefficient>,
    pub intercept_included: bool,
    pub error_order: ArimaOrder,
    pub ar_coeffs: Vec<f64>,
    pub ma_coeffs: Vec<f64>,
    /// `CSS / n_obs`.
    pub innovation_variance: f64,
    pub loglik: f64,
    pub criteria: ModelCriteria,
    /// `1 - CSS / SST` of the working (transformed, differenced) target.
    pub r2: f64,
    pub transform_tag: TransformTag,
    /// Number of innovations entering the likelihood.
    pub n_obs: usize,
    pub n_params: usize,
    pub iterations: usize,
    pub converged: bool,
    pub method: String,
    pub first_year: i32,
    pub last_year: i32,
    transform: TransformState,
    /// Last `d` transformed values per column, oldest first.
    diff_anchors: Vec<(String, Vec<f64>)>,
    /// Regression residuals in the working space, aligned with the sample end.
    working_residuals: Vec<f64>,
    innovations: Vec<f64>,
}

impl RegArimaModel {
    pub fn coefficient(&self, name: &str) -> Option<f64> {
        lookup(&self.regression, name).map(|c| c.estimate)
    }

    pub fn std_error(&self, name: &str) -> Option<f64> {
        lookup(&self.regression, name).map(|c| c.std_error)
    }

    pub fn transform_state(&self) -> &TransformState {
        &self.transform
    }

    pub fn working_residuals(&self) -> &[f64] {
        &self.working_residuals
    }

    /// Transforms level values of a column the way the model's training data
    /// were transformed (no ARIMA differencing).
    pub fn transform_levels(&self, column: &str, levels: &[f64]) -> Result<Vec<f64>> {
        self.transform.transform_future(column, levels)
    }
}

fn diff_n(v: &[f64], d: usize) -> Vec<f64> {
    let mut v = v.to_vec();
    for _ in 0..d {
        v = v.windows(2).map(|w| w[1] - w[0]).collect();
    }
    v
}

/// Fits `target = Xβ + u`, `u ~ ARIMA(p, d, q)` by iterated feasible GLS.
///
/// Steps: OLS for β; ARMA(p, q) on the (d-differenced) residuals by
/// conditional sum of squares; GLS re-estimate of β on ARMA-filtered data;
/// repeat until the largest relative change in β, φ, θ is below
/// [`GLS_TOL`] or [`GLS_MAX_ITER`] passes are done.
/// Regression of the ARMA-whitened target on the whitened design.
fn gls_step(w: &[f64], x: &DMatrix<f64>, phi: &[f64], theta: &[f64]) -> Result<crate::linalg::LeastSquares> {
    let wf = arma::innovations(w, phi, theta);
    let mut xf = DMatrix::zeros(wf.len(), x.ncols());
    for j in 0..x.ncols() {
        let col: Vec<f64> = x.column(j).iter().copied().collect();
        for (i, v) in arma::innovations(&col, phi, theta).into_iter().enumerate() {
            xf[(i, j)] = v;
        }
    }
    least_squares(&xf, &DVector::from_vec(wf))
}

pub fn fit_regarima(
    frame: &SeriesFrame,
    target: &str,
    predictors: &[&str],
    order: ArimaOrder,
    transform_tag: TransformTag,
    options: RegArimaOptions,
) -> Result<RegArimaModel> {
    let mut columns: Vec<&str> = vec![target];
    columns.extend_from_slice(predictors);
    let (transformed, state) = apply_transform(frame, &columns, transform_tag, options.hp_lambda)?;
    let d = order.d;
    let intercept = options.intercept && d == 0;

    let len = transformed[0].len();
    if len <= d {
        return Err(Error::TooShort {
            needed: d + 1,
            got: len,
        });
    }
    let diff_anchors: Vec<(String, Vec<f64>)> = transformed
        .iter()
        .zip(&columns)
        .map(|(s, name)| (name.to_string(), s.values()[len - d..].to_vec()))
        .collect();
    let w = diff_n(transformed[0].values(), d);
    let xcols: Vec<Vec<f64>> = transformed[1..].iter().map(|s| diff_n(s.values(), d)).collect();
    let m = w.len();
    let k = predictors.len() + usize::from(intercept);
    let n_params = k + order.p + order.q + 1;
    if m <= n_params + 2 {
        return Err(Error::TooFewObservations {
            params: n_params + 2,
            got: m,
        });
    }

    let xrefs: Vec<&[f64]> = xcols.iter().map(Vec::as_slice).collect();
    let x = design_from(&xrefs, intercept);
    let names = regressor_names(predictors, intercept);
    let wv = DVector::from_column_slice(&w);

    let ols = least_squares(&x, &wv)?;
    let mut beta = ols.beta.clone();
    let mut phi = vec![0.0; order.p];
    let mut theta = vec![0.0; order.q];
    let mut iterations = 0;
    let mut converged = true;
    let mut cov = ols.xtx_inv.clone();

    if order.p + order.q > 0 {
        converged = false;
        let mut last_change = f64::INFINITY;
        let mut start: Option<Vec<f64>> = None;
        while iterations < GLS_MAX_ITER {
            iterations += 1;
            let u: Vec<f64> = (&wv - &x * &beta).iter().copied().collect();
            let fit = arma::fit_css_from(&u, order.p, order.q, start.as_deref())?;
            start = Some([fit.phi.clone(), fit.theta.clone()].concat());
            let gls = gls_step(&w, &x, &fit.phi, &fit.theta)?;
            let rel = |new: f64, old: f64| (new - old).abs() / old.abs().max(1.0);
            let mut change = 0.0f64;
            for j in 0..beta.len() {
                change = change.max(rel(gls.beta[j], beta[j]));
            }
            for (a, b) in fit.phi.iter().zip(&phi) {
                change = change.max(rel(*a, *b));
            }
            for (a, b) in fit.theta.iter().zip(&theta) {
                change = change.max(rel(*a, *b));
            }
            beta = gls.beta;
            phi = fit.phi;
            theta = fit.theta;
            last_change = change;
            if change < GLS_TOL {
                converged = true;
                break;
            }
        }
        if !converged && last_change > GLS_FAIL_TOL {
            return Err(Error::NonConvergence(format!(
                "GLS/CSS alternation: change {last_change:.2e} after {GLS_MAX_ITER} iterations"
            )));
        }
        // Final ARMA pass at the final β so (β, φ, θ) are mutually consistent.
        let u: Vec<f64> = (&wv - &x * &beta).iter().copied().collect();
        let fit = arma::fit_css_from(&u, order.p, order.q, Some(&[phi.clone(), theta.clone()].concat()))?;
        phi = fit.phi;
        theta = fit.theta;
        cov = gls_step(&w, &x, &phi, &theta)?.xtx_inv;
    }

    let u: Vec<f64> = (&wv - &x * &beta).iter().copied().collect();
    let e = arma::innovations(&u, &phi, &theta);
    let css: f64 = e.iter().map(|v| v * v).sum();
    let n_obs = e.len();
    let loglik = gaussian_loglik(css, n_obs);
    let s2 = css / (n_obs.saturating_sub(k + order.p + order.q)).max(1) as f64;
    let r2 = r_squared(&w[order.p..], css, intercept);
    if !arma::is_stationary(&phi) || !arma::is_invertible(&theta) {
        return Err(Error::NonInvertible);
    }
    let e_aligned = arma::innovations_aligned(&u, &phi, &theta);

    Ok(RegArimaModel {
        target: target.to_string(),
        predictors: predictors.iter().map(|s| s.to_string()).collect(),
        regression: coefficient_block(&names, &beta, &cov, s2),
        intercept_included: intercept,
        error_order: order,
        ar_coeffs: phi,
        ma_coeffs: theta,
        innovation_variance: css / n_obs as f64,
        loglik,
        criteria: ModelCriteria::new(loglik, n_params, n_obs),
        r2,
        transform_tag,
        n_obs,
        n_params,
        iterations,
        converged,
        method: ESTIMATION_METHOD.to_string(),
        first_year: frame.first_year(),
        last_year: frame.last_year(),
        transform: state,
        diff_anchors,
        working_residuals: u,
        innovations: e_aligned,
    })
}

/// Forecast in both the model's transformed space and at level.
#[derive(Debug, Clone, PartialEq)]
pub struct RegArimaForecast {
    pub level: AnnualSeries,
    /// Forecast of the transformed (but not ARIMA-differenced) target.
    pub transformed: Vec<f64>,
    /// Forecast of the ARMA error component in the working space.
    pub error_component: Vec<f64>,
}

/// Level forecasts for the `horizon` years after the training sample.
pub fn forecast_regarima(
    model: &RegArimaModel,
    future_predictors: &SeriesFrame,
    horizon: usize,
) -> Result<AnnualSeries> {
    forecast_regarima_detailed(model, future_predictors, horizon).map(|f| f.level)
}

pub fn forecast_regarima_detailed(
    model: &RegArimaModel,
    future_predictors: &SeriesFrame,
    horizon: usize,
) -> Result<RegArimaForecast> {
    let d = model.error_order.d;
    let years: Vec<i32> = (1..=horizon as i32).map(|h| model.last_year + h).collect();
    let mut working_x: Vec<Vec<f64>> = Vec::with_capacity(model.predictors.len());
    for name in &model.predictors {
        let col = future_predictors.column(name)?;
        let levels = years
            .iter()
            .map(|&y| {
                col.value_at(y).ok_or_else(|| Error::MissingPredictorYears {
                    name: name.clone(),
                    year: y,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let transformed = model.transform.transform_future(name, &levels)?;
        let anchors = anchors_for(model, name)?;
        let joined = [anchors.to_vec(), transformed].concat();
        working_x.push(diff_n(&joined, d));
    }

    let error_component = arma::forecast(
        &model.working_residuals,
        &model.innovations,
        &model.ar_coeffs,
        &model.ma_coeffs,
        horizon,
    );
    let offset = usize::from(model.intercept_included);
    let working: Vec<f64> = (0..horizon)
        .map(|h| {
            let mut v = error_component[h];
            if model.intercept_included {
                v += model.regression[0].estimate;
            }
            for (j, col) in working_x.iter().enumerate() {
                v += model.regression[j + offset].estimate * col[h];
            }
            v
        })
        .collect();

    let transformed = if d == 0 {
        working
    } else {
        let anchors = anchors_for(model, &model.target)?;
        let tmp = AnnualSeries::new("tmp", years[0], working)?;
        crate::transforms::undifference(&tmp, anchors)?.into_values()
    };
    let level = model.transform.invert(&model.target, &transformed)?;
    Ok(RegArimaForecast {
        level: AnnualSeries::new(model.target.clone(), years[0], level)?,
        transformed,
        error_component,
    })
}

fn anchors_for<'a>(model: &'a RegArimaModel, name: &str) -> Result<&'a [f64]> {
    model
        .diff_anchors
        .iter()
        .find(|(n, _)| n == name)
        .map(|(_, v)| v.as_slice())
        .ok_or_else(|| Error::MissingColumn(name.to_string()))
}

/// AICc-minimizing ARMA order on `residuals` after `d` differences, over
/// `p ∈ 0..=max_p`, `q ∈ 0..=max_q`. Ties go to the smaller `p + q`, then
/// the smaller `q`. Cells that cannot be fitted are skipped; (0, d, 0) is
/// always available.
pub fn auto_order(residuals: &[f64], d: usize, max_p: usize, max_q: usize) -> ArimaOrder {
    let w = diff_n(residuals, d);
    let mut best: Option<(f64, usize, usize, usize)> = None;
    for p in 0..=max_p {
        for q in 0..=max_q {
            let Ok(fit) = arma::fit_css(&w, p, q) else {
                continue;
            };
            // CSS rewards MA roots near the unit circle through its start-up
            // transient; candidates are ranked by the exact likelihood instead.
            let Ok(loglik) = arma::exact_loglik(&w, &fit.phi, &fit.theta) else {
                continue;
            };
            let Ok(ic) = information_criteria(loglik, p + q + 1, w.len()) else {
                continue;
            };
            let key = (ic.aicc, p + q, q, p);
            let better = match best {
                None => true,
                Some(b) => key.0 < b.0 || (key.0 == b.0 && (key.1, key.2) < (b.1, b.2)),
            };
            if better {
                best = Some(key);
            }
        }
    }
    match best {
        Some((_, _, q, p)) => ArimaOrder { p, d, q },
        None => ArimaOrder { p: 0, d, q: 0 },
    }
}

/// `v_t = φ₀ v_{t-1} + ε_t`, no intercept.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AR1Model {
    pub phi0: f64,
    pub innovation_variance: f64,
    /// Set when `|φ₀| ≥ 1`.
    pub nonstationary: bool,
}

pub fn ar1_fit(series: &AnnualSeries) -> Result<AR1Model> {
    let v = series.values();
    if v.len() < 4 {
        return Err(Error::TooShort {
            needed: 4,
            got: v.len(),
        });
    }
    let num: f64 = v.windows(2).map(|w| w[0] * w[1]).sum();
    let den: f64 = v[..v.len() - 1].iter().map(|x| x * x).sum();
    if den == 0.0 {
        return Err(Error::ZeroVariance(series.name().to_string()));
    }
    let phi0 = num / den;
    let ssr: f64 = v.windows(2).map(|w| (w[1] - phi0 * w[0]).powi(2)).sum();
    Ok(AR1Model {
        phi0,
        innovation_variance: ssr / (v.len() - 1) as f64,
        nonstationary: phi0.abs() >= 1.0,
    })
}

/// `φ₀ʰ · last_value` for `h = 1..=horizon`, labelled from `first_year`.
pub fn ar1_forecast(
    model: &AR1Model,
    name: &str,
    last_value: f64,
    first_year: i32,
    horizon: usize,
) -> Result<AnnualSeries> {
    let mut level = last_value;
    let values = (0..horizon)
        .map(|_| {
            level *= model.phi0;
            level
        })
        .collect();
    AnnualSeries::new(name, first_year, values)
}
