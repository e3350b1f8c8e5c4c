//! Differencing, logarithms, Hodrick-Prescott and Beveridge-Nelson
//! decompositions, and the inverses needed to report forecasts at level.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::arma;
use crate::linalg::Pentadiagonal;
use crate::series::AnnualSeries;

/// Default HP smoothing for annual data.
pub const HP_LAMBDA_ANNUAL: f64 = 100.0;
/// Alternative annual preset (Ravn-Uhlig scaling of the quarterly 1600).
pub const HP_LAMBDA_RAVN_UHLIG: f64 = 6.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecompositionMethod {
    #[serde(rename = "HP")]
    HodrickPrescott,
    #[serde(rename = "BN")]
    BeveridgeNelson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DecompositionParameter {
    Lambda(f64),
    Arma {
        p: usize,
        q: usize,
        drift: f64,
        phi: Vec<f64>,
        theta: Vec<f64>,
    },
}

/// Trend plus cycle split of a source series; `trend + cycle == source`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub method: DecompositionMethod,
    pub trend: AnnualSeries,
    pub cycle: AnnualSeries,
    pub parameter: DecompositionParameter,
    pub source_name: String,
    /// Mean of the cycle. Not forced to zero; a BN cycle far from zero
    /// signals a poorly specified ARMA.
    pub cycle_mean: f64,
}

fn decomposition(
    method: DecompositionMethod,
    series: &AnnualSeries,
    trend: Vec<f64>,
    parameter: DecompositionParameter,
) -> Result<Decomposition> {
    let cycle: Vec<f64> = series
        .values()
        .iter()
        .zip(&trend)
        .map(|(y, t)| y - t)
        .collect();
    let cycle_mean = cycle.iter().sum::<f64>() / cycle.len() as f64;
    Ok(Decomposition {
        method,
        trend: AnnualSeries::new(format!("{}_trend", series.name()), series.start_year(), trend)?,
        cycle: AnnualSeries::new(format!("{}_cycle", series.name()), series.start_year(), cycle)?,
        parameter,
        source_name: series.name().to_string(),
        cycle_mean,
    })
}

/// d-th order differences. `d = 0` returns the input.
pub fn difference(series: &AnnualSeries, d: usize) -> Result<AnnualSeries> {
    if series.len() <= d {
        return Err(Error::TooShort {
            needed: d + 1,
            got: series.len(),
        });
    }
    let mut v = series.values().to_vec();
    for _ in 0..d {
        v = v.windows(2).map(|w| w[1] - w[0]).collect();
    }
    AnnualSeries::new(series.name(), series.start_year() + d as i32, v)
}

/// Inverts `d`-fold differencing given the last `d` observed levels
/// (`anchors`, oldest first). The result carries the years of `diff_forecast`.
pub fn undifference(diff_forecast: &AnnualSeries, anchors: &[f64]) -> Result<AnnualSeries> {
    let d = anchors.len();
    if d == 0 {
        return Err(Error::MissingAnchor);
    }
    // last value of each difference order k = 0..d-1 of the anchors
    let mut last = Vec::with_capacity(d);
    let mut cur = anchors.to_vec();
    for _ in 0..d {
        last.push(*cur.last().unwrap());
        cur = cur.windows(2).map(|w| w[1] - w[0]).collect();
    }
    let mut values = diff_forecast.values().to_vec();
    for k in (0..d).rev() {
        let mut acc = last[k];
        for v in values.iter_mut() {
            acc += *v;
            *v = acc;
        }
    }
    AnnualSeries::new(diff_forecast.name(), diff_forecast.start_year(), values)
}

pub fn natural_log(series: &AnnualSeries) -> Result<AnnualSeries> {
    if let Some(i) = series.values().iter().position(|&v| v <= 0.0) {
        return Err(Error::NonPositiveValue {
            year: series.year_of(i),
        });
    }
    series.map_values(f64::ln)
}

pub fn exp_inverse(series: &AnnualSeries) -> Result<AnnualSeries> {
    series.map_values(f64::exp)
}

/// `I + λ KᵀK` for the second-difference operator `K`, in banded form.
pub fn hp_system(n: usize, lambda: f64) -> Pentadiagonal {
    let mut diag = vec![1.0; n];
    let mut sub1 = vec![0.0; n.saturating_sub(1)];
    let mut sub2 = vec![0.0; n.saturating_sub(2)];
    let k = [1.0, -2.0, 1.0];
    for r in 0..n.saturating_sub(2) {
        for a in 0..3 {
            diag[r + a] += lambda * k[a] * k[a];
            for b in a + 1..3 {
                let v = lambda * k[a] * k[b];
                match b - a {
                    1 => sub1[r + a] += v,
                    _ => sub2[r + a] += v,
                }
            }
        }
    }
    Pentadiagonal { diag, sub1, sub2 }
}

/// Hodrick-Prescott filter: the trend minimizes
/// `Σ(y_t - τ_t)² + λ Σ(Δ²τ_t)²` over the observed sample (no padding).
pub fn hp_filter(series: &AnnualSeries, lambda: f64) -> Result<Decomposition> {
    let n = series.len();
    if n < 4 {
        return Err(Error::TooShort { needed: 4, got: n });
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "HP lambda must be positive, got {lambda}"
        )));
    }
    let trend = hp_system(n, lambda).solve(series.values())?;
    decomposition(
        DecompositionMethod::HodrickPrescott,
        series,
        trend,
        DecompositionParameter::Lambda(lambda),
    )
}

/// Shift in the HP trend at the second-to-last year when the last year is
/// dropped; a measure of endpoint instability.
pub fn hp_endpoint_sensitivity(series: &AnnualSeries, lambda: f64) -> Result<f64> {
    let full = hp_filter(series, lambda)?;
    let short = series.slice_years(series.start_year(), series.end_year() - 1)?;
    let trimmed = hp_filter(&short, lambda)?;
    Ok(full.trend.values()[series.len() - 2] - trimmed.trend.last())
}

/// Linear continuation of a trend: the last increment repeated `horizon` times.
pub fn extend_trend_linearly(trend: &[f64], horizon: usize) -> Vec<f64> {
    let n = trend.len();
    let last = trend[n - 1];
    let slope = if n >= 2 { last - trend[n - 2] } else { 0.0 };
    (1..=horizon).map(|h| last + slope * h as f64).collect()
}

/// Beveridge-Nelson decomposition through an ARIMA(p, 1, q) fitted by CSS.
///
/// The trend at `t` is the level plus all expected future (demeaned)
/// increments given information up to `t`; the cycle is the remainder.
pub fn bn_decompose(series: &AnnualSeries, p: usize, q: usize) -> Result<Decomposition> {
    let n = series.len();
    if n < p + q + 5 {
        return Err(Error::TooShort {
            needed: p + q + 5,
            got: n,
        });
    }
    let y = series.values();
    let dy: Vec<f64> = y.windows(2).map(|w| w[1] - w[0]).collect();
    let drift = dy.iter().sum::<f64>() / dy.len() as f64;
    let w: Vec<f64> = dy.iter().map(|v| v - drift).collect();
    let fit = arma::fit_css(&w, p, q)?;
    if !fit.converged {
        return Err(Error::NonConvergence(format!(
            "ARMA({p},{q}) CSS search for the BN decomposition"
        )));
    }
    let e = arma::innovations_aligned(&w, &fit.phi, &fit.theta);

    let mut trend = Vec::with_capacity(n);
    trend.push(y[0]);
    for t in 1..n {
        // increments observed up to time t are w[0..t]
        let future = expected_increment_sum(&w[..t], &e[..t], &fit.phi, &fit.theta);
        trend.push(y[t] + future);
    }
    decomposition(
        DecompositionMethod::BeveridgeNelson,
        series,
        trend,
        DecompositionParameter::Arma {
            p,
            q,
            drift,
            phi: fit.phi,
            theta: fit.theta,
        },
    )
}

/// `Σ_{h≥1} E[w_{t+h} | w_1..w_t]` for a stationary ARMA, summed until the
/// forecasts die out.
fn expected_increment_sum(w: &[f64], e: &[f64], phi: &[f64], theta: &[f64]) -> f64 {
    let q = theta.len();
    let mut total = 0.0;
    let mut block = 64;
    let mut done = 0;
    while done < 20_000 {
        let f = arma::forecast(w, e, phi, theta, done + block);
        let tail = &f[done..];
        total += tail.iter().sum::<f64>();
        let last = tail.last().copied().unwrap_or(0.0).abs();
        done += block;
        if done > q && last < 1e-15 * (1.0 + total.abs()) {
            break;
        }
        block *= 2;
    }
    total
}
