//! Forecast-error measures and baseline-versus-proposed comparisons.
//!
//! Errors are `forecast - actual`: a positive mean error is overestimation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::AnnualSeries;

pub const SIGN_CONVENTION: &str = "error = forecast - actual (positive ME = overestimation)";

/// Slack for the ordering invariants, relative to the table's scale.
const INVARIANT_TOL: f64 = 1e-9;

fn check(actual: &[f64], forecast: &[f64]) -> Result<()> {
    if actual.len() != forecast.len() {
        return Err(Error::LengthMismatch {
            left: actual.len(),
            right: forecast.len(),
        });
    }
    if actual.is_empty() {
        return Err(Error::TooShort { needed: 1, got: 0 });
    }
    Ok(())
}

fn errors<'a>(actual: &'a [f64], forecast: &'a [f64]) -> impl Iterator<Item = f64> + 'a {
    actual.iter().zip(forecast).map(|(a, f)| f - a)
}

pub fn mean_error(actual: &[f64], forecast: &[f64]) -> Result<f64> {
    check(actual, forecast)?;
    Ok(errors(actual, forecast).sum::<f64>() / actual.len() as f64)
}

pub fn mae(actual: &[f64], forecast: &[f64]) -> Result<f64> {
    check(actual, forecast)?;
    Ok(errors(actual, forecast).map(f64::abs).sum::<f64>() / actual.len() as f64)
}

/// Symmetric MAE: mean of `|f - a| / ((|a| + |f|) / 2)`.
///
/// `first_year` only labels a [`Error::BothZero`] failure.
pub fn smae_with_years(actual: &[f64], forecast: &[f64], first_year: i32) -> Result<f64> {
    check(actual, forecast)?;
    let mut total = 0.0;
    for (i, (a, f)) in actual.iter().zip(forecast).enumerate() {
        let scale = (a.abs() + f.abs()) / 2.0;
        if scale == 0.0 {
            return Err(Error::BothZero {
                year: first_year + i as i32,
            });
        }
        total += (f - a).abs() / scale;
    }
    Ok(total / actual.len() as f64)
}

pub fn smae(actual: &[f64], forecast: &[f64]) -> Result<f64> {
    smae_with_years(actual, forecast, 0)
}

pub fn rmse(actual: &[f64], forecast: &[f64]) -> Result<f64> {
    check(actual, forecast)?;
    Ok((errors(actual, forecast).map(|e| e * e).sum::<f64>() / actual.len() as f64).sqrt())
}

/// Theil's bounded U₁.
pub fn theil_u1(actual: &[f64], forecast: &[f64]) -> Result<f64> {
    check(actual, forecast)?;
    let n = actual.len() as f64;
    let ra = (actual.iter().map(|a| a * a).sum::<f64>() / n).sqrt();
    let rf = (forecast.iter().map(|f| f * f).sum::<f64>() / n).sqrt();
    if ra + rf == 0.0 {
        return Err(Error::BothZeroSeries);
    }
    Ok((rmse(actual, forecast)? / (ra + rf)).min(1.0))
}

/// The five error measures for one forecast over an evaluation window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorTable {
    pub label: String,
    pub n: usize,
    pub me: f64,
    pub mae: f64,
    pub smae: f64,
    pub rmse: f64,
    pub theil_u1: f64,
}

impl ErrorTable {
    /// A table from externally reported values, e.g. a published row.
    /// Nothing is enforced; see [`ErrorTable::violations`].
    pub fn reported(label: impl Into<String>, n: usize, values: [f64; 5]) -> Self {
        let [me, mae, smae, rmse, theil_u1] = values;
        Self {
            label: label.into(),
            n,
            me,
            mae,
            smae,
            rmse,
            theil_u1,
        }
    }

    pub fn values(&self) -> [f64; 5] {
        [self.me, self.mae, self.smae, self.rmse, self.theil_u1]
    }

    /// Ordering and range constraints that every computed table satisfies.
    /// Non-empty output on a reported table means its numbers cannot all
    /// come from a single forecast.
    pub fn violations(&self) -> Vec<String> {
        let tol = INVARIANT_TOL * self.mae.abs().max(self.rmse.abs()).max(1.0);
        let mut out = Vec::new();
        if self.me.abs() > self.mae + tol {
            out.push(format!("|ME| {} exceeds MAE {}", self.me.abs(), self.mae));
        }
        if self.me.abs() > self.rmse + tol {
            out.push(format!("|ME| {} exceeds RMSE {}", self.me.abs(), self.rmse));
        }
        if self.mae > self.rmse + tol {
            out.push(format!("MAE {} exceeds RMSE {}", self.mae, self.rmse));
        }
        if !(0.0..=1.0).contains(&self.theil_u1) {
            out.push(format!("U1 {} outside [0, 1]", self.theil_u1));
        }
        if self.smae < 0.0 {
            out.push(format!("sMAE {} is negative", self.smae));
        }
        out
    }
}

/// All five measures; the table's invariants are checked before returning.
pub fn evaluate(actual: &[f64], forecast: &[f64], label: &str) -> Result<ErrorTable> {
    evaluate_from_year(actual, forecast, label, 0)
}

fn evaluate_from_year(actual: &[f64], forecast: &[f64], label: &str, first_year: i32) -> Result<ErrorTable> {
    let table = ErrorTable {
        label: label.to_string(),
        n: actual.len(),
        me: mean_error(actual, forecast)?,
        mae: mae(actual, forecast)?,
        smae: smae_with_years(actual, forecast, first_year)?,
        rmse: rmse(actual, forecast)?,
        theil_u1: theil_u1(actual, forecast)?,
    };
    let v = table.violations();
    if !v.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "error table invariants violated: {}",
            v.join("; ")
        )));
    }
    Ok(table)
}

/// [`evaluate`] on two annual series that must cover the same years.
pub fn evaluate_series(actual: &AnnualSeries, forecast: &AnnualSeries, label: &str) -> Result<ErrorTable> {
    if actual.start_year() != forecast.start_year() || actual.len() != forecast.len() {
        return Err(Error::YearMismatch(format!(
            "actual covers {}-{}, forecast covers {}-{}",
            actual.start_year(),
            actual.end_year(),
            forecast.start_year(),
            forecast.end_year()
        )));
    }
    evaluate_from_year(actual.values(), forecast.values(), label, actual.start_year())
}

/// Elementwise `baseline - proposed`; positive entries favour the proposal.
pub fn accuracy_gain(baseline: &ErrorTable, proposed: &ErrorTable) -> Result<ErrorTable> {
    if baseline.n != proposed.n {
        return Err(Error::SampleMismatch {
            left: baseline.n,
            right: proposed.n,
        });
    }
    let b = baseline.values();
    let p = proposed.values();
    Ok(ErrorTable::reported(
        "Accuracy gain",
        baseline.n,
        std::array::from_fn(|i| b[i] - p[i]),
    ))
}

/// Percentage reduction in U₁ relative to the baseline.
pub fn relative_efficiency_gain(baseline_u1: f64, proposed_u1: f64) -> Result<f64> {
    if !(baseline_u1 > 0.0) {
        return Err(Error::ZeroBaseline);
    }
    Ok((baseline_u1 - proposed_u1) / baseline_u1 * 100.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::Rng;
    use proptest::prelude::*;

    const A: [f64; 2] = [100.0, 200.0];
    const F: [f64; 2] = [110.0, 190.0];

    #[test]
    fn measure_examples() {
        assert_eq!(mean_error(&A, &A).unwrap(), 0.0);
        assert_eq!(mean_error(&A, &F).unwrap(), 0.0);
        assert_eq!(mean_error(&A, &[103.5, 203.5]).unwrap(), 3.5);
        assert_eq!(mae(&A, &F).unwrap(), 10.0);
        assert_eq!(mae(&[5.0], &[12.0]).unwrap(), 7.0);
        assert!((smae(&[100.0], &[110.0]).unwrap() - 10.0 / 105.0).abs() < 1e-15);
        assert!((smae(&[100.0], &[110.0]).unwrap() - 0.0952).abs() < 5e-5);
        assert_eq!(
            smae_with_years(&[1.0, 0.0], &[1.0, 0.0], 2019).unwrap_err(),
            Error::BothZero { year: 2020 }
        );
        assert_eq!(rmse(&A, &F).unwrap(), 10.0);
        assert!((rmse(&[0.0, 0.0], &[3.0, 4.0]).unwrap() - 12.5f64.sqrt()).abs() < 1e-15);
        let u = theil_u1(&A, &F).unwrap();
        assert!((u - 10.0 / (25_000f64.sqrt() + 24_100f64.sqrt())).abs() < 1e-15);
        assert!((u - 0.0319).abs() < 5e-5);
        assert_eq!(theil_u1(&A, &[-100.0, -200.0]).unwrap(), 1.0);
        assert_eq!(theil_u1(&[0.0; 3], &[0.0; 3]).unwrap_err(), Error::BothZeroSeries);
        assert!(matches!(mae(&A, &[1.0]), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn perfect_forecast_gives_zero_table() {
        let t = evaluate(&[3.0, 4.0, 5.0], &[3.0, 4.0, 5.0], "p").unwrap();
        assert_eq!(t.values(), [0.0; 5]);
        assert!(t.violations().is_empty());
    }

    #[test]
    fn gains_on_published_rows() {
        let base = ErrorTable::reported("Actual Forecasts", 3, [98.18, 204.69, 0.05, 214.55, 0.03]);
        let prop = ErrorTable::reported("Proposed model", 3, [89.67, 89.67, 0.02, 95.87, 0.01]);
        let g = accuracy_gain(&base, &prop).unwrap();
        for (got, want) in g.values().iter().zip([8.51, 115.02, 0.03, 118.68, 0.02]) {
            assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        }
        // The second CIT table prints 10.17 for the RMSE gain; the rows give 6.17.
        let base = ErrorTable::reported("Actual Forecasts", 3, [6.53, 73.33, 0.03, 82.69, 0.02]);
        let prop = ErrorTable::reported("Proposed model", 3, [5.66, 69.66, 0.02, 76.52, 0.01]);
        let g = accuracy_gain(&base, &prop).unwrap();
        for (got, want) in g.values().iter().zip([0.87, 3.67, 0.01, 6.17, 0.01]) {
            assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        }
        assert_eq!(accuracy_gain(&base, &base).unwrap().values(), [0.0; 5]);
        let short = ErrorTable::reported("x", 2, [0.0; 5]);
        assert_eq!(
            accuracy_gain(&base, &short).unwrap_err(),
            Error::SampleMismatch { left: 3, right: 2 }
        );
    }

    #[test]
    fn inconsistent_published_row_is_flagged() {
        let row = ErrorTable::reported("Proposed model", 3, [36.63, 36.63, 0.07, 3.24, 0.04]);
        let v = row.violations();
        assert!(v.iter().any(|m| m.contains("exceeds RMSE")));
        let ok = ErrorTable::reported("Actual Forecasts", 3, [39.47, 39.47, 1.69, 39.66, 0.85]);
        assert!(ok.violations().is_empty());
    }

    #[test]
    fn relative_efficiency_examples() {
        let g = relative_efficiency_gain(0.03, 0.01).unwrap();
        assert_eq!(format!("{g:.1}"), "66.7");
        assert_eq!(relative_efficiency_gain(0.2, 0.2).unwrap(), 0.0);
        assert_eq!(format!("{:.1}", relative_efficiency_gain(0.85, 0.04).unwrap()), "95.3");
        assert_eq!(relative_efficiency_gain(0.0, 0.1).unwrap_err(), Error::ZeroBaseline);
    }

    #[test]
    fn series_years_must_match() {
        let a = AnnualSeries::new("a", 2018, vec![1.0, 2.0, 3.0]).unwrap();
        let f = AnnualSeries::new("f", 2019, vec![1.0, 2.0, 3.0]).unwrap();
        assert!(matches!(evaluate_series(&a, &f, "x"), Err(Error::YearMismatch(_))));
        let f = AnnualSeries::new("f", 2018, vec![1.5, 2.0, 2.0]).unwrap();
        assert_eq!(evaluate_series(&a, &f, "x").unwrap().n, 3);
    }

    #[test]
    fn zero_iff_identical() {
        let mut rng = Rng::seeded(2);
        for _ in 0..100 {
            let a: Vec<f64> = (0..4).map(|_| 1.0 + rng.uniform()).collect();
            let mut f = a.clone();
            f[2] += 1e-6;
            let t = evaluate(&a, &f, "x").unwrap();
            assert!(t.values().iter().all(|v| *v != 0.0));
        }
    }

    proptest! {
        #[test]
        fn invariants_and_scaling(
            pairs in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 1..12),
            c in 0.01f64..100.0,
        ) {
            let a: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let f: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            prop_assume!(a.iter().zip(&f).all(|(x, y)| x.abs() + y.abs() > 0.0));
            let t = evaluate(&a, &f, "x").unwrap();
            prop_assert!(t.me.abs() <= t.mae + 1e-9 && t.mae <= t.rmse + 1e-9);
            prop_assert!((0.0..=1.0).contains(&t.theil_u1) && t.smae >= 0.0);
            let ca: Vec<f64> = a.iter().map(|v| c * v).collect();
            let cf: Vec<f64> = f.iter().map(|v| c * v).collect();
            let s = evaluate(&ca, &cf, "x").unwrap();
            let rel = |x: f64, y: f64| (x - y).abs() <= 1e-10 * y.abs().max(1.0);
            prop_assert!(rel(s.me, c * t.me) && rel(s.mae, c * t.mae) && rel(s.rmse, c * t.rmse));
            prop_assert!((s.smae - t.smae).abs() < 1e-10 && (s.theil_u1 - t.theil_u1).abs() < 1e-10);
        }
    }
}
