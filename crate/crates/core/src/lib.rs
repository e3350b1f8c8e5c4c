//! Econometric building blocks for annual tax-revenue forecasting:
//! unit-root and cointegration diagnostics, trend/cycle decompositions,
//! predictor screening, regression with ARMA errors, elasticity baselines
//! and forecast-error scoring.

pub mod association;
pub mod error;
pub mod estimation;
pub mod forecast_eval;
pub mod linalg;
pub mod optim;
pub mod revenue_models;
pub mod series;
pub mod simulate;
pub mod stat_tests;
pub mod transforms;

pub use error::{Error, Result};
pub use series::{align, growth_rates, slice_train_test, AnnualSeries, SeriesFrame};
