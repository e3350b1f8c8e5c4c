//! Tax-specific pipelines: profit construction, the proposed regression
//! models with ARMA errors, an elasticity baseline emulator and the
//! comparison report.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{
    ar1_fit, ar1_forecast, auto_order, fit_regarima, forecast_regarima, ArimaOrder, Coefficient,
    RegArimaModel, RegArimaOptions, TransformTag,
};
use crate::forecast_eval::{
    accuracy_gain, evaluate_series, relative_efficiency_gain, ErrorTable, SIGN_CONVENTION,
};
use crate::series::{slice_train_test, AnnualSeries, SeriesFrame};
use crate::stat_tests::{
    adf_test, dfgls_test, johansen_max_eigen, kpss_test, pp_test, stationarity_verdict,
    Deterministic, JohansenReport, StationarityVerdict, TestReport,
};
use crate::transforms::HP_LAMBDA_ANNUAL;

pub const DEFAULT_HOLDOUT: usize = 3;
/// Training years required beyond the holdout.
pub const MIN_TRAINING_YEARS: usize = 8;
/// DZP data start later; the two-variant simple regression needs less.
pub const MIN_TRAINING_YEARS_DZP: usize = 6;
pub const JOHANSEN_LAG: usize = 1;

fn check_years(a: &AnnualSeries, b: &AnnualSeries) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.start_year() != b.start_year() {
        return Err(Error::YearMismatch(format!(
            "`{}` starts in {}, `{}` in {}",
            a.name(),
            a.start_year(),
            b.name(),
            b.start_year()
        )));
    }
    Ok(())
}

fn combine(
    name: &str,
    parts: &[&AnnualSeries],
    f: impl Fn(&[f64]) -> f64,
) -> Result<AnnualSeries> {
    let first = parts[0];
    for p in &parts[1..] {
        check_years(first, p)?;
    }
    let mut row = vec![0.0; parts.len()];
    let values = (0..first.len())
        .map(|t| {
            for (slot, p) in row.iter_mut().zip(parts) {
                *slot = p.values()[t];
            }
            f(&row)
        })
        .collect();
    AnnualSeries::new(name, first.start_year(), values)
}

/// `TNR − (CLM + PUR)`.
pub fn insurer_profit(tnr: &AnnualSeries, clm: &AnnualSeries, pur: &AnnualSeries) -> Result<AnnualSeries> {
    combine("PI_INSURANCE", &[tnr, clm, pur], |v| v[0] - (v[1] + v[2]))
}

/// Sum of insurance, investment and pension-fund profits.
pub fn financial_profit(
    insurance: &AnnualSeries,
    investment: &AnnualSeries,
    pension: &AnnualSeries,
) -> Result<AnnualSeries> {
    combine("PI_F", &[insurance, investment, pension], |v| v[0] + v[1] + v[2])
}

/// Which expense aggregate enters non-financial profits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExpenseVariant {
    /// Total reported expenses (the wider concept).
    #[serde(rename = "RXP")]
    Rxp,
    /// Expenses on services.
    #[serde(rename = "SXP")]
    Sxp,
}

/// `TNR − (EXP + PUR)`; `variant` only labels which expense series was passed.
pub fn nonfinancial_profit(
    tnr: &AnnualSeries,
    expenses: &AnnualSeries,
    pur: &AnnualSeries,
    variant: ExpenseVariant,
) -> Result<AnnualSeries> {
    let name = match variant {
        ExpenseVariant::Rxp => "PI_NF_RXP",
        ExpenseVariant::Sxp => "PI_NF_SXP",
    };
    combine(name, &[tnr, expenses, pur], |v| v[0] - (v[1] + v[2]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Tax {
    #[serde(rename = "PIT")]
    Pit,
    #[serde(rename = "KD_DDD")]
    KdDdd,
    #[serde(rename = "DZP")]
    Dzp,
}

impl Tax {
    pub fn default_target(self) -> &'static str {
        match self {
            Tax::Pit => "PIT",
            Tax::KdDdd => "KD_DDD",
            Tax::Dzp => "DZP",
        }
    }

    pub fn default_predictors(self) -> &'static [&'static str] {
        match self {
            Tax::Pit => &["WAGE", "SOC"],
            Tax::KdDdd => &["PI_NF", "PI_F"],
            Tax::Dzp => &["PRM"],
        }
    }

    fn min_training_years(self) -> usize {
        match self {
            Tax::Dzp => MIN_TRAINING_YEARS_DZP,
            _ => MIN_TRAINING_YEARS,
        }
    }
}

impl fmt::Display for Tax {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.default_target())
    }
}

impl std::str::FromStr for Tax {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().replace(['+', '-'], "_").as_str() {
            "PIT" => Ok(Tax::Pit),
            "KD_DDD" | "CIT" => Ok(Tax::KdDdd),
            "DZP" => Ok(Tax::Dzp),
            other => Err(Error::InvalidArgument(format!("unknown tax `{other}`"))),
        }
    }
}

/// ARMA order of the regression errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderPolicy {
    /// AICc search over `p ≤ max_p`, `q ≤ max_q` on the OLS residuals.
    Auto { max_p: usize, max_q: usize },
    Fixed(ArimaOrder),
}

impl Default for OrderPolicy {
    fn default() -> Self {
        OrderPolicy::Auto { max_p: 2, max_q: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaxModelSpec {
    pub tax: Tax,
    pub target_column: String,
    pub predictor_columns: Vec<String>,
    /// `None` tries every candidate transform.
    pub transform: Option<TransformTag>,
    pub order: OrderPolicy,
    pub holdout_years: usize,
    pub hp_lambda: f64,
}

impl TaxModelSpec {
    /// The tax's default columns, every candidate transform, automatic order.
    pub fn new(tax: Tax) -> Self {
        Self {
            tax,
            target_column: tax.default_target().to_string(),
            predictor_columns: tax.default_predictors().iter().map(|s| s.to_string()).collect(),
            transform: None,
            order: OrderPolicy::default(),
            holdout_years: DEFAULT_HOLDOUT,
            hp_lambda: HP_LAMBDA_ANNUAL,
        }
    }

    /// Checks the predictor count against the tax's equation.
    pub fn validate(&self) -> Result<()> {
        let expected = self.tax.default_predictors().len();
        if self.predictor_columns.len() != expected {
            return Err(Error::InvalidArgument(format!(
                "{} takes {expected} predictor(s) ({}), got {}",
                self.tax,
                self.tax.default_predictors().join(", "),
                self.predictor_columns.len()
            )));
        }
        if self.holdout_years == 0 {
            return Err(Error::InvalidArgument("holdout must be positive".into()));
        }
        if !(self.hp_lambda > 0.0) {
            return Err(Error::InvalidArgument("HP lambda must be positive".into()));
        }
        if self.transform == Some(TransformTag::Log) && self.tax != Tax::Dzp {
            return Err(Error::InvalidArgument("the log transform is reserved for DZP".into()));
        }
        Ok(())
    }

    fn columns(&self) -> Vec<&str> {
        std::iter::once(self.target_column.as_str())
            .chain(self.predictor_columns.iter().map(String::as_str))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnDiagnostics {
    pub column: String,
    pub verdict: Option<StationarityVerdict>,
    /// Tests that could not run, with the reason.
    pub skipped: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub columns: Vec<ColumnDiagnostics>,
    pub johansen: Option<JohansenReport>,
    pub johansen_error: Option<String>,
}

impl Diagnostics {
    pub fn cointegrated(&self) -> bool {
        self.johansen.as_ref().is_some_and(|j| j.cointegration_rank >= 1)
    }

    pub fn all_stationary(&self) -> bool {
        self.columns
            .iter()
            .all(|c| c.verdict.as_ref().is_some_and(|v| v.stationary == Some(true)))
    }
}

/// Augmentation lags for short annual samples: `⌊(n − 1)^{1/3}⌋`.
fn default_lags(n: usize) -> usize {
    ((n.saturating_sub(1)) as f64).cbrt().floor() as usize
}

/// Unit-root battery per column and a Johansen test across all columns.
pub fn diagnose(frame: &SeriesFrame, columns: &[&str]) -> Result<Diagnostics> {
    let mut out = Vec::with_capacity(columns.len());
    for name in columns {
        let s = frame.column(name)?;
        let lags = default_lags(s.len());
        let runs: [(&str, Result<TestReport>); 4] = [
            ("ADF", adf_test(s, lags, Deterministic::Constant)),
            ("PP", pp_test(s, Deterministic::Constant)),
            ("KPSS", kpss_test(s, Deterministic::Constant)),
            ("DF-GLS", dfgls_test(s, lags)),
        ];
        let mut reports = Vec::new();
        let mut skipped = BTreeMap::new();
        for (label, r) in runs {
            match r {
                Ok(rep) => reports.push(rep),
                Err(e) => {
                    skipped.insert(label.to_string(), e.to_string());
                }
            }
        }
        out.push(ColumnDiagnostics {
            column: name.to_string(),
            verdict: (!reports.is_empty()).then(|| stationarity_verdict(&reports, Some(s))),
            skipped,
        });
    }
    let (johansen, johansen_error) = match frame.select(columns).and_then(|f| johansen_max_eigen(&f, JOHANSEN_LAG)) {
        Ok(j) => (Some(j), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(Diagnostics {
        columns: out,
        johansen,
        johansen_error,
    })
}

/// Transforms attempted for `tax` given the diagnostics.
///
/// Levels enter when Johansen finds cointegration or every column is judged
/// stationary. DZP uses only the log and first-difference variants.
pub fn candidate_transforms(tax: Tax, diagnostics: &Diagnostics) -> Vec<TransformTag> {
    if tax == Tax::Dzp {
        return vec![TransformTag::Log, TransformTag::Diff1];
    }
    let mut out = Vec::with_capacity(3);
    if diagnostics.cointegrated() || diagnostics.all_stationary() {
        out.push(TransformTag::Level);
    }
    out.push(TransformTag::Diff1);
    out.push(TransformTag::Hp);
    out
}

/// One row of the per-variant estimation table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantRow {
    pub transform: TransformTag,
    pub label: String,
    pub fit: Option<VariantFit>,
    pub failure: Option<String>,
    pub selected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantFit {
    pub order: ArimaOrder,
    pub n_obs: usize,
    pub k: usize,
    pub loglik: f64,
    pub aic: f64,
    pub aicc: Option<f64>,
    pub bic: f64,
    pub r2: f64,
    pub holdout_rmse: f64,
    pub coefficients: Vec<Coefficient>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProposedRun {
    pub tax: Tax,
    pub target: String,
    pub predictors: Vec<String>,
    pub holdout_years: usize,
    pub hp_lambda: f64,
    pub diagnostics: Diagnostics,
    pub variants: Vec<VariantRow>,
    pub selected: TransformTag,
    pub model: RegArimaModel,
    pub forecast: AnnualSeries,
    pub actual: AnnualSeries,
    pub errors: ErrorTable,
    pub notes: Vec<String>,
}

struct Fitted {
    model: RegArimaModel,
    forecast: AnnualSeries,
    errors: ErrorTable,
}

fn fit_variant(
    spec: &TaxModelSpec,
    train: &SeriesFrame,
    test: &SeriesFrame,
    tag: TransformTag,
    notes: &mut Vec<String>,
) -> Result<Fitted> {
    let preds: Vec<&str> = spec.predictor_columns.iter().map(String::as_str).collect();
    let target = spec.target_column.as_str();
    // Log-log regressions keep a constant so the slope is an elasticity.
    let options = RegArimaOptions {
        intercept: tag == TransformTag::Log,
        hp_lambda: spec.hp_lambda,
    };
    let model = match spec.order {
        OrderPolicy::Fixed(order) => fit_regarima(train, target, &preds, order, tag, options)?,
        OrderPolicy::Auto { max_p, max_q } => {
            let base = fit_regarima(train, target, &preds, ArimaOrder::white_noise(), tag, options)?;
            let order = auto_order(base.working_residuals(), 0, max_p, max_q);
            if order == ArimaOrder::white_noise() {
                base
            } else {
                match fit_regarima(train, target, &preds, order, tag, options) {
                    Ok(m) => m,
                    Err(e) => {
                        notes.push(format!("{tag}: ARMA{order} failed ({e}); kept white-noise errors"));
                        base
                    }
                }
            }
        }
    };
    let horizon = test.len();
    let forecast = forecast_regarima(&model, test, horizon)?;
    let actual = test.column(target)?;
    let errors = evaluate_series(actual, &forecast, &format!("proposed {}", tag.label()))?;
    Ok(Fitted {
        model,
        forecast,
        errors,
    })
}

/// Splits, diagnoses, fits each candidate transform, forecasts the holdout
/// and evaluates at level.
///
/// Information criteria are only comparable within one target transform,
/// so the variant with the smallest holdout RMSE at level is selected; ties
/// go to the smaller AICc.
pub fn run_proposed_pipeline(spec: &TaxModelSpec, frame: &SeriesFrame) -> Result<ProposedRun> {
    spec.validate()?;
    let columns = spec.columns();
    let frame = frame.select(&columns)?;
    let needed = spec.holdout_years + spec.tax.min_training_years();
    if frame.len() < needed {
        return Err(Error::TooShort {
            needed,
            got: frame.len(),
        });
    }
    let (train, test) = slice_train_test(&frame, spec.holdout_years)?;
    let diagnostics = diagnose(&train, &columns)?;
    let candidates = match spec.transform {
        Some(t) => vec![t],
        None => candidate_transforms(spec.tax, &diagnostics),
    };

    let mut notes = Vec::new();
    let mut rows = Vec::with_capacity(candidates.len());
    let mut fitted: Vec<Option<Fitted>> = Vec::with_capacity(candidates.len());
    for &tag in &candidates {
        match fit_variant(spec, &train, &test, tag, &mut notes) {
            Ok(f) => {
                let m = &f.model;
                rows.push(VariantRow {
                    transform: tag,
                    label: tag.label().to_string(),
                    fit: Some(VariantFit {
                        order: m.error_order,
                        n_obs: m.n_obs,
                        k: m.n_params,
                        loglik: m.loglik,
                        aic: m.criteria.aic,
                        aicc: m.criteria.aicc,
                        bic: m.criteria.bic,
                        r2: m.r2,
                        holdout_rmse: f.errors.rmse,
                        coefficients: m.regression.clone(),
                    }),
                    failure: None,
                    selected: false,
                });
                fitted.push(Some(f));
            }
            Err(e) => {
                rows.push(VariantRow {
                    transform: tag,
                    label: tag.label().to_string(),
                    fit: None,
                    failure: Some(e.to_string()),
                    selected: false,
                });
                fitted.push(None);
            }
        }
    }

    let best = rows
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.fit.as_ref().map(|f| (i, f)))
        .filter(|(_, f)| f.holdout_rmse.is_finite())
        .min_by(|(_, a), (_, b)| {
            a.holdout_rmse
                .total_cmp(&b.holdout_rmse)
                .then(a.aicc.unwrap_or(a.aic).total_cmp(&b.aicc.unwrap_or(b.aic)))
        })
        .map(|(i, _)| i);
    let Some(best) = best else {
        let reasons: Vec<String> = rows
            .iter()
            .map(|r| format!("{}: {}", r.transform, r.failure.as_deref().unwrap_or("non-finite RMSE")))
            .collect();
        return Err(Error::NoViableVariant(reasons.join("; ")));
    };
    rows[best].selected = true;
    let Fitted {
        model,
        forecast,
        errors,
    } = fitted.swap_remove(best).expect("selected variant was fitted");

    notes.push(format!(
        "selected {} ({}) by holdout RMSE at level; information criteria are compared only within a transform",
        model.transform_tag,
        model.transform_tag.label()
    ));
    notes.push(format!(
        "errors ARMA{}, k = {}, n = {}, estimation {}",
        model.error_order, model.n_params, model.n_obs, model.method
    ));
    if model.transform_tag == TransformTag::Hp {
        notes.push(format!("HP lambda = {}", spec.hp_lambda));
    }
    notes.push(format!("inversion: {}", model.transform_state().inversion_rule()));
    if let Some(e) = &diagnostics.johansen_error {
        notes.push(format!("Johansen test skipped: {e}"));
    }
    for c in &diagnostics.columns {
        for (test, reason) in &c.skipped {
            notes.push(format!("{test} on {} skipped: {reason}", c.column));
        }
    }

    let actual = test.column(&spec.target_column)?.clone();
    Ok(ProposedRun {
        tax: spec.tax,
        target: spec.target_column.clone(),
        predictors: spec.predictor_columns.clone(),
        holdout_years: spec.holdout_years,
        hp_lambda: spec.hp_lambda,
        diagnostics,
        variants: rows,
        selected: model.transform_tag,
        model,
        forecast,
        actual,
        errors,
        notes,
    })
}

/// DZP on PRM by simple regression, log and first-difference variants.
pub fn run_dzp_pipeline(frame: &SeriesFrame, holdout_years: usize) -> Result<ProposedRun> {
    let spec = TaxModelSpec {
        order: OrderPolicy::Fixed(ArimaOrder::white_noise()),
        holdout_years,
        ..TaxModelSpec::new(Tax::Dzp)
    };
    run_proposed_pipeline(&spec, frame)
}

/// Revenue driven by predictor growth rates through fixed elasticities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElasticityBaselineSpec {
    pub revenue_column: String,
    pub predictor_columns: Vec<String>,
    pub elasticities: BTreeMap<String, f64>,
    /// Last observed year; its revenue is the recursion's starting level.
    pub base_year: i32,
    /// Optional additive ex-post adjustment added to each forecast year.
    pub adjustment_column: Option<String>,
}

impl ElasticityBaselineSpec {
    pub fn validate(&self) -> Result<()> {
        for p in &self.predictor_columns {
            if !self.elasticities.contains_key(p) {
                return Err(Error::MissingElasticity(p.clone()));
            }
        }
        Ok(())
    }
}

fn value_in(frame: &SeriesFrame, column: &str, year: i32) -> Result<f64> {
    frame
        .column(column)?
        .value_at(year)
        .ok_or_else(|| Error::MissingPredictorYears {
            name: column.to_string(),
            year,
        })
}

/// `R_{t+1} = R_t (1 + Σ η_X g_{X,t+1})` for the `horizon` years after
/// `base_year`, with `g` the predictor's year-on-year growth rate.
pub fn run_baseline_elasticity(
    spec: &ElasticityBaselineSpec,
    frame: &SeriesFrame,
    horizon: usize,
) -> Result<AnnualSeries> {
    spec.validate()?;
    let mut level = value_in(frame, &spec.revenue_column, spec.base_year)?;
    let mut values = Vec::with_capacity(horizon);
    for h in 1..=horizon as i32 {
        let year = spec.base_year + h;
        let mut growth = 0.0;
        for p in &spec.predictor_columns {
            let prev = value_in(frame, p, year - 1)?;
            let cur = value_in(frame, p, year)?;
            if prev == 0.0 {
                return Err(Error::ZeroDenominator { year: year - 1 });
            }
            growth += spec.elasticities[p] * (cur / prev - 1.0);
        }
        level *= 1.0 + growth;
        values.push(level);
    }
    if let Some(adj) = &spec.adjustment_column {
        for (h, v) in values.iter_mut().enumerate() {
            *v += value_in(frame, adj, spec.base_year + 1 + h as i32)?;
        }
    }
    AnnualSeries::new(spec.revenue_column.clone(), spec.base_year + 1, values)
}

/// CIT baseline: an elasticity block (KD, optionally with DZP folded in),
/// an optional separate DZP elasticity block, and DDD by AR(1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CitBaselineSpec {
    pub kd: ElasticityBaselineSpec,
    pub dzp: Option<ElasticityBaselineSpec>,
    pub ddd_column: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CitBaseline {
    pub kd: AnnualSeries,
    pub dzp: Option<AnnualSeries>,
    pub ddd: AnnualSeries,
    pub total: AnnualSeries,
}

pub fn run_cit_baseline(spec: &CitBaselineSpec, frame: &SeriesFrame, horizon: usize) -> Result<CitBaseline> {
    let kd = run_baseline_elasticity(&spec.kd, frame, horizon)?;
    let dzp = spec
        .dzp
        .as_ref()
        .map(|s| run_baseline_elasticity(s, frame, horizon))
        .transpose()?;
    let base = spec.kd.base_year;
    let ddd_hist = frame.column(&spec.ddd_column)?;
    let ddd_hist = ddd_hist.slice_years(ddd_hist.start_year(), base)?;
    let ar = ar1_fit(&ddd_hist)?;
    let ddd = ar1_forecast(&ar, &spec.ddd_column, ddd_hist.last(), base + 1, horizon)?;
    let total: Vec<f64> = (0..horizon)
        .map(|h| kd.values()[h] + ddd.values()[h] + dzp.as_ref().map_or(0.0, |d| d.values()[h]))
        .collect();
    Ok(CitBaseline {
        total: AnnualSeries::new("CIT", base + 1, total)?,
        kd,
        dzp,
        ddd,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoldoutRow {
    pub year: i32,
    pub actual: f64,
    pub baseline: f64,
    pub proposed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReproductionReport {
    pub tax: Tax,
    pub target: String,
    pub variants: Vec<VariantRow>,
    pub selected: TransformTag,
    pub coefficients: Vec<Coefficient>,
    pub ar_coeffs: Vec<f64>,
    pub ma_coeffs: Vec<f64>,
    pub holdout: Vec<HoldoutRow>,
    pub error_tables: Vec<ErrorTable>,
    pub accuracy_gain: ErrorTable,
    /// Relative reduction of Theil's U1, `None` when the baseline U1 is zero.
    pub relative_efficiency_gain: Option<f64>,
    /// Error-table rows breaking |ME| ≤ MAE ≤ RMSE.
    pub flags: Vec<String>,
    pub notes: Vec<String>,
}

/// Scores the baseline and the proposed forecasts on the proposed run's
/// holdout years.
pub fn compare_models(frame: &SeriesFrame, baseline: &AnnualSeries, proposed: &ProposedRun) -> Result<ReproductionReport> {
    let first = proposed.forecast.start_year();
    let last = proposed.forecast.end_year();
    if baseline.start_year() > first || baseline.end_year() < last {
        return Err(Error::YearMismatch(format!(
            "baseline covers {}–{}, holdout is {first}–{last}",
            baseline.start_year(),
            baseline.end_year()
        )));
    }
    let baseline = baseline.slice_years(first, last)?;
    let actual = frame.column(&proposed.target)?;
    if actual.start_year() > first || actual.end_year() < last {
        return Err(Error::YearMismatch(format!(
            "actuals for `{}` do not cover {first}–{last}",
            proposed.target
        )));
    }
    let actual = actual.slice_years(first, last)?;
    let base_table = evaluate_series(&actual, &baseline, "baseline")?;
    let prop_table = evaluate_series(&actual, &proposed.forecast, "proposed")?;
    let gain = accuracy_gain(&base_table, &prop_table)?;
    let reg = relative_efficiency_gain(base_table.theil_u1, prop_table.theil_u1).ok();

    let mut flags = Vec::new();
    for t in [&base_table, &prop_table] {
        for v in t.violations() {
            flags.push(format!("{}: {v}", t.label));
        }
    }
    let holdout = (0..actual.len())
        .map(|i| HoldoutRow {
            year: first + i as i32,
            actual: actual.values()[i],
            baseline: baseline.values()[i],
            proposed: proposed.forecast.values()[i],
        })
        .collect();
    let mut notes = proposed.notes.clone();
    notes.push(SIGN_CONVENTION.to_string());
    notes.push("accuracy gain = baseline − proposed, per error measure".to_string());
    Ok(ReproductionReport {
        tax: proposed.tax,
        target: proposed.target.clone(),
        variants: proposed.variants.clone(),
        selected: proposed.selected,
        coefficients: proposed.model.regression.clone(),
        ar_coeffs: proposed.model.ar_coeffs.clone(),
        ma_coeffs: proposed.model.ma_coeffs.clone(),
        holdout,
        error_tables: vec![base_table, prop_table],
        accuracy_gain: gain,
        relative_efficiency_gain: reg,
        flags,
        notes,
    })
}
