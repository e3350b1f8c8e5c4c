//! Report documents and their plain-text rendering.

use std::fmt::Write as _;

use fiscast_core::association::ScreenReport;
use fiscast_core::estimation::{ArimaOrder, Coefficient, ModelCriteria, TransformTag};
use fiscast_core::forecast_eval::ErrorTable;
use fiscast_core::revenue_models::{Diagnostics, ReproductionReport, Tax, VariantRow};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_fingerprint: String,
    pub data_fingerprint: String,
    pub config: RunConfig,
    pub body: ReportBody,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReportBody {
    Diagnose(DiagnoseBody),
    Screen(ScreenBody),
    Fit(FitBody),
    Forecast(ForecastBody),
    Evaluate(EvaluateBody),
    Compare(CompareBody),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnoseBody {
    pub first_year: i32,
    pub last_year: i32,
    pub diagnostics: Diagnostics,
    pub candidate_transforms: Vec<TransformTag>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenBody {
    pub target: String,
    pub first_year: i32,
    pub last_year: i32,
    pub alpha: f64,
    pub strength_threshold: f64,
    pub chi2_bins: usize,
    pub reports: Vec<ScreenReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitBody {
    pub tax: Tax,
    pub target: String,
    pub predictors: Vec<String>,
    pub first_year: i32,
    pub last_year: i32,
    pub variants: Vec<VariantRow>,
    pub selected: TransformTag,
    pub order: ArimaOrder,
    pub coefficients: Vec<Coefficient>,
    pub intercept_included: bool,
    pub ar_coeffs: Vec<f64>,
    pub ma_coeffs: Vec<f64>,
    pub loglik: f64,
    pub criteria: ModelCriteria,
    pub r2: f64,
    pub n_obs: usize,
    pub n_params: usize,
    pub converged: bool,
    pub method: String,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YearValue {
    pub year: i32,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastBody {
    pub target: String,
    pub selected: TransformTag,
    pub order: ArimaOrder,
    pub first_year: i32,
    pub last_year: i32,
    pub coefficients: Vec<Coefficient>,
    pub forecast: Vec<YearValue>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluateBody {
    pub target: String,
    pub selected: TransformTag,
    pub holdout: Vec<PlotRow>,
    pub proposed: ErrorTable,
    pub baseline: Option<ErrorTable>,
    pub baseline_source: Option<String>,
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareBody {
    pub baseline_source: String,
    pub comparison: ReproductionReport,
}

/// One line of `plotdata_<tax>.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotRow {
    pub year: i32,
    pub actual: Option<f64>,
    pub baseline: Option<f64>,
    pub proposed: Option<f64>,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}

pub fn plot_csv(rows: &[PlotRow]) -> String {
    let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut out = String::from("year,actual,baseline,proposed\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{}", r.year, cell(r.actual), cell(r.baseline), cell(r.proposed));
    }
    out
}

/// Right-aligned columns, first column left-aligned.
fn table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        let mut s = String::new();
        for (i, (c, w)) in cells.iter().zip(&widths).enumerate() {
            if i == 0 {
                let _ = write!(s, "{c:<w$}");
            } else {
                let _ = write!(s, "  {c:>w$}");
            }
        }
        s.trim_end().to_string() + "\n"
    };
    let mut out = line(headers.to_vec());
    out += &line(widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().iter().map(String::as_str).collect());
    for r in rows {
        out += &line(r.iter().map(String::as_str).collect());
    }
    out
}

fn num(v: f64) -> String {
    if v.is_nan() {
        "NA".into()
    } else {
        format!("{v:.4}")
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), num)
}

fn error_rows(tables: &[&ErrorTable]) -> String {
    let rows: Vec<Vec<String>> = tables
        .iter()
        .map(|t| {
            let mut r = vec![t.label.clone()];
            r.extend(t.values().iter().map(|v| num(*v)));
            r
        })
        .collect();
    table(&["Error", "ME", "MAE", "sMAE", "RMSE", "U1"], &rows)
}

fn variant_rows(variants: &[VariantRow]) -> String {
    let rows: Vec<Vec<String>> = variants
        .iter()
        .map(|v| match &v.fit {
            Some(f) => vec![
                format!("{}{}", v.label, if v.selected { " *" } else { "" }),
                f.order.to_string(),
                num(f.loglik),
                num(f.aic),
                opt(f.aicc),
                num(f.bic),
                num(f.r2),
                num(f.holdout_rmse),
            ],
            None => vec![
                v.label.clone(),
                "failed".into(),
                v.failure.clone().unwrap_or_default(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
            ],
        })
        .collect();
    table(
        &["Variables", "ARMA", "log likelihood", "AIC", "AICc", "BIC", "R^2", "holdout RMSE"],
        &rows,
    )
}

fn coefficient_rows(coefs: &[Coefficient]) -> String {
    let rows: Vec<Vec<String>> = coefs
        .iter()
        .map(|c| vec![c.name.clone(), num(c.estimate), num(c.std_error)])
        .collect();
    table(&["Coefficient", "estimate", "std. error"], &rows)
}

fn notes(out: &mut String, notes: &[String]) {
    if !notes.is_empty() {
        out.push_str("\nNotes:\n");
        for n in notes {
            let _ = writeln!(out, "  - {n}");
        }
    }
}

pub fn render_text(report: &Report) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {} {}", report.tool, report.version, report.command);
    let _ = writeln!(out, "tax: {}", report.config.tax);
    let _ = writeln!(out, "config fingerprint: {}", report.config_fingerprint);
    let _ = writeln!(out, "data fingerprint:   {}", report.data_fingerprint);
    let _ = writeln!(out, "seed: {}\n", report.config.seed);
    match &report.body {
        ReportBody::Diagnose(b) => {
            let _ = writeln!(out, "Training sample {}–{}\n", b.first_year, b.last_year);
            let mut rows = Vec::new();
            for c in &b.diagnostics.columns {
                if let Some(v) = &c.verdict {
                    for t in &v.per_test {
                        rows.push(vec![
                            c.column.clone(),
                            t.test_name.to_string(),
                            t.lags.to_string(),
                            num(t.statistic),
                            num(t.critical_values.pct5),
                            if t.reject_at_5pct { "reject" } else { "keep" }.into(),
                        ]);
                    }
                }
                for (test, reason) in &c.skipped {
                    rows.push(vec![c.column.clone(), test.clone(), "-".into(), "skipped".into(), reason.clone(), String::new()]);
                }
            }
            out += &table(&["Series", "Test", "lags", "statistic", "5% cv", "H0"], &rows);
            out.push('\n');
            let verdicts: Vec<Vec<String>> = b
                .diagnostics
                .columns
                .iter()
                .map(|c| match &c.verdict {
                    Some(v) => vec![
                        c.column.clone(),
                        if v.concordant { "yes" } else { "no" }.into(),
                        match v.stationary {
                            Some(true) => "stationary".into(),
                            Some(false) => "non-stationary".into(),
                            None => "undetermined".into(),
                        },
                        v.recommended_transforms
                            .iter()
                            .map(|t| t.to_string())
                            .collect::<Vec<_>>()
                            .join(", "),
                    ],
                    None => vec![c.column.clone(), "-".into(), "no test ran".into(), String::new()],
                })
                .collect();
            out += &table(&["Series", "concordant", "verdict", "recommended"], &verdicts);
            out.push('\n');
            match (&b.diagnostics.johansen, &b.diagnostics.johansen_error) {
                (Some(j), _) => {
                    let rows: Vec<Vec<String>> = (0..j.eigenvalues.len())
                        .map(|r| {
                            vec![
                                format!("r = {r}"),
                                num(j.eigenvalues[r]),
                                num(j.max_eigen_statistics[r]),
                                num(j.critical_values_5pct[r]),
                            ]
                        })
                        .collect();
                    let _ = writeln!(out, "Johansen max-eigenvalue, VAR({}), {}", j.lag_order, j.deterministic_case);
                    out += &table(&["H0", "eigenvalue", "statistic", "5% cv"], &rows);
                    let _ = writeln!(out, "cointegration rank: {}", j.cointegration_rank);
                }
                (None, Some(e)) => {
                    let _ = writeln!(out, "Johansen test skipped: {e}");
                }
                (None, None) => {}
            }
            let _ = writeln!(
                out,
                "\ncandidate transforms: {}",
                b.candidate_transforms.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(", ")
            );
        }
        ReportBody::Screen(b) => {
            let _ = writeln!(
                out,
                "Screening against {} over {}–{} (alpha {}, strength ≥ {})\n",
                b.target, b.first_year, b.last_year, b.alpha, b.strength_threshold
            );
            let p = |r: &ScreenReport, k: &str| r.tests.get(k).map_or_else(|| "-".into(), |t| format!("{:.4}", t.p_value));
            let rows: Vec<Vec<String>> = b
                .reports
                .iter()
                .map(|r| {
                    vec![
                        r.predictor.clone(),
                        num(r.r),
                        num(r.tau),
                        num(r.rho),
                        p(r, "t"),
                        p(r, "kendall"),
                        p(r, "chi2"),
                        p(r, "wilcoxon"),
                        p(r, "mannwhitney"),
                        if r.passes { "pass" } else { "fail" }.into(),
                    ]
                })
                .collect();
            out += &table(
                &["Predictor", "r", "tau", "rho", "p(t)", "p(tau)", "p(chi2)", "p(W)", "p(U)", "screen"],
                &rows,
            );
        }
        ReportBody::Fit(b) => {
            let _ = writeln!(out, "{} on {} over {}–{}\n", b.target, b.predictors.join(", "), b.first_year, b.last_year);
            out += &variant_rows(&b.variants);
            let _ = writeln!(out, "\nSelected: {} with ARMA{} errors ({})\n", b.selected, b.order, b.method);
            out += &coefficient_rows(&b.coefficients);
            if !b.ar_coeffs.is_empty() || !b.ma_coeffs.is_empty() {
                let _ = writeln!(out, "AR: {:?}  MA: {:?}", b.ar_coeffs, b.ma_coeffs);
            }
            notes(&mut out, &b.notes);
        }
        ReportBody::Forecast(b) => {
            let _ = writeln!(
                out,
                "{} forecast, {} with ARMA{} errors fitted on {}–{}\n",
                b.target, b.selected, b.order, b.first_year, b.last_year
            );
            let rows: Vec<Vec<String>> = b.forecast.iter().map(|y| vec![y.year.to_string(), num(y.value)]).collect();
            out += &table(&["Year", "forecast"], &rows);
            notes(&mut out, &b.notes);
        }
        ReportBody::Evaluate(b) => {
            let _ = writeln!(out, "{} holdout evaluation ({} selected)\n", b.target, b.selected);
            let mut tables = Vec::new();
            if let Some(t) = &b.baseline {
                tables.push(t);
            }
            tables.push(&b.proposed);
            out += &error_rows(&tables);
            if let Some(s) = &b.baseline_source {
                let _ = writeln!(out, "baseline: {s}");
            }
            notes(&mut out, &b.flags);
        }
        ReportBody::Compare(b) => {
            let c = &b.comparison;
            let _ = writeln!(out, "{} comparison on the holdout\n", c.target);
            out += &variant_rows(&c.variants);
            out.push('\n');
            let rows: Vec<Vec<String>> = c
                .holdout
                .iter()
                .map(|h| vec![h.year.to_string(), num(h.actual), num(h.baseline), num(h.proposed)])
                .collect();
            out += &table(&["Year", "actual", "baseline", "proposed"], &rows);
            out.push('\n');
            let mut tables: Vec<&ErrorTable> = c.error_tables.iter().collect();
            tables.push(&c.accuracy_gain);
            out += &error_rows(&tables);
            let _ = writeln!(
                out,
                "relative efficiency gain (U1): {}",
                c.relative_efficiency_gain.map_or_else(|| "undefined".into(), |g| format!("{g:.1}%"))
            );
            let _ = writeln!(out, "baseline: {}", b.baseline_source);
            let mut all = c.flags.clone();
            all.extend(c.notes.iter().cloned());
            notes(&mut out, &all);
        }
    }
    out
}
