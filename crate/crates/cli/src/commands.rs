use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use fiscast_core::association::{predictor_screen, ScreenConfig};
use fiscast_core::estimation::{fit_regarima, forecast_regarima, RegArimaOptions};
use fiscast_core::forecast_eval::evaluate_series;
use fiscast_core::revenue_models::{
    candidate_transforms, compare_models, diagnose, run_baseline_elasticity, run_cit_baseline,
    run_proposed_pipeline, CitBaselineSpec, ElasticityBaselineSpec, ProposedRun,
};
use fiscast_core::{align, slice_train_test, AnnualSeries, SeriesFrame};
use sha2::{Digest, Sha256};

use crate::config::{Overrides, RunConfig};
use crate::error::CliError;
use crate::ingest::read_series;
use crate::report::{
    plot_csv, render_text, CompareBody, DiagnoseBody, EvaluateBody, FitBody, ForecastBody, PlotRow,
    Report, ReportBody, ScreenBody, YearValue,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Diagnose,
    Screen,
    Fit,
    Forecast,
    Evaluate,
    Compare,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Command::Diagnose => "diagnose",
            Command::Screen => "screen",
            Command::Fit => "fit",
            Command::Forecast => "forecast",
            Command::Evaluate => "evaluate",
            Command::Compare => "compare",
        })
    }
}

/// A finished command: the report plus any plot rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: Report,
    pub plot: Option<Vec<PlotRow>>,
}

struct Data {
    series: BTreeMap<String, AnnualSeries>,
}

impl Data {
    fn frame(&self, names: &[&str]) -> Result<SeriesFrame, CliError> {
        let cols = names
            .iter()
            .map(|n| {
                self.series
                    .get(*n)
                    .cloned()
                    .ok_or_else(|| fiscast_core::Error::MissingColumn(n.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(align(&cols)?)
    }

    fn column(&self, name: &str) -> Result<&AnnualSeries, CliError> {
        Ok(self
            .series
            .get(name)
            .ok_or_else(|| fiscast_core::Error::MissingColumn(name.to_string()))?)
    }
}

/// Loads the config and data, runs `command`, and writes the outputs.
pub fn execute(command: Command, config_path: &Path, overrides: &Overrides) -> Result<(Outcome, Vec<PathBuf>), CliError> {
    let (config, data_path) = RunConfig::load(config_path, overrides)?;
    let (series, bytes) = read_series(&data_path)?;
    let outcome = run_command(command, &config, series, &bytes)?;
    let written = write_outputs(&config.output_dir, &outcome)?;
    Ok((outcome, written))
}

/// Runs `command` on already-loaded data without touching the filesystem.
pub fn run_command(
    command: Command,
    config: &RunConfig,
    series: Vec<AnnualSeries>,
    data_bytes: &[u8],
) -> Result<Outcome, CliError> {
    let data = Data {
        series: series.into_iter().map(|s| (s.name().to_string(), s)).collect(),
    };
    let spec = config.model_spec();
    let mut columns: Vec<&str> = vec![spec.target_column.as_str()];
    columns.extend(spec.predictor_columns.iter().map(String::as_str));
    let frame = data.frame(&columns)?;

    let (body, plot) = match command {
        Command::Diagnose => {
            let (train, _) = slice_train_test(&frame, config.holdout_years)?;
            let diagnostics = diagnose(&train, &columns)?;
            let candidates = match spec.transform {
                Some(t) => vec![t],
                None => candidate_transforms(spec.tax, &diagnostics),
            };
            let body = DiagnoseBody {
                first_year: train.first_year(),
                last_year: train.last_year(),
                diagnostics,
                candidate_transforms: candidates,
            };
            (ReportBody::Diagnose(body), None)
        }
        Command::Screen => {
            let preds: Vec<&str> = match &config.screen.predictors {
                Some(p) => p.iter().map(String::as_str).collect(),
                None => columns[1..].to_vec(),
            };
            let mut cols = vec![columns[0]];
            cols.extend(&preds);
            let (train, _) = slice_train_test(&data.frame(&cols)?, config.holdout_years)?;
            let screen = ScreenConfig {
                strength_threshold: config.screen.strength_threshold,
                alpha: config.significance,
                chi2_bins: config.screen.chi2_bins,
            };
            let reports = predictor_screen(&train, columns[0], &preds, &screen)?;
            let body = ScreenBody {
                target: columns[0].to_string(),
                first_year: train.first_year(),
                last_year: train.last_year(),
                alpha: config.significance,
                strength_threshold: config.screen.strength_threshold,
                chi2_bins: config.screen.chi2_bins,
                reports,
            };
            (ReportBody::Screen(body), None)
        }
        Command::Fit => {
            let run = run_proposed_pipeline(&spec, &frame)?;
            let baseline = baseline_series(config, &data, &run)?;
            let plot = holdout_plot(&run, baseline.as_ref().map(|b| &b.0));
            let m = &run.model;
            let body = FitBody {
                tax: run.tax,
                target: run.target.clone(),
                predictors: run.predictors.clone(),
                first_year: m.first_year,
                last_year: m.last_year,
                variants: run.variants.clone(),
                selected: run.selected,
                order: m.error_order,
                coefficients: m.regression.clone(),
                intercept_included: m.intercept_included,
                ar_coeffs: m.ar_coeffs.clone(),
                ma_coeffs: m.ma_coeffs.clone(),
                loglik: m.loglik,
                criteria: m.criteria,
                r2: m.r2,
                n_obs: m.n_obs,
                n_params: m.n_params,
                converged: m.converged,
                method: m.method.clone(),
                notes: run.notes.clone(),
            };
            (ReportBody::Fit(body), Some(plot))
        }
        Command::Forecast => {
            let run = run_proposed_pipeline(&spec, &frame)?;
            let preds: Vec<&str> = columns[1..].to_vec();
            let future = data.frame(&preds)?;
            if future.last_year() <= frame.last_year() {
                return Err(CliError::NoFutureYears);
            }
            let future = future.slice_years(frame.last_year() + 1, future.last_year())?;
            let options = RegArimaOptions {
                intercept: run.model.intercept_included,
                hp_lambda: config.hp_lambda,
            };
            let model = fit_regarima(&frame, columns[0], &preds, run.model.error_order, run.selected, options)?;
            let forecast = forecast_regarima(&model, &future, future.len())?;
            let mut notes = run.notes.clone();
            notes.push(format!(
                "transform and order chosen on the {}-year holdout, then refitted on {}–{}",
                config.holdout_years,
                frame.first_year(),
                frame.last_year()
            ));
            let points: Vec<YearValue> = forecast
                .years()
                .zip(forecast.values())
                .map(|(year, &value)| YearValue { year, value })
                .collect();
            let plot = points
                .iter()
                .map(|p| PlotRow {
                    year: p.year,
                    actual: None,
                    baseline: None,
                    proposed: Some(p.value),
                })
                .collect();
            let body = ForecastBody {
                target: columns[0].to_string(),
                selected: run.selected,
                order: model.error_order,
                first_year: frame.first_year(),
                last_year: frame.last_year(),
                coefficients: model.regression.clone(),
                forecast: points,
                notes,
            };
            (ReportBody::Forecast(body), Some(plot))
        }
        Command::Evaluate => {
            let run = run_proposed_pipeline(&spec, &frame)?;
            let baseline = baseline_series(config, &data, &run)?;
            let plot = holdout_plot(&run, baseline.as_ref().map(|b| &b.0));
            let base_table = match &baseline {
                Some((b, _)) => {
                    let b = b.slice_years(run.actual.start_year(), run.actual.end_year())?;
                    Some(evaluate_series(&run.actual, &b, "baseline")?)
                }
                None => None,
            };
            let mut flags = Vec::new();
            for t in base_table.iter().chain(std::iter::once(&run.errors)) {
                flags.extend(t.violations().into_iter().map(|v| format!("{}: {v}", t.label)));
            }
            let body = EvaluateBody {
                target: run.target.clone(),
                selected: run.selected,
                holdout: plot.clone(),
                proposed: run.errors.clone(),
                baseline: base_table,
                baseline_source: baseline.map(|b| b.1),
                flags,
            };
            (ReportBody::Evaluate(body), Some(plot))
        }
        Command::Compare => {
            let run = run_proposed_pipeline(&spec, &frame)?;
            let (baseline, source) = baseline_series(config, &data, &run)?.ok_or(CliError::MissingBaseline)?;
            let comparison = compare_models(&frame, &baseline, &run)?;
            let plot = holdout_plot(&run, Some(&baseline));
            (
                ReportBody::Compare(CompareBody {
                    baseline_source: source,
                    comparison,
                }),
                Some(plot),
            )
        }
    };

    let report = Report {
        tool: "fiscast".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: command.to_string(),
        config_fingerprint: config.fingerprint(),
        data_fingerprint: hex::encode(Sha256::digest(data_bytes)),
        config: config.clone(),
        body,
    };
    Ok(Outcome { report, plot })
}

fn holdout_plot(run: &ProposedRun, baseline: Option<&AnnualSeries>) -> Vec<PlotRow> {
    run.actual
        .years()
        .zip(run.actual.values())
        .zip(run.forecast.values())
        .map(|((year, &a), &p)| PlotRow {
            year,
            actual: Some(a),
            baseline: baseline.and_then(|b| b.value_at(year)),
            proposed: Some(p),
        })
        .collect()
}

/// Baseline forecasts for the run's holdout, with a description of their
/// source. `None` when the config has no `[baseline]` section.
fn baseline_series(config: &RunConfig, data: &Data, run: &ProposedRun) -> Result<Option<(AnnualSeries, String)>, CliError> {
    let Some(b) = &config.baseline else {
        return Ok(None);
    };
    if let Some(col) = &b.column {
        return Ok(Some((data.column(col)?.clone(), format!("series `{col}`"))));
    }
    let elasticities = b.elasticities.clone().expect("validated: column or elasticities");
    let revenue = b.revenue_column.clone().unwrap_or_else(|| run.target.clone());
    let predictors: Vec<String> = elasticities.keys().cloned().collect();
    let mut cols: Vec<&str> = vec![revenue.as_str()];
    cols.extend(predictors.iter().map(String::as_str));
    if let Some(a) = &b.adjustment_column {
        cols.push(a);
    }
    if let Some(d) = &b.ddd_column {
        cols.push(d);
    }
    let frame = data.frame(&cols)?;
    let spec = ElasticityBaselineSpec {
        revenue_column: revenue.clone(),
        predictor_columns: predictors,
        elasticities,
        base_year: run.forecast.start_year() - 1,
        adjustment_column: b.adjustment_column.clone(),
    };
    let horizon = run.forecast.len();
    Ok(Some(match &b.ddd_column {
        Some(ddd) => {
            let cit = run_cit_baseline(
                &CitBaselineSpec {
                    kd: spec,
                    dzp: None,
                    ddd_column: ddd.clone(),
                },
                &frame,
                horizon,
            )?;
            (cit.total, format!("elasticity emulator on `{revenue}` plus AR(1) on `{ddd}`"))
        }
        None => (
            run_baseline_elasticity(&spec, &frame, horizon)?,
            format!("elasticity emulator on `{revenue}`"),
        ),
    }))
}

fn write_file(path: PathBuf, contents: &str) -> Result<PathBuf, CliError> {
    std::fs::write(&path, contents).map_err(|source| CliError::Output {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

pub fn write_outputs(dir: &Path, outcome: &Outcome) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Output {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut written = vec![
        write_file(dir.join("report.json"), &outcome.report.to_json())?,
        write_file(dir.join("report.txt"), &render_text(&outcome.report))?,
    ];
    if let Some(rows) = &outcome.plot {
        let name = format!("plotdata_{}.csv", outcome.report.config.tax);
        written.push(write_file(dir.join(name), &plot_csv(rows))?);
    }
    Ok(written)
}
