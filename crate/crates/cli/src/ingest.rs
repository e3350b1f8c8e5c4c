//! Long-format CSV input: `year,series,value`, one observation per row.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use fiscast_core::{align, AnnualSeries, SeriesFrame};

use crate::error::CliError;

const HEADER: [&str; 3] = ["year", "series", "value"];

/// Parses every series in the file. Each must cover a contiguous range of
/// years; rows may come in any order.
pub fn parse_series(text: &str) -> Result<Vec<AnnualSeries>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows: BTreeMap<String, BTreeMap<i32, f64>> = BTreeMap::new();
    let mut seen_header = false;
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Schema {
            line: e.position().map_or(0, |p| p.line()),
            reason: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if !seen_header {
            let got: Vec<&str> = record.iter().collect();
            if got != HEADER {
                return Err(CliError::Schema {
                    line,
                    reason: format!("header must be `year,series,value`, got `{}`", got.join(",")),
                });
            }
            seen_header = true;
            continue;
        }
        if record.len() != 3 {
            return Err(CliError::Schema {
                line,
                reason: format!("expected 3 fields, got {}", record.len()),
            });
        }
        let year_text = &record[0];
        if year_text.len() != 4 || !year_text.bytes().all(|b| b.is_ascii_digit()) {
            return Err(CliError::Schema {
                line,
                reason: format!("year `{year_text}` is not a 4-digit integer"),
            });
        }
        let year: i32 = year_text.parse().expect("four ASCII digits");
        let name = &record[1];
        if name.is_empty() {
            return Err(CliError::Schema {
                line,
                reason: "empty series name".into(),
            });
        }
        let value = parse_value(&record[2]).ok_or(CliError::NonNumeric { line })?;
        if rows.entry(name.to_string()).or_default().insert(year, value).is_some() {
            return Err(CliError::Schema {
                line,
                reason: format!("duplicate row for `{name}` in {year}"),
            });
        }
    }
    if !seen_header {
        return Err(CliError::Schema {
            line: 1,
            reason: "empty file".into(),
        });
    }
    rows.into_iter()
        .map(|(name, obs)| {
            let first = *obs.keys().next().expect("at least one row");
            let last = *obs.keys().next_back().expect("at least one row");
            let present: BTreeSet<i32> = obs.keys().copied().collect();
            if let Some(year) = (first..=last).find(|y| !present.contains(y)) {
                return Err(CliError::Gap { series: name, year });
            }
            Ok(AnnualSeries::new(name, first, obs.into_values().collect())?)
        })
        .collect()
}

/// Decimal with a `.` separator; no exponents, thousands separators or
/// special values.
fn parse_value(s: &str) -> Option<f64> {
    let digits = s.strip_prefix('-').unwrap_or(s);
    let mut parts = digits.splitn(2, '.');
    let int = parts.next()?;
    let frac = parts.next().unwrap_or("0");
    let ok = !int.is_empty()
        && int.bytes().all(|b| b.is_ascii_digit())
        && !frac.is_empty()
        && frac.bytes().all(|b| b.is_ascii_digit());
    if !ok {
        return None;
    }
    s.parse().ok()
}

pub fn read_series(path: &Path) -> Result<(Vec<AnnualSeries>, Vec<u8>), CliError> {
    let bytes = std::fs::read(path).map_err(|source| CliError::DataIo {
        path: path.to_path_buf(),
        source,
    })?;
    let text = std::str::from_utf8(&bytes).map_err(|e| CliError::Schema {
        line: 0,
        reason: format!("file is not UTF-8: {e}"),
    })?;
    let series = parse_series(text)?;
    Ok((series, bytes))
}

/// All series in the file, restricted to their common years.
pub fn ingest_csv(path: &Path) -> Result<SeriesFrame, CliError> {
    let (series, _) = read_series(path)?;
    Ok(align(&series)?)
}
