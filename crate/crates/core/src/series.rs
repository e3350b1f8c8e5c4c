//! Annual series, aligned frames, train/test splitting and growth rates.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A named, gap-free annual series.
///
/// Construction validates the invariants (non-empty, all finite), so every
/// `AnnualSeries` in the program can be assumed well formed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnualSeries {
    name: String,
    start_year: i32,
    values: Vec<f64>,
}

impl AnnualSeries {
    pub fn new(name: impl Into<String>, start_year: i32, values: Vec<f64>) -> Result<Self> {
        let name = name.into();
        if values.is_empty() {
            return Err(Error::EmptySeries { name });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                name,
                year: start_year + i as i32,
            });
        }
        Ok(Self {
            name,
            start_year,
            values,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn start_year(&self) -> i32 {
        self.start_year
    }

    pub fn end_year(&self) -> i32 {
        self.start_year + self.values.len() as i32 - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always false; kept for API symmetry with collections.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn years(&self) -> impl Iterator<Item = i32> + '_ {
        (0..self.values.len()).map(move |i| self.start_year + i as i32)
    }

    pub fn year_of(&self, index: usize) -> i32 {
        self.start_year + index as i32
    }

    pub fn value_at(&self, year: i32) -> Option<f64> {
        let offset = year.checked_sub(self.start_year)?;
        usize::try_from(offset)
            .ok()
            .and_then(|i| self.values.get(i).copied())
    }

    pub fn last(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn renamed(&self, name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            ..self.clone()
        }
    }

    /// Restricts the series to the inclusive year range `first..=last`.
    pub fn slice_years(&self, first: i32, last: i32) -> Result<Self> {
        if first > last || first < self.start_year || last > self.end_year() {
            return Err(Error::YearMismatch(format!(
                "`{}` covers {}-{}, requested {first}-{last}",
                self.name,
                self.start_year,
                self.end_year()
            )));
        }
        let lo = (first - self.start_year) as usize;
        let hi = (last - self.start_year) as usize;
        Self::new(self.name.clone(), first, self.values[lo..=hi].to_vec())
    }

    /// Builds a new series with the same name and years from mapped values.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(
            self.name.clone(),
            self.start_year,
            self.values.iter().map(|&v| f(v)).collect(),
        )
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// A set of series restricted to a common inclusive year range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesFrame {
    first_year: i32,
    last_year: i32,
    columns: BTreeMap<String, AnnualSeries>,
}

impl SeriesFrame {
    pub fn first_year(&self) -> i32 {
        self.first_year
    }

    pub fn last_year(&self) -> i32 {
        self.last_year
    }

    pub fn year_range(&self) -> (i32, i32) {
        (self.first_year, self.last_year)
    }

    pub fn len(&self) -> usize {
        (self.last_year - self.first_year + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn years(&self) -> impl Iterator<Item = i32> {
        self.first_year..=self.last_year
    }

    pub fn column(&self, name: &str) -> Result<&AnnualSeries> {
        self.columns
            .get(name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.columns.contains_key(name)
    }

    pub fn column_names(&self) -> impl Iterator<Item = &str> {
        self.columns.keys().map(String::as_str)
    }

    pub fn columns(&self) -> impl Iterator<Item = &AnnualSeries> {
        self.columns.values()
    }

    /// Frame restricted to `first..=last`.
    pub fn slice_years(&self, first: i32, last: i32) -> Result<Self> {
        let columns = self
            .columns
            .iter()
            .map(|(k, s)| Ok((k.clone(), s.slice_years(first, last)?)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        Ok(Self {
            first_year: first,
            last_year: last,
            columns,
        })
    }

    /// Keeps only the named columns.
    pub fn select(&self, names: &[&str]) -> Result<Self> {
        let mut columns = BTreeMap::new();
        for name in names {
            let s = self.column(name)?;
            columns.insert(name.to_string(), s.clone());
        }
        if columns.is_empty() {
            return Err(Error::InvalidArgument("empty column selection".into()));
        }
        Ok(Self {
            first_year: self.first_year,
            last_year: self.last_year,
            columns,
        })
    }

    /// Adds (or replaces) a column, trimming it to the frame's years.
    pub fn with_column(mut self, series: AnnualSeries) -> Result<Self> {
        let trimmed = series.slice_years(self.first_year, self.last_year)?;
        self.columns.insert(trimmed.name().to_string(), trimmed);
        Ok(self)
    }
}

/// Intersects the year ranges of `series_list` and trims every series to it.
pub fn align(series_list: &[AnnualSeries]) -> Result<SeriesFrame> {
    if series_list.is_empty() {
        return Err(Error::InvalidArgument("align needs at least one series".into()));
    }
    let first = series_list.iter().map(AnnualSeries::start_year).max().unwrap();
    let last = series_list.iter().map(AnnualSeries::end_year).min().unwrap();
    let mut columns = BTreeMap::new();
    for s in series_list {
        if columns.contains_key(s.name()) {
            return Err(Error::DuplicateName(s.name().to_string()));
        }
        columns.insert(s.name().to_string(), s.clone());
    }
    if first > last {
        return Err(Error::EmptyIntersection);
    }
    for s in columns.values_mut() {
        *s = s.slice_years(first, last)?;
    }
    Ok(SeriesFrame {
        first_year: first,
        last_year: last,
        columns,
    })
}

/// Splits off the last `holdout_years` years as the test frame.
pub fn slice_train_test(
    frame: &SeriesFrame,
    holdout_years: usize,
) -> Result<(SeriesFrame, SeriesFrame)> {
    let len = frame.len();
    if holdout_years == 0 {
        return Err(Error::InvalidArgument("holdout must be positive".into()));
    }
    if holdout_years >= len {
        return Err(Error::HoldoutTooLarge {
            holdout: holdout_years,
            len,
        });
    }
    let split = frame.last_year - holdout_years as i32;
    Ok((
        frame.slice_years(frame.first_year, split)?,
        frame.slice_years(split + 1, frame.last_year)?,
    ))
}

/// Year-on-year relative changes `(v_t - v_{t-1}) / v_{t-1}`.
pub fn growth_rates(series: &AnnualSeries) -> Result<AnnualSeries> {
    if series.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: series.len(),
        });
    }
    let v = series.values();
    let mut out = Vec::with_capacity(v.len() - 1);
    for t in 1..v.len() {
        if v[t - 1] == 0.0 {
            return Err(Error::ZeroDenominator {
                year: series.year_of(t - 1),
            });
        }
        out.push((v[t] - v[t - 1]) / v[t - 1]);
    }
    AnnualSeries::new(series.name(), series.start_year() + 1, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(name: &str, start: i32, values: &[f64]) -> AnnualSeries {
        AnnualSeries::new(name, start, values.to_vec()).unwrap()
    }

    fn ramp(name: &str, first: i32, last: i32) -> AnnualSeries {
        s(name, first, &(first..=last).map(f64::from).collect::<Vec<_>>())
    }

    #[test]
    fn rejects_non_finite_and_empty() {
        assert!(matches!(
            AnnualSeries::new("x", 2000, vec![1.0, f64::NAN]),
            Err(Error::NonFinite { year: 2001, .. })
        ));
        assert!(AnnualSeries::new("x", 2000, vec![]).is_err());
    }

    #[test]
    fn align_intersects() {
        let f = align(&[ramp("A", 2004, 2020), ramp("B", 2005, 2017)]).unwrap();
        assert_eq!(f.year_range(), (2005, 2017));
        assert_eq!(f.column("A").unwrap().values()[0], 2005.0);
        let single = align(&[ramp("A", 2004, 2010)]).unwrap();
        assert_eq!(single.year_range(), (2004, 2010));
        assert_eq!(single.column_names().count(), 1);
        assert_eq!(
            align(&[ramp("A", 2004, 2006), ramp("B", 2010, 2012)]),
            Err(Error::EmptyIntersection)
        );
        assert_eq!(
            align(&[ramp("A", 2004, 2006), ramp("A", 2004, 2006)]),
            Err(Error::DuplicateName("A".into()))
        );
    }

    #[test]
    fn align_is_idempotent() {
        let f = align(&[ramp("A", 2001, 2020), ramp("B", 2005, 2017), ramp("C", 2003, 2019)])
            .unwrap();
        let again: Vec<_> = f.columns().cloned().collect();
        assert_eq!(align(&again).unwrap(), f);
    }

    #[test]
    fn train_test_split() {
        let f = align(&[ramp("A", 2005, 2020)]).unwrap();
        let (train, test) = slice_train_test(&f, 3).unwrap();
        assert_eq!(train.year_range(), (2005, 2017));
        assert_eq!(test.year_range(), (2018, 2020));

        let f2 = align(&[ramp("A", 2000, 2001)]).unwrap();
        let (a, b) = slice_train_test(&f2, 1).unwrap();
        assert_eq!((a.len(), b.len()), (1, 1));

        let f3 = align(&[ramp("A", 2000, 2002)]).unwrap();
        assert_eq!(
            slice_train_test(&f3, 3),
            Err(Error::HoldoutTooLarge { holdout: 3, len: 3 })
        );
    }

    #[test]
    fn growth() {
        let g = growth_rates(&s("x", 2000, &[100.0, 110.0, 99.0])).unwrap();
        assert_eq!(g.start_year(), 2001);
        assert!((g.values()[0] - 0.10).abs() < 1e-12);
        assert!((g.values()[1] + 0.10).abs() < 1e-12);
        let c = growth_rates(&s("x", 0, &[7.0, 7.0, 7.0])).unwrap();
        assert_eq!(c.values(), &[0.0, 0.0]);
        assert_eq!(
            growth_rates(&s("x", 0, &[0.0, 5.0])),
            Err(Error::ZeroDenominator { year: 0 })
        );
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn split_partitions(len in 2usize..40, holdout in 1usize..10) {
                prop_assume!(holdout < len);
                let f = align(&[ramp("A", 1990, 1990 + len as i32 - 1)]).unwrap();
                let (train, test) = slice_train_test(&f, holdout).unwrap();
                prop_assert_eq!(train.len() + test.len(), len);
                prop_assert_eq!(train.last_year() + 1, test.first_year());
                let mut joined = train.column("A").unwrap().values().to_vec();
                joined.extend_from_slice(test.column("A").unwrap().values());
                prop_assert_eq!(joined, f.column("A").unwrap().values().to_vec());
            }

            #[test]
            fn geometric_growth_is_constant(start in 0.1f64..1e4, ratio in 0.2f64..3.0, n in 2usize..30) {
                let values: Vec<f64> = (0..n).map(|i| start * ratio.powi(i as i32)).collect();
                let g = growth_rates(&s("g", 2000, &values)).unwrap();
                for v in g.values() {
                    prop_assert!((v - (ratio - 1.0)).abs() <= 1e-12 * (ratio - 1.0).abs().max(1.0));
                }
            }
        }
    }
}
