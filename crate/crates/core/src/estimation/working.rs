//! Data transforms applied before fitting, with the state needed to
//! transform future regressors and to bring forecasts back to level.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{AnnualSeries, SeriesFrame};
use crate::transforms::{difference, extend_trend_linearly, hp_filter, natural_log};

/// Transform applied to every modelled column before estimation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TransformTag {
    #[serde(rename = "level")]
    Level,
    #[serde(rename = "diff1")]
    Diff1,
    #[serde(rename = "HP")]
    Hp,
    #[serde(rename = "log")]
    Log,
}

impl TransformTag {
    pub fn label(self) -> &'static str {
        match self {
            TransformTag::Level => "I(0)",
            TransformTag::Diff1 => "I(1)",
            TransformTag::Hp => "HP",
            TransformTag::Log => "ln",
        }
    }
}

impl fmt::Display for TransformTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TransformTag::Level => "level",
            TransformTag::Diff1 => "diff1",
            TransformTag::Hp => "HP",
            TransformTag::Log => "log",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for TransformTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "level" | "i0" => Ok(TransformTag::Level),
            "diff1" | "i1" => Ok(TransformTag::Diff1),
            "hp" => Ok(TransformTag::Hp),
            "log" | "ln" => Ok(TransformTag::Log),
            other => Err(Error::InvalidArgument(format!("unknown transform `{other}`"))),
        }
    }
}

/// Per-column memory of the training sample's end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnAnchor {
    pub last_level: f64,
    /// Last two HP trend values (previous, last); only set for HP.
    pub trend_tail: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformState {
    pub tag: TransformTag,
    pub hp_lambda: Option<f64>,
    pub anchors: BTreeMap<String, ColumnAnchor>,
}

/// Applies `tag` to each named column. `Diff1` drops the first year.
pub fn apply_transform(
    frame: &SeriesFrame,
    columns: &[&str],
    tag: TransformTag,
    hp_lambda: f64,
) -> Result<(Vec<AnnualSeries>, TransformState)> {
    let mut out = Vec::with_capacity(columns.len());
    let mut anchors = BTreeMap::new();
    for name in columns {
        let s = frame.column(name)?;
        let mut anchor = ColumnAnchor {
            last_level: s.last(),
            trend_tail: None,
        };
        let t = match tag {
            TransformTag::Level => s.clone(),
            TransformTag::Diff1 => difference(s, 1)?,
            TransformTag::Log => natural_log(s)?,
            TransformTag::Hp => {
                let d = hp_filter(s, hp_lambda)?;
                let tv = d.trend.values();
                anchor.trend_tail = Some((tv[tv.len() - 2], tv[tv.len() - 1]));
                d.cycle.renamed(s.name())
            }
        };
        anchors.insert(name.to_string(), anchor);
        out.push(t);
    }
    Ok((
        out,
        TransformState {
            tag,
            hp_lambda: (tag == TransformTag::Hp).then_some(hp_lambda),
            anchors,
        },
    ))
}

impl TransformState {
    fn anchor(&self, column: &str) -> Result<&ColumnAnchor> {
        self.anchors
            .get(column)
            .ok_or_else(|| Error::MissingColumn(column.to_string()))
    }

    fn trend_extension(&self, column: &str, horizon: usize) -> Result<Vec<f64>> {
        let (prev, last) = self
            .anchor(column)?
            .trend_tail
            .ok_or_else(|| Error::InvalidArgument("HP state without trend".into()))?;
        Ok(extend_trend_linearly(&[prev, last], horizon))
    }

    /// Transforms level values of `column` for the years right after the
    /// training sample.
    pub fn transform_future(&self, column: &str, levels: &[f64]) -> Result<Vec<f64>> {
        let anchor = self.anchor(column)?;
        match self.tag {
            TransformTag::Level => Ok(levels.to_vec()),
            TransformTag::Log => levels
                .iter()
                .map(|&v| {
                    if v > 0.0 {
                        Ok(v.ln())
                    } else {
                        Err(Error::InvalidArgument(format!(
                            "log transform of non-positive future value in `{column}`"
                        )))
                    }
                })
                .collect(),
            TransformTag::Diff1 => {
                let mut prev = anchor.last_level;
                Ok(levels
                    .iter()
                    .map(|&v| {
                        let d = v - prev;
                        prev = v;
                        d
                    })
                    .collect())
            }
            TransformTag::Hp => {
                let trend = self.trend_extension(column, levels.len())?;
                Ok(levels.iter().zip(trend).map(|(v, t)| v - t).collect())
            }
        }
    }

    /// Maps transformed forecasts of `column` back to levels.
    pub fn invert(&self, column: &str, transformed: &[f64]) -> Result<Vec<f64>> {
        let anchor = self.anchor(column)?;
        match self.tag {
            TransformTag::Level => Ok(transformed.to_vec()),
            TransformTag::Log => Ok(transformed.iter().map(|v| v.exp()).collect()),
            TransformTag::Diff1 => {
                let mut acc = anchor.last_level;
                Ok(transformed
                    .iter()
                    .map(|d| {
                        acc += d;
                        acc
                    })
                    .collect())
            }
            TransformTag::Hp => {
                let trend = self.trend_extension(column, transformed.len())?;
                Ok(transformed.iter().zip(trend).map(|(c, t)| c + t).collect())
            }
        }
    }

    /// Human-readable description of how forecasts are returned to level.
    pub fn inversion_rule(&self) -> String {
        match self.tag {
            TransformTag::Level => "none".into(),
            TransformTag::Log => "exp of the log forecast".into(),
            TransformTag::Diff1 => "cumulative sum from the last observed level".into(),
            TransformTag::Hp => format!(
                "HP cycle (lambda = {}) plus linear continuation of the last trend increment",
                self.hp_lambda.unwrap_or(f64::NAN)
            ),
        }
    }
}
