//! Date-stamping of bubble origination and collapse from a statistic path.
//!
//! Origination is the first window whose statistic exceeds the origination
//! boundary (and stays there per the [`PersistenceFilter`]); collapse is
//! searched only after origination plus a `ceil(ln n)` buffer, as the first
//! window below the collapse boundary. The PWY baseline uses one boundary for
//! both margins with neither buffer nor filter.

use std::fmt;
use std::io;
use std::sync::Arc;

use chrono::NaiveDate;
use serde::Serialize;

use crate::calibration::CalibrationTable;
use crate::error::{Error, Result};
use crate::series::PriceSeries;
use crate::svadf::StatPath;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tail {
    /// Upper quantile under the unit-root null (origination).
    Right,
    /// Lower quantile under the bubble alternative (collapse).
    Left,
}

#[derive(Debug, Clone)]
pub enum ThresholdKind {
    /// `ln(n s) / divisor`
    LogRule { divisor: f64 },
    Calibrated(Arc<CalibrationTable>),
    Fixed(f64),
}

#[derive(Debug, Clone)]
pub struct ThresholdRule {
    pub kind: ThresholdKind,
    pub side: Tail,
}

impl ThresholdRule {
    pub fn log_rule(divisor: f64, side: Tail) -> Result<Self> {
        if !(divisor > 0.0 && divisor.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "log-rule divisor must be positive, got {divisor}"
            )));
        }
        Ok(Self {
            kind: ThresholdKind::LogRule { divisor },
            side,
        })
    }

    /// `ln(n s) / 10`
    pub fn origination_default() -> Self {
        Self {
            kind: ThresholdKind::LogRule { divisor: 10.0 },
            side: Tail::Right,
        }
    }

    /// `ln(n s) / 2`
    pub fn collapse_default() -> Self {
        Self {
            kind: ThresholdKind::LogRule { divisor: 2.0 },
            side: Tail::Left,
        }
    }

    pub fn fixed(value: f64, side: Tail) -> Self {
        Self {
            kind: ThresholdKind::Fixed(value),
            side,
        }
    }

    pub fn calibrated(table: Arc<CalibrationTable>, side: Tail) -> Self {
        Self {
            kind: ThresholdKind::Calibrated(table),
            side,
        }
    }

    /// Boundary for the window of `n s` observations out of `n`.
    pub fn value(&self, n: usize, s: f64) -> Result<f64> {
        threshold_value(self, n, s)
    }

    pub fn describe(&self) -> String {
        match &self.kind {
            ThresholdKind::LogRule { divisor } => format!("log(ns)/{divisor}"),
            ThresholdKind::Calibrated(t) => format!(
                "calibrated q={} ({:?}, B={})",
                t.quantile_level, t.hypothesis, t.replications
            ),
            ThresholdKind::Fixed(v) => format!("fixed {v}"),
        }
    }
}

pub fn threshold_value(rule: &ThresholdRule, n: usize, s: f64) -> Result<f64> {
    let size = n as f64 * s;
    if !(size >= 2.0) {
        return Err(Error::Domain(format!(
            "threshold needs at least 2 observations, got n*s = {size}"
        )));
    }
    Ok(match &rule.kind {
        ThresholdKind::LogRule { divisor } => size.ln() / divisor,
        ThresholdKind::Calibrated(table) => table.value_at(size),
        ThresholdKind::Fixed(v) => *v,
    })
}

/// Minimum run lengths, in observations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PersistenceFilter {
    /// Observations the statistic must stay above the origination boundary,
    /// counting the crossing itself.
    pub min_above: usize,
    /// Observations it must stay below the collapse boundary.
    pub min_below: usize,
    /// Longest run of consecutive dips tolerated inside `min_above`.
    pub consolidation_gap: usize,
}

/// Trading days per calendar month for daily data.
pub const TRADING_DAYS_PER_MONTH: usize = 21;

impl PersistenceFilter {
    /// Raw first crossings.
    pub fn none() -> Self {
        Self::default()
    }

    /// Two months above, one month below, five-day consolidation, for daily data.
    pub fn daily() -> Self {
        Self::calendar_months(2.0, 1.0, 5)
    }

    pub fn calendar_months(above: f64, below: f64, gap_days: usize) -> Self {
        let days = |m: f64| (m * TRADING_DAYS_PER_MONTH as f64).round() as usize;
        Self {
            min_above: days(above),
            min_below: days(below),
            consolidation_gap: gap_days,
        }
    }

    /// Durations as fractions of the sample size (rounded up).
    pub fn proportional(n: usize, above: f64, below: f64, gap: usize) -> Self {
        let obs = |f: f64| (n as f64 * f).ceil() as usize;
        Self {
            min_above: obs(above),
            min_below: obs(below),
            consolidation_gap: gap,
        }
    }

    /// Default for simulated samples: 4% of the sample above, 2% below, no dips.
    pub fn simulation(n: usize) -> Self {
        Self::proportional(n, SIM_ABOVE_FRACTION, SIM_BELOW_FRACTION, 0)
    }
}

pub const SIM_ABOVE_FRACTION: f64 = 0.04;
pub const SIM_BELOW_FRACTION: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Episode {
    pub r_e_hat: f64,
    /// Absent while the episode is ongoing at the end of the sample.
    pub r_f_hat: Option<f64>,
    /// Window end `tau` at origination.
    pub origin_index: usize,
    pub collapse_index: Option<usize>,
    pub origin_date: Option<NaiveDate>,
    pub collapse_date: Option<NaiveDate>,
    /// Largest statistic between origination and collapse (or sample end).
    pub max_stat: f64,
    pub ongoing: bool,
}

impl Episode {
    /// Attaches calendar dates from the analysed series.
    pub fn with_dates(mut self, series: &PriceSeries) -> Self {
        self.origin_date = series.date_at(self.origin_index);
        self.collapse_date = self.collapse_index.and_then(|i| series.date_at(i));
        self
    }
}

impl fmt::Display for Episode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "origination r={:.4} (tau={}", self.r_e_hat, self.origin_index)?;
        if let Some(d) = self.origin_date {
            write!(f, ", {d}")?;
        }
        write!(f, ")")?;
        match (self.r_f_hat, self.collapse_index) {
            (Some(r), Some(i)) => {
                write!(f, "; collapse r={r:.4} (tau={i}")?;
                if let Some(d) = self.collapse_date {
                    write!(f, ", {d}")?;
                }
                write!(f, ")")?;
            }
            _ => write!(f, "; ongoing at sample end")?,
        }
        write!(f, "; max statistic {:.4}", self.max_stat)
    }
}

fn boundaries(path: &StatPath, rule: &ThresholdRule) -> Result<Vec<f64>> {
    (0..path.len())
        .map(|i| rule.value(path.n, path.fraction_at(i)))
        .collect()
}

fn first_persistent_above(above: &[bool], from: usize, min_len: usize, gap: usize) -> Option<usize> {
    let len = min_len.max(1);
    (from..above.len()).find(|&i| {
        if !above[i] || i + len > above.len() {
            return false;
        }
        let mut dip = 0;
        for &a in &above[i..i + len] {
            dip = if a { 0 } else { dip + 1 };
            if dip > gap {
                return false;
            }
        }
        true
    })
}

/// Runs cut short by the end of the sample qualify when they hold to the end.
fn first_persistent_below(below: &[bool], from: usize, min_len: usize) -> Option<usize> {
    let len = min_len.max(1);
    (from..below.len()).find(|&j| {
        let end = (j + len).min(below.len());
        below[j..end].iter().all(|&b| b)
    })
}

fn max_over(values: &[f64]) -> f64 {
    values
        .iter()
        .copied()
        .filter(|v| !v.is_nan())
        .fold(f64::NEG_INFINITY, f64::max)
}

fn episode(path: &StatPath, origin: usize, collapse: Option<usize>) -> Episode {
    let end = collapse.map_or(path.len(), |c| c + 1);
    Episode {
        r_e_hat: path.fraction_at(origin),
        r_f_hat: collapse.map(|c| path.fraction_at(c)),
        origin_index: path.tau_at(origin),
        collapse_index: collapse.map(|c| path.tau_at(c)),
        origin_date: None,
        collapse_date: None,
        max_stat: max_over(&path.values[origin..end]),
        ongoing: collapse.is_none(),
    }
}

/// Collapse search starts `ceil(ln n)` observations after origination.
pub fn collapse_buffer(n: usize) -> usize {
    (n as f64).ln().ceil() as usize
}

/// Asymmetric-threshold date-stamping. NaN entries never count as crossings.
pub fn datestamp(
    path: &StatPath,
    orig_rule: &ThresholdRule,
    coll_rule: &ThresholdRule,
    filter: &PersistenceFilter,
) -> Result<Option<Episode>> {
    let cv_o = boundaries(path, orig_rule)?;
    let above: Vec<bool> = path.values.iter().zip(&cv_o).map(|(s, c)| s > c).collect();
    let Some(origin) = first_persistent_above(&above, 0, filter.min_above, filter.consolidation_gap)
    else {
        return Ok(None);
    };
    let cv_c = boundaries(path, coll_rule)?;
    let below: Vec<bool> = path.values.iter().zip(&cv_c).map(|(s, c)| s < c).collect();
    let collapse = first_persistent_below(&below, origin + collapse_buffer(path.n), filter.min_below);
    Ok(Some(episode(path, origin, collapse)))
}

/// Single-threshold baseline: first crossing above, then first crossing back below.
pub fn datestamp_pwy(path: &StatPath, single_rule: &ThresholdRule) -> Result<Option<Episode>> {
    let cv = boundaries(path, single_rule)?;
    let Some(origin) = path.values.iter().zip(&cv).position(|(s, c)| s > c) else {
        return Ok(None);
    };
    let collapse = (origin + 1..path.len()).find(|&j| path.values[j] < cv[j]);
    Ok(Some(episode(path, origin, collapse)))
}

/// Flat episode record for CSV output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpisodeRecord {
    pub label: String,
    pub origin_date: Option<NaiveDate>,
    pub collapse_date: Option<NaiveDate>,
    pub r_e_hat: Option<f64>,
    pub r_f_hat: Option<f64>,
    pub ongoing: bool,
    pub max_stat: Option<f64>,
}

impl EpisodeRecord {
    pub fn new(label: impl Into<String>, episode: Option<&Episode>) -> Self {
        Self {
            label: label.into(),
            origin_date: episode.and_then(|e| e.origin_date),
            collapse_date: episode.and_then(|e| e.collapse_date),
            r_e_hat: episode.map(|e| e.r_e_hat),
            r_f_hat: episode.and_then(|e| e.r_f_hat),
            ongoing: episode.is_some_and(|e| e.ongoing),
            max_stat: episode.map(|e| e.max_stat),
        }
    }
}

pub fn write_episode_csv<W: io::Write>(out: W, records: &[EpisodeRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::InvalidSeries(format!("csv write failed: {e}"));
    for r in records {
        w.serialize(r).map_err(err)?;
    }
    if records.is_empty() {
        w.write_record([
            "label",
            "origin_date",
            "collapse_date",
            "r_e_hat",
            "r_f_hat",
            "ongoing",
            "max_stat",
        ])
        .map_err(err)?;
    }
    w.flush()
        .map_err(|e| Error::InvalidSeries(format!("csv write failed: {e}")))?;
    Ok(())
}
