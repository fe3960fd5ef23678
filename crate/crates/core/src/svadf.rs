//! Forward-recursive SV-ADF statistics.
//!
//! For each window `X_0..X_tau`, `tau = floor(n r0), ..., n`:
//!
//! - coefficient form: `tau * (delta_hat(tau) - 1)`
//! - t-type form: `sqrt(sum X~^2 / sigma_hat^2) * (delta_hat(tau) - 1)`
//!
//! With no lag augmentation the whole path costs O(n) through
//! [`RecursiveAr1`]. Windows whose lagged level is flat yield NaN.

use std::io;

use chrono::NaiveDate;
use rayon::prelude::*;

use crate::dating::ThresholdRule;
use crate::dgp::fraction_index;
use crate::error::{Error, Result};
use crate::estimator::{fit_adf, fit_ar1, select_lag, RecursiveAr1, Window, MIN_WINDOW};
use crate::series::PriceSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Coefficient,
    TType,
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::Coefficient => "coefficient",
            Variant::TType => "t",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "coefficient" | "coef" | "delta" => Ok(Variant::Coefficient),
            "t" | "ttype" | "t-type" => Ok(Variant::TType),
            other => Err(Error::InvalidSpec(format!(
                "unknown statistic variant '{other}' (expected coefficient or t)"
            ))),
        }
    }

    /// Statistic from a window fit with `tau` observations.
    pub fn evaluate(&self, tau: usize, delta_hat: f64, sum_sq_demeaned: f64, sigma_hat_sq: f64) -> f64 {
        match self {
            Variant::Coefficient => tau as f64 * (delta_hat - 1.0),
            Variant::TType => (sum_sq_demeaned / sigma_hat_sq).sqrt() * (delta_hat - 1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LagSpec {
    Fixed(usize),
    /// Sequential general-to-specific selection in every window.
    Auto { max_lag: usize, sig_level: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecursiveConfig {
    pub r0: f64,
    pub variant: Variant,
    pub lags: LagSpec,
}

impl Default for RecursiveConfig {
    fn default() -> Self {
        Self {
            r0: 0.1,
            variant: Variant::Coefficient,
            lags: LagSpec::Fixed(0),
        }
    }
}

impl RecursiveConfig {
    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    pub fn with_r0(mut self, r0: f64) -> Self {
        self.r0 = r0;
        self
    }

    fn min_window(&self) -> usize {
        MIN_WINDOW
            + match self.lags {
                LagSpec::Fixed(l) => l,
                LagSpec::Auto { max_lag, .. } => max_lag,
            }
    }

    /// First window size `floor(n r0)` for a sample of `n` observations.
    pub fn start_tau(&self, n: usize) -> Result<usize> {
        if !(self.r0 > 0.0 && self.r0 < 1.0) {
            return Err(Error::InvalidSpec(format!("r0 must lie in (0, 1), got {}", self.r0)));
        }
        let tau0 = fraction_index(n, self.r0);
        if tau0 < self.min_window() {
            return Err(Error::WindowTooShort {
                needed: self.min_window(),
                got: tau0,
            });
        }
        Ok(tau0)
    }
}

/// Statistic path over expanding windows, one value per observation.
#[derive(Debug, Clone, PartialEq)]
pub struct StatPath {
    /// `tau` of the first window.
    pub start_tau: usize,
    pub values: Vec<f64>,
    pub variant: Variant,
    /// Full sample size.
    pub n: usize,
}

impl StatPath {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn tau_at(&self, i: usize) -> usize {
        self.start_tau + i
    }

    pub fn fraction_at(&self, i: usize) -> f64 {
        self.tau_at(i) as f64 / self.n as f64
    }

    pub fn fractions(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.fraction_at(i)).collect()
    }

    /// Statistic for window size `tau`, if it lies on the path.
    pub fn value_at_tau(&self, tau: usize) -> Option<f64> {
        tau.checked_sub(self.start_tau).and_then(|i| self.values.get(i).copied())
    }

    pub fn last(&self) -> f64 {
        *self.values.last().expect("paths are never empty")
    }

    /// Writes `index,date,r,statistic[,cv_origination,cv_collapse]`.
    ///
    /// `index` is the window end `tau`; `date` is left empty for undated series.
    pub fn write_csv<W: io::Write>(
        &self,
        out: W,
        dates: Option<&[NaiveDate]>,
        thresholds: Option<(&ThresholdRule, &ThresholdRule)>,
    ) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io_err = |e: csv::Error| Error::InvalidSeries(format!("csv write failed: {e}"));
        let mut header = vec!["index", "date", "r", "statistic"];
        if thresholds.is_some() {
            header.extend(["cv_origination", "cv_collapse"]);
        }
        w.write_record(&header).map_err(io_err)?;
        for (i, v) in self.values.iter().enumerate() {
            let tau = self.tau_at(i);
            let s = self.fraction_at(i);
            let date = dates
                .and_then(|d| d.get(tau))
                .map(|d| d.to_string())
                .unwrap_or_default();
            let mut row = vec![tau.to_string(), date, s.to_string(), v.to_string()];
            if let Some((orig, coll)) = thresholds {
                row.push(orig.value(self.n, s)?.to_string());
                row.push(coll.value(self.n, s)?.to_string());
            }
            w.write_record(&row).map_err(io_err)?;
        }
        w.flush()
            .map_err(|e| Error::InvalidSeries(format!("csv write failed: {e}")))?;
        Ok(())
    }
}

/// Statistic for the window of the first `tau` observations (no lags).
pub fn stat_at(series: &PriceSeries, tau: usize, variant: Variant) -> Result<f64> {
    let window = Window::new(series.values(), tau)?;
    let fit = fit_ar1(&window)?;
    Ok(variant.evaluate(tau, fit.delta_hat, fit.sum_sq_demeaned, fit.sigma_hat_sq))
}

fn stat_with_lags(values: &[f64], tau: usize, variant: Variant, lags: LagSpec) -> Result<f64> {
    let window = Window::new(values, tau)?;
    let lag = match lags {
        LagSpec::Fixed(l) => l,
        LagSpec::Auto { max_lag, sig_level } => select_lag(&window, max_lag, sig_level)?,
    };
    let fit = fit_adf(&window, lag)?;
    Ok(variant.evaluate(tau, fit.delta_hat, fit.sum_sq_demeaned, fit.sigma_hat_sq))
}

/// Statistic at every window end `tau = floor(n r0), ..., n`.
pub fn recursive_path(series: &PriceSeries, cfg: &RecursiveConfig) -> Result<StatPath> {
    let n = series.sample_size();
    let start_tau = cfg.start_tau(n)?;
    let v = series.values();
    let values = match cfg.lags {
        LagSpec::Fixed(0) => {
            let mut rec = RecursiveAr1::new();
            let mut out = Vec::with_capacity(n - start_tau + 1);
            for tau in 1..=n {
                rec.push(v[tau - 1], v[tau]);
                if tau >= start_tau {
                    out.push(match rec.fit() {
                        Some(f) => cfg.variant.evaluate(
                            tau,
                            f.delta_hat,
                            f.sum_sq_demeaned,
                            f.sigma_hat_sq,
                        ),
                        None => f64::NAN,
                    });
                }
            }
            out
        }
        lags => (start_tau..=n)
            .into_par_iter()
            .map(|tau| match stat_with_lags(v, tau, cfg.variant, lags) {
                Ok(s) => Ok(s),
                Err(Error::DegenerateRegressor | Error::SingularDesign) => Ok(f64::NAN),
                Err(e) => Err(e),
            })
            .collect::<Result<Vec<f64>>>()?,
    };
    Ok(StatPath {
        start_tau,
        values,
        variant: cfg.variant,
        n,
    })
}
