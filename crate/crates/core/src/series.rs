use chrono::NaiveDate;

use crate::error::{Error, Result};

/// An observed or simulated price path.
///
/// `values[0]` is the pre-sample level `X_0`; the autoregression therefore
/// has `len() - 1` observations, reported by [`PriceSeries::sample_size`].
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    values: Vec<f64>,
    dates: Option<Vec<NaiveDate>>,
    label: String,
}

impl PriceSeries {
    pub fn new(values: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidSeries("series is empty".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSeries(format!(
                "non-finite value at position {i}"
            )));
        }
        Ok(Self {
            values,
            dates: None,
            label: label.into(),
        })
    }

    pub fn with_dates(
        values: Vec<f64>,
        dates: Vec<NaiveDate>,
        label: impl Into<String>,
    ) -> Result<Self> {
        let mut series = Self::new(values, label)?;
        if dates.len() != series.values.len() {
            return Err(Error::InvalidSeries(format!(
                "{} dates for {} values",
                dates.len(),
                series.values.len()
            )));
        }
        if let Some(w) = dates.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidSeries(format!(
                "dates not strictly increasing at position {}",
                w + 1
            )));
        }
        series.dates = Some(dates);
        Ok(series)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dates(&self) -> Option<&[NaiveDate]> {
        self.dates.as_deref()
    }

    pub fn date_at(&self, index: usize) -> Option<NaiveDate> {
        self.dates.as_ref().and_then(|d| d.get(index).copied())
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Number of autoregression observations, `n = len - 1`.
    pub fn sample_size(&self) -> usize {
        self.values.len().saturating_sub(1)
    }

    /// Natural logarithm of every value; fails on nonpositive prices.
    pub fn log_prices(&self) -> Result<Self> {
        if let Some(i) = self.values.iter().position(|&v| v <= 0.0) {
            return Err(Error::Domain(format!(
                "log of nonpositive price at position {i}"
            )));
        }
        Ok(self.map_values(f64::ln))
    }

    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            values: self.values.iter().map(|&v| f(v)).collect(),
            dates: self.dates.clone(),
            label: self.label.clone(),
        }
    }

    /// Leading sub-series `values[..=end]`.
    pub fn truncated(&self, end: usize) -> Self {
        let end = end.min(self.values.len() - 1);
        Self {
            values: self.values[..=end].to_vec(),
            dates: self.dates.as_ref().map(|d| d[..=end].to_vec()),
            label: self.label.clone(),
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }
}
