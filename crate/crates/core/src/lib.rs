//! Recursive explosive-root testing and bubble date-stamping for price series
//! with persistent, time-varying volatility.
//!
//! The crate is organised bottom-up:
//!
//! - [`dgp`] simulates the unit-root null, single-bubble alternatives and the
//!   re-initialisation model under constant, log-AR(1) and GARCH volatility.
//! - [`estimator`] holds the least-squares machinery, including the O(1)
//!   expanding-window recursion.
//! - [`svadf`] evaluates the coefficient and t-type statistics along the
//!   forward recursion.
//! - [`dating`] turns a statistic path into origination/collapse dates.
//! - [`inference`] builds confidence intervals for the root and its exponent.
//! - [`calibration`] and [`experiments`] are the Monte Carlo engines.

pub mod calibration;
pub mod dating;
pub mod dgp;
mod error;
pub mod estimator;
pub mod experiments;
pub mod inference;
pub mod rng;
pub mod series;
pub mod stats;
pub mod svadf;

pub use calibration::{CalibrationTable, Hypothesis};
pub use dating::{Episode, PersistenceFilter, ThresholdRule};
pub use dgp::{BubbleSpec, DgpSpec, Persistence, VolSpec};
pub use error::{Error, Result};
pub use inference::{ExplosivenessClass, Regime, RootInference};
pub use series::PriceSeries;
pub use svadf::{LagSpec, RecursiveConfig, StatPath, Variant};
