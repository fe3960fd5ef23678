//! Benchmark fixtures.

use bubblestamp_core::dgp::{simulate, DgpSpec};
use bubblestamp_core::svadf::stat_at;
use bubblestamp_core::{BubbleSpec, PriceSeries, RecursiveConfig, Result, VolSpec};

/// Bubble path with log-AR(1) volatility, the typical analysis input.
pub fn bubble_series(n: usize, seed: u64) -> PriceSeries {
    let bubble = BubbleSpec::new(0.4, 0.6, 1.0, 0.5).expect("valid bubble");
    simulate(&DgpSpec::bubble(n, bubble, VolSpec::log_ar1(0.5), seed)).expect("valid design")
}

/// Statistic path refitted from scratch in every window.
pub fn batch_path(series: &PriceSeries, cfg: &RecursiveConfig) -> Result<Vec<f64>> {
    let n = series.sample_size();
    (cfg.start_tau(n)?..=n)
        .map(|tau| stat_at(series, tau, cfg.variant))
        .collect()
}
