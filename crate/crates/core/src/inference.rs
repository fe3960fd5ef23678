//! Point estimates and confidence intervals for the autoregressive root
//! `delta_n` and the explosiveness exponent `gamma_n`.
//!
//! Below unity the intervals use Normal quantiles; above unity they use the
//! two-sided Cauchy quantile. `delta_hat^n` and `(1 + n^-gamma)^n` are
//! evaluated in log space.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::estimator::{fit_ar1, Window};
use crate::series::PriceSeries;

/// Distance from one inside which the root is reported as an exact unit root.
pub const UNIT_ROOT_GUARD: f64 = 1e-8;

/// Standard Normal quantile, Wichura's AS 241 (PPND16); relative accuracy
/// about 1e-16 over the open unit interval.
#[allow(clippy::excessive_precision)]
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("probability must lie in (0, 1), got {p}")));
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        let num = (((((((2509.0809287301226727 * r + 33430.575583588128105) * r
            + 67265.770927008700853)
            * r
            + 45921.953931549871457)
            * r
            + 13731.693765509461125)
            * r
            + 1971.5909503065514427)
            * r
            + 133.14166789178437745)
            * r
            + 3.387132872796366608)
            * q;
        let den = ((((((5226.495278852545925 * r + 28729.085735721942674) * r
            + 39307.89580009271061)
            * r
            + 21213.794301586595867)
            * r
            + 5394.1960214247511077)
            * r
            + 687.1870074920579083)
            * r
            + 42.313330701600911252)
            * r
            + 1.0;
        return Ok(num / den);
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let mut r = (-tail.ln()).sqrt();
    let val = if r <= 5.0 {
        r -= 1.6;
        let num = ((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r
            + 0.24178072517745061177)
            * r
            + 1.27045825245236838258)
            * r
            + 3.64784832476320460504)
            * r
            + 5.7694972214606914055)
            * r
            + 4.6303378461565452959)
            * r
            + 1.42343711074968357734;
        let den = ((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r
            + 0.0151986665636164571966)
            * r
            + 0.14810397642748007459)
            * r
            + 0.68976733498510000455)
            * r
            + 1.6763848301838038494)
            * r
            + 2.05319162663775882187)
            * r
            + 1.0;
        num / den
    } else {
        r -= 5.0;
        let num = ((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r
            + 0.0012426609473880784386)
            * r
            + 0.026532189526576123093)
            * r
            + 0.29656057182850489123)
            * r
            + 1.7848265399172913358)
            * r
            + 5.4637849111641143699)
            * r
            + 6.6579046435011037772;
        let den = ((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r
            + 1.8463183175100546818e-5)
            * r
            + 7.868691311456132591e-4)
            * r
            + 0.0148753612908506148525)
            * r
            + 0.13692988092273580531)
            * r
            + 0.59983220655588793769)
            * r
            + 1.0;
        num / den
    };
    Ok(if q < 0.0 { -val } else { val })
}

/// Standard Cauchy quantile `tan(pi (p - 1/2))`.
pub fn cauchy_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("probability must lie in (0, 1), got {p}")));
    }
    Ok((PI * (p - 0.5)).tan())
}

/// `-ln|delta_hat - 1| / ln n`.
pub fn gamma_hat(delta_hat: f64, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain(format!("sample size must be at least 2, got {n}")));
    }
    if delta_hat == 1.0 {
        return Err(Error::ExactUnitRoot);
    }
    Ok(-(delta_hat - 1.0).abs().ln() / (n as f64).ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    SubUnity,
    Explosive,
}

/// Position of the root interval relative to one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExplosivenessClass {
    Explosive,
    NonExplosive,
    Inconclusive,
}

impl std::fmt::Display for ExplosivenessClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ExplosivenessClass::Explosive => "explosive",
            ExplosivenessClass::NonExplosive => "non-explosive",
            ExplosivenessClass::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootInference {
    pub delta_hat: f64,
    pub gamma_hat: f64,
    pub ci_delta: (f64, f64),
    pub ci_gamma: (f64, f64),
    pub regime: Regime,
    pub level: f64,
    pub n: usize,
}

impl RootInference {
    pub fn classify(&self) -> ExplosivenessClass {
        if self.ci_delta.0 > 1.0 {
            ExplosivenessClass::Explosive
        } else if self.ci_delta.1 < 1.0 {
            ExplosivenessClass::NonExplosive
        } else {
            ExplosivenessClass::Inconclusive
        }
    }

    pub fn delta_half_width(&self) -> f64 {
        0.5 * (self.ci_delta.1 - self.ci_delta.0)
    }
}

/// Intervals at level `level` for a given root estimate and sample size.
pub fn root_intervals(delta_hat: f64, n: usize, level: f64) -> Result<RootInference> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Domain(format!("confidence level must lie in (0, 1), got {level}")));
    }
    if (delta_hat - 1.0).abs() < UNIT_ROOT_GUARD {
        return Err(Error::ExactUnitRoot);
    }
    let g = gamma_hat(delta_hat, n)?;
    let nf = n as f64;
    let ln_n = nf.ln();
    let p = (1.0 + level) / 2.0;
    let (regime, hw_delta, hw_gamma) = if delta_hat < 1.0 {
        let c = normal_quantile(p)?;
        (
            Regime::SubUnity,
            c * 2.0 / nf.powf((1.0 + g) / 2.0),
            c * 2f64.sqrt() / (nf.powf((1.0 - g) / 2.0) * ln_n),
        )
    } else {
        let c = cauchy_quantile(p)?;
        // n^g * delta^n and (1 + n^-g)^n in logs
        let log_scale = g * ln_n + nf * delta_hat.ln();
        let log_growth = nf * nf.powf(-g).ln_1p();
        (
            Regime::Explosive,
            c * 2.0 * (-log_scale).exp(),
            c * 2.0 * (-log_growth).exp() / ln_n,
        )
    };
    Ok(RootInference {
        delta_hat,
        gamma_hat: g,
        ci_delta: (delta_hat - hw_delta, delta_hat + hw_delta),
        ci_gamma: (g - hw_gamma, g + hw_gamma),
        regime,
        level,
        n,
    })
}

/// Full-sample AR(1) fit with intercept followed by [`root_intervals`].
pub fn infer_root(series: &PriceSeries, level: f64) -> Result<RootInference> {
    let window = Window::full(series.values())?;
    let fit = fit_ar1(&window)?;
    root_intervals(fit.delta_hat, window.tau(), level)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cauchy_quantiles() {
        let c = cauchy_quantile(0.975).unwrap();
        assert!((c - 12.706204736174707).abs() < 1e-9);
        assert_eq!(format!("{c:.4}"), "12.7062");
        assert!(cauchy_quantile(0.5).unwrap().abs() < 1e-15);
        assert!(cauchy_quantile(1.0).is_err());
        assert!(cauchy_quantile(0.0).is_err());
    }

    #[test]
    fn normal_quantile_known_values() {
        assert!((normal_quantile(0.975).unwrap() - 1.959963984540054).abs() < 1e-12);
        assert_eq!(normal_quantile(0.5).unwrap(), 0.0);
        assert!((normal_quantile(0.05).unwrap() + 1.6448536269514729).abs() < 1e-12);
        assert!((normal_quantile(1e-10).unwrap() + 6.361340902404056).abs() < 1e-9);
        assert!(normal_quantile(-0.1).is_err());
    }

    #[test]
    fn gamma_hat_examples() {
        assert!((gamma_hat(1.01, 100).unwrap() - 1.0).abs() < 1e-12);
        assert!((gamma_hat(1.1, 100).unwrap() - 0.5).abs() < 1e-12);
        assert!((gamma_hat(0.9, 100).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(gamma_hat(1.0, 100).unwrap_err(), Error::ExactUnitRoot);
    }

    #[test]
    fn explosive_interval_uses_cauchy_scale() {
        let inf = root_intervals(1.1, 100, 0.95).unwrap();
        assert_eq!(inf.regime, Regime::Explosive);
        assert!((inf.gamma_hat - 0.5).abs() < 1e-12);
        // 12.7062 * 2 / (10 * 1.1^100), 1.1^100 = 13780.61234
        let expected = 12.706204736174707 * 2.0 / (10.0 * 13780.612339822379);
        assert!((inf.delta_half_width() / expected - 1.0).abs() < 1e-9);
        assert!((inf.delta_half_width() - 1.844e-4).abs() < 1e-7);
        assert!((inf.ci_delta.0 - 1.09982).abs() < 1e-5);
        assert!((inf.ci_delta.1 - 1.10018).abs() < 1e-5);
        assert_eq!(inf.classify(), ExplosivenessClass::Explosive);
    }

    #[test]
    fn sub_unity_interval_uses_normal_scale() {
        let inf = root_intervals(0.99, 100, 0.95).unwrap();
        assert_eq!(inf.regime, Regime::SubUnity);
        assert!((inf.gamma_hat - 1.0).abs() < 1e-12);
        assert!((inf.delta_half_width() - 1.959964 * 2.0 / 100.0).abs() < 1e-6);
        assert!((inf.delta_half_width() - 0.0392).abs() < 1e-4);
        // 0.99 +/- 0.0392 straddles one
        assert_eq!(inf.classify(), ExplosivenessClass::Inconclusive);
        let low = root_intervals(0.5, 100, 0.95).unwrap();
        assert_eq!(low.classify(), ExplosivenessClass::NonExplosive);
    }

    #[test]
    fn intervals_are_centred() {
        for &(d, n) in &[(1.02, 500usize), (0.97, 300), (1.3, 50)] {
            let inf = root_intervals(d, n, 0.9).unwrap();
            assert!(((inf.ci_delta.0 + inf.ci_delta.1) / 2.0 - d).abs() < 1e-12);
            assert!(((inf.ci_gamma.0 + inf.ci_gamma.1) / 2.0 - inf.gamma_hat).abs() < 1e-12);
            assert!(inf.ci_delta.0 <= d && d <= inf.ci_delta.1);
        }
    }

    #[test]
    fn explosive_half_width_shrinks_with_n() {
        let mut prev = f64::INFINITY;
        for n in [50usize, 100, 200, 400, 800, 1600] {
            let hw = root_intervals(1.01, n, 0.95).unwrap().delta_half_width();
            assert!(hw < prev, "n={n}");
            prev = hw;
        }
    }

    #[test]
    fn huge_samples_do_not_overflow() {
        let inf = root_intervals(1.2, 100_000, 0.95).unwrap();
        assert!(inf.ci_delta.0.is_finite() && inf.ci_delta.1.is_finite());
        assert_eq!(inf.delta_half_width(), 0.0);
    }

    #[test]
    fn guards_near_unit_root() {
        assert_eq!(
            root_intervals(1.0 + 1e-9, 100, 0.95).unwrap_err(),
            Error::ExactUnitRoot
        );
        assert!(root_intervals(1.05, 100, 1.0).is_err());
    }
}
