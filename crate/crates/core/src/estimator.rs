//! Least-squares fits for the (augmented) Dickey-Fuller regression.
//!
//! All fits regress `X_t` on an intercept and `X_{t-1}` (plus lagged
//! differences for the augmented form) over a window `X_0, ..., X_tau`.
//! [`RecursiveAr1`] carries the same fit forward one observation at a time.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::inference::normal_quantile;
use crate::stats::KahanSum;

/// Fewest regression observations accepted for a fit.
pub const MIN_WINDOW: usize = 8;

/// Relative size below which the lagged level is treated as constant.
const FLAT_TOLERANCE: f64 = 1e-12;

/// Expanding window `X_0, ..., X_tau` starting at the first observation.
#[derive(Debug, Clone, Copy)]
pub struct Window<'a> {
    levels: &'a [f64],
}

impl<'a> Window<'a> {
    /// Window holding `tau` regression observations, i.e. `values[..=tau]`.
    pub fn new(values: &'a [f64], tau: usize) -> Result<Self> {
        if tau < MIN_WINDOW {
            return Err(Error::WindowTooShort {
                needed: MIN_WINDOW,
                got: tau,
            });
        }
        if tau >= values.len() {
            return Err(Error::WindowTooShort {
                needed: tau + 1,
                got: values.len(),
            });
        }
        Ok(Self {
            levels: &values[..=tau],
        })
    }

    /// Whole series as one window.
    pub fn full(values: &'a [f64]) -> Result<Self> {
        Self::new(values, values.len().saturating_sub(1))
    }

    pub fn tau(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn levels(&self) -> &'a [f64] {
        self.levels
    }

    /// `X_0, ..., X_{tau-1}`.
    pub fn lagged(&self) -> &'a [f64] {
        &self.levels[..self.levels.len() - 1]
    }

    /// `X_1, ..., X_tau`.
    pub fn current(&self) -> &'a [f64] {
        &self.levels[1..]
    }
}

/// Deviations of `block` from its mean.
pub fn demeaned(block: &[f64]) -> Vec<f64> {
    if block.is_empty() {
        return Vec::new();
    }
    let m = block.iter().copied().collect::<KahanSum>().value() / block.len() as f64;
    block.iter().map(|x| x - m).collect()
}

/// Demeaned lagged levels `X~_{j-1}`, `j = 1..tau`.
pub fn demean(window: &Window<'_>) -> Vec<f64> {
    demeaned(window.lagged())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ar1Fit {
    pub delta_hat: f64,
    pub mu_hat: f64,
    /// `sum X~_{j-1}^2`
    pub sum_sq_demeaned: f64,
    /// Residual sum of squares divided by the number of residuals.
    pub sigma_hat_sq: f64,
    pub n_obs: usize,
}

fn is_flat(sxx: f64, n: usize, scale: f64) -> bool {
    let floor = FLAT_TOLERANCE * scale;
    !(sxx > 0.0) || sxx <= n as f64 * floor * floor
}

fn max_abs(xs: &[f64]) -> f64 {
    xs.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// OLS of `X_j` on `(1, X_{j-1})` over the window.
pub fn fit_ar1(window: &Window<'_>) -> Result<Ar1Fit> {
    let z = window.lagged();
    let y = window.current();
    let n = z.len();
    let nf = n as f64;
    let mz = z.iter().copied().collect::<KahanSum>().value() / nf;
    let my = y.iter().copied().collect::<KahanSum>().value() / nf;
    let mut sxx = KahanSum::new();
    let mut sxy = KahanSum::new();
    for (a, b) in z.iter().zip(y) {
        let dz = a - mz;
        sxx.add(dz * dz);
        sxy.add(dz * (b - my));
    }
    let sxx = sxx.value();
    if is_flat(sxx, n, max_abs(z)) {
        return Err(Error::DegenerateRegressor);
    }
    let delta_hat = sxy.value() / sxx;
    let rss = z
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let u = (b - my) - delta_hat * (a - mz);
            u * u
        })
        .collect::<KahanSum>()
        .value();
    Ok(Ar1Fit {
        delta_hat,
        mu_hat: my - delta_hat * mz,
        sum_sq_demeaned: sxx,
        sigma_hat_sq: rss / nf,
        n_obs: n,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdfFit {
    pub delta_hat: f64,
    pub mu_hat: f64,
    /// Coefficients on `Delta X_{t-1}, ..., Delta X_{t-L}`.
    pub phi: Vec<f64>,
    pub lag_order: usize,
    /// t-ratios of `phi`, using the degrees-of-freedom corrected residual variance.
    pub t_stats: Vec<f64>,
    pub sigma_hat_sq: f64,
    pub sum_sq_demeaned: f64,
    pub n_obs: usize,
}

impl From<Ar1Fit> for AdfFit {
    fn from(f: Ar1Fit) -> Self {
        AdfFit {
            delta_hat: f.delta_hat,
            mu_hat: f.mu_hat,
            phi: Vec::new(),
            lag_order: 0,
            t_stats: Vec::new(),
            sigma_hat_sq: f.sigma_hat_sq,
            sum_sq_demeaned: f.sum_sq_demeaned,
            n_obs: f.n_obs,
        }
    }
}

/// Design of the augmented regression: rows `t = L+1..=tau`, columns
/// `(X_{t-1}, Delta X_{t-1}, ..., Delta X_{t-L})` without the intercept,
/// and the response `X_t`.
pub(crate) fn adf_design(levels: &[f64], lag_order: usize) -> (DMatrix<f64>, DVector<f64>) {
    let tau = levels.len() - 1;
    let rows = tau - lag_order;
    let cols = 1 + lag_order;
    let x = DMatrix::from_fn(rows, cols, |i, j| {
        let t = i + lag_order + 1;
        if j == 0 {
            levels[t - 1]
        } else {
            levels[t - j] - levels[t - j - 1]
        }
    });
    let y = DVector::from_fn(rows, |i, _| levels[i + lag_order + 1]);
    (x, y)
}

/// Least squares with intercept via Householder QR on the column-centred design.
pub(crate) fn ols_with_intercept(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<QrSolution> {
    let (rows, cols) = x.shape();
    let nf = rows as f64;
    let col_means: Vec<f64> = (0..cols)
        .map(|j| x.column(j).iter().copied().collect::<KahanSum>().value() / nf)
        .collect();
    let y_mean = y.iter().copied().collect::<KahanSum>().value() / nf;
    let xc = DMatrix::from_fn(rows, cols, |i, j| x[(i, j)] - col_means[j]);
    let yc = DVector::from_fn(rows, |i, _| y[i] - y_mean);

    let qr = xc.clone().qr();
    let r = qr.r();
    let diag_max = (0..cols).fold(0.0_f64, |m, j| m.max(r[(j, j)].abs()));
    if diag_max == 0.0 || (0..cols).any(|j| r[(j, j)].abs() <= 1e-12 * diag_max) {
        return Err(Error::SingularDesign);
    }
    let mut qty = yc.clone();
    qr.q_tr_mul(&mut qty);
    let qty_head = qty.rows(0, cols).into_owned();
    let beta = r
        .solve_upper_triangular(&qty_head)
        .ok_or(Error::SingularDesign)?;
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(cols, cols))
        .ok_or(Error::SingularDesign)?;
    // diag((R'R)^-1) = squared row norms of R^-1
    let inv_diag: Vec<f64> = (0..cols).map(|j| r_inv.row(j).norm_squared()).collect();
    let resid = &yc - &xc * &beta;
    let rss = resid.iter().map(|u| u * u).collect::<KahanSum>().value();
    let intercept = y_mean - (0..cols).map(|j| beta[j] * col_means[j]).sum::<f64>();
    let sxx0 = xc.column(0).iter().map(|v| v * v).collect::<KahanSum>().value();
    Ok(QrSolution {
        beta: beta.iter().copied().collect(),
        intercept,
        inv_diag,
        rss,
        rows,
        sum_sq_first: sxx0,
    })
}

#[derive(Debug, Clone)]
pub(crate) struct QrSolution {
    pub beta: Vec<f64>,
    pub intercept: f64,
    pub inv_diag: Vec<f64>,
    pub rss: f64,
    pub rows: usize,
    pub sum_sq_first: f64,
}

pub(crate) fn fit_adf_qr(window: &Window<'_>, lag_order: usize) -> Result<AdfFit> {
    let tau = window.tau();
    if tau < MIN_WINDOW + lag_order {
        return Err(Error::WindowTooShort {
            needed: MIN_WINDOW + lag_order,
            got: tau,
        });
    }
    let levels = window.levels();
    if is_flat(
        crate::stats::sum(demeaned(&levels[lag_order..tau]).iter().map(|v| v * v)),
        tau - lag_order,
        max_abs(&levels[lag_order..tau]),
    ) {
        return Err(Error::DegenerateRegressor);
    }
    let (x, y) = adf_design(levels, lag_order);
    let sol = ols_with_intercept(&x, &y)?;
    let p = lag_order + 2;
    let dof = sol.rows.saturating_sub(p).max(1) as f64;
    let s2 = sol.rss / dof;
    let phi: Vec<f64> = sol.beta[1..].to_vec();
    let t_stats = (1..=lag_order)
        .map(|j| sol.beta[j] / (s2 * sol.inv_diag[j]).sqrt())
        .collect();
    Ok(AdfFit {
        delta_hat: sol.beta[0],
        mu_hat: sol.intercept,
        phi,
        lag_order,
        t_stats,
        sigma_hat_sq: sol.rss / sol.rows as f64,
        sum_sq_demeaned: sol.sum_sq_first,
        n_obs: sol.rows,
    })
}

/// Augmented regression of `X_t` on `(1, X_{t-1}, Delta X_{t-1}, ..., Delta X_{t-L})`
/// over `t = L+1..=tau`. With `L = 0` this is exactly [`fit_ar1`].
pub fn fit_adf(window: &Window<'_>, lag_order: usize) -> Result<AdfFit> {
    if lag_order == 0 {
        return fit_ar1(window).map(AdfFit::from);
    }
    fit_adf_qr(window, lag_order)
}

/// General-to-specific lag selection: start at `l_max` and drop the last lag
/// while its two-sided t-test is insignificant at `sig_level` (Normal
/// reference distribution).
pub fn select_lag(window: &Window<'_>, l_max: usize, sig_level: f64) -> Result<usize> {
    if !(sig_level > 0.0 && sig_level < 1.0) {
        return Err(Error::Domain(format!(
            "significance level must lie in (0, 1), got {sig_level}"
        )));
    }
    let crit = normal_quantile(1.0 - sig_level / 2.0)?;
    let mut lag = l_max;
    while lag > 0 {
        let fit = fit_adf(window, lag)?;
        if fit.t_stats[lag - 1].abs() >= crit {
            break;
        }
        lag -= 1;
    }
    Ok(lag)
}

/// Expanding-window AR(1) fit with intercept, updated in O(1) per observation.
///
/// Means and centred cross-products follow Welford's updates; the residual
/// sum of squares accumulates the recursive-least-squares increment
/// `w e^2 / (1 + w dz^2 / Szz)` with `w = m / (m + 1)`, where `e` is the
/// prediction error of the current fit, so it never suffers the
/// `Syy - Szy^2 / Szz` cancellation.
#[derive(Debug, Clone, Default)]
pub struct RecursiveAr1 {
    count: usize,
    mean_z: f64,
    mean_y: f64,
    szz: f64,
    szy: f64,
    syy: f64,
    rss: f64,
    scale: f64,
}

impl RecursiveAr1 {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds the pair `(X_{t-1}, X_t)`.
    pub fn push(&mut self, z: f64, y: f64) {
        self.scale = self.scale.max(z.abs());
        if self.count == 0 {
            self.count = 1;
            self.mean_z = z;
            self.mean_y = y;
            return;
        }
        let m = self.count as f64;
        let k = m + 1.0;
        let w = m / k;
        let dz = z - self.mean_z;
        let dy = y - self.mean_y;
        if self.szz > 0.0 {
            let b = self.szy / self.szz;
            let e = dy - b * dz;
            self.rss += w * e * e / (1.0 + w * dz * dz / self.szz);
        } else {
            // every earlier regressor equal: the new line passes through
            // the new point and the old mean response
            self.rss = self.syy;
        }
        self.szz += w * dz * dz;
        self.szy += w * dz * dy;
        self.syy += w * dy * dy;
        self.mean_z += dz / k;
        self.mean_y += dy / k;
        self.count += 1;
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn is_degenerate(&self) -> bool {
        is_flat(self.szz, self.count, self.scale)
    }

    pub fn fit(&self) -> Option<Ar1Fit> {
        if self.count < 2 || self.is_degenerate() {
            return None;
        }
        let delta_hat = self.szy / self.szz;
        Some(Ar1Fit {
            delta_hat,
            mu_hat: self.mean_y - delta_hat * self.mean_z,
            sum_sq_demeaned: self.szz,
            sigma_hat_sq: self.rss.max(0.0) / self.count as f64,
            n_obs: self.count,
        })
    }
}
