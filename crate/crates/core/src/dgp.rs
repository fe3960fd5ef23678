//! Data-generating processes: volatility paths, the unit-root null, the
//! single-bubble alternative and the re-initialisation (collapse-and-reset)
//! model used as the PWY comparison.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, standard_normal};
use crate::series::PriceSeries;

/// Smallest admissible simulated sample.
pub const MIN_SAMPLE: usize = 20;

/// Persistence of the log-variance AR(1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Persistence {
    /// `phi_n = 1 - 1 / ln ln max(n, 16)`: approaches one at an
    /// iterated-logarithmic rate.
    IteratedLog,
    Fixed(f64),
}

impl Persistence {
    pub fn resolve(&self, n: usize) -> f64 {
        match *self {
            Persistence::IteratedLog => {
                let n = n.max(16) as f64;
                1.0 - 1.0 / n.ln().ln()
            }
            Persistence::Fixed(phi) => phi,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VolSpec {
    Constant {
        sigma0: f64,
    },
    /// `log s_t^2 = phi * log s_{t-1}^2 + eta * z_t`, `log s_0^2 = 2 log sigma0`.
    LogAr1 {
        sigma0: f64,
        eta: f64,
        persistence: Persistence,
    },
    /// Zero-intercept GARCH(1,1): `s_t^2 = alpha_g u_{t-1}^2 + beta_g s_{t-1}^2`.
    Garch {
        sigma0: f64,
        alpha_g: f64,
        beta_g: f64,
    },
}

impl VolSpec {
    pub fn homoskedastic() -> Self {
        VolSpec::Constant { sigma0: 1.0 }
    }

    pub fn log_ar1(eta: f64) -> Self {
        VolSpec::LogAr1 {
            sigma0: 1.0,
            eta,
            persistence: Persistence::IteratedLog,
        }
    }

    pub fn garch(alpha_g: f64, beta_g: f64) -> Self {
        VolSpec::Garch {
            sigma0: 1.0,
            alpha_g,
            beta_g,
        }
    }

    pub fn with_sigma0(self, s: f64) -> Self {
        match self {
            VolSpec::Constant { .. } => VolSpec::Constant { sigma0: s },
            VolSpec::LogAr1 { eta, persistence, .. } => VolSpec::LogAr1 {
                sigma0: s,
                eta,
                persistence,
            },
            VolSpec::Garch { alpha_g, beta_g, .. } => VolSpec::Garch {
                sigma0: s,
                alpha_g,
                beta_g,
            },
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            VolSpec::Constant { .. } => "constant",
            VolSpec::LogAr1 { .. } => "logar1",
            VolSpec::Garch { .. } => "garch",
        }
    }

    /// Constant volatility may be zero (noiseless paths); the stochastic
    /// regimes need a strictly positive starting scale.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        match *self {
            VolSpec::Constant { sigma0 } => {
                if !(sigma0 >= 0.0 && sigma0.is_finite()) {
                    return bad(format!("constant volatility must be >= 0, got {sigma0}"));
                }
            }
            VolSpec::LogAr1 {
                sigma0,
                eta,
                persistence,
            } => {
                if !(sigma0 > 0.0 && sigma0.is_finite()) {
                    return bad(format!("sigma0 must be positive, got {sigma0}"));
                }
                if !(eta >= 0.0 && eta.is_finite()) {
                    return bad(format!("eta must be nonnegative, got {eta}"));
                }
                if let Persistence::Fixed(phi) = persistence {
                    if !(phi > 0.0 && phi <= 1.0) {
                        return bad(format!("log-volatility persistence must lie in (0, 1], got {phi}"));
                    }
                }
            }
            VolSpec::Garch {
                sigma0,
                alpha_g,
                beta_g,
            } => {
                if !(sigma0 > 0.0 && sigma0.is_finite()) {
                    return bad(format!("sigma0 must be positive, got {sigma0}"));
                }
                if !(alpha_g >= 0.0 && beta_g >= 0.0) {
                    return bad("GARCH coefficients must be nonnegative".into());
                }
                if alpha_g + beta_g >= 1.0 {
                    return bad(format!(
                        "GARCH requires alpha_g + beta_g < 1, got {}",
                        alpha_g + beta_g
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Mildly explosive episode `delta_n = 1 + c / n^alpha` on `[floor(n r_e), floor(n r_f)]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BubbleSpec {
    pub r_e: f64,
    pub r_f: f64,
    pub c: f64,
    pub alpha: f64,
}

impl BubbleSpec {
    pub fn new(r_e: f64, r_f: f64, c: f64, alpha: f64) -> Result<Self> {
        let b = Self { r_e, r_f, c, alpha };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_e > 0.0 && self.r_e < self.r_f && self.r_f <= 1.0) {
            return Err(Error::InvalidSpec(format!(
                "bubble window needs 0 < r_e < r_f <= 1, got r_e={} r_f={}",
                self.r_e, self.r_f
            )));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidSpec(format!("c must be positive, got {}", self.c)));
        }
        // alpha = 1 is allowed for local-to-unity experiments
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::InvalidSpec(format!(
                "alpha must lie in (0, 1], got {}",
                self.alpha
            )));
        }
        Ok(())
    }

    pub fn root(&self, n: usize) -> f64 {
        1.0 + self.c / (n as f64).powf(self.alpha)
    }

    /// `(tau_e, tau_f)` for sample size `n`.
    pub fn window(&self, n: usize) -> (usize, usize) {
        (fraction_index(n, self.r_e), fraction_index(n, self.r_f))
    }
}

/// `floor(n r)`, tolerant of representation error in `r` (0.29 * 100 is
/// 28.999999999999996 in binary).
pub fn fraction_index(n: usize, r: f64) -> usize {
    (n as f64 * r + 1e-9).floor() as usize
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DgpSpec {
    pub n: usize,
    pub bubble: Option<BubbleSpec>,
    pub vol: VolSpec,
    pub x0: f64,
    pub seed: u64,
}

impl DgpSpec {
    pub fn null(n: usize, vol: VolSpec, seed: u64) -> Self {
        Self {
            n,
            bubble: None,
            vol,
            x0: 0.0,
            seed,
        }
    }

    pub fn bubble(n: usize, bubble: BubbleSpec, vol: VolSpec, seed: u64) -> Self {
        Self {
            n,
            bubble: Some(bubble),
            vol,
            x0: 0.0,
            seed,
        }
    }

    /// `X_t = delta_n X_{t-1} + u_t` for every `t = 1..=n`.
    pub fn mildly_explosive(n: usize, c: f64, alpha: f64, vol: VolSpec, seed: u64) -> Result<Self> {
        if n < MIN_SAMPLE {
            return Err(Error::InvalidSpec(format!(
                "sample size must be at least {MIN_SAMPLE}, got {n}"
            )));
        }
        let bubble = BubbleSpec::new(1.0 / n as f64, 1.0, c, alpha)?;
        Ok(Self::bubble(n, bubble, vol, seed))
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_x0(mut self, x0: f64) -> Self {
        self.x0 = x0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < MIN_SAMPLE {
            return Err(Error::InvalidSpec(format!(
                "sample size must be at least {MIN_SAMPLE}, got {}",
                self.n
            )));
        }
        if !self.x0.is_finite() {
            return Err(Error::InvalidSpec("x0 must be finite".into()));
        }
        if let Some(b) = &self.bubble {
            b.validate()?;
        }
        self.vol.validate()
    }
}

/// Volatility path together with the standard normal draws it scales.
#[derive(Debug, Clone)]
pub(crate) struct Shocks {
    pub sigma: Vec<f64>,
    pub eps: Vec<f64>,
}

impl Shocks {
    pub fn innovation(&self, t: usize) -> f64 {
        self.sigma[t] * self.eps[t]
    }
}

/// Draws `sigma_1..sigma_n` and `eps_1..eps_n` in one pass.
///
/// Per step the log-AR(1) regime draws its volatility shock before `eps_t`.
/// GARCH computes `sigma_t` from `(u_{t-1}, sigma_{t-1})` before drawing
/// `eps_t`, starting from a presample `u_0 = sigma0 * eps_0`.
pub(crate) fn draw_shocks<R: Rng + ?Sized>(vol: &VolSpec, n: usize, rng: &mut R) -> Shocks {
    let mut sigma = Vec::with_capacity(n);
    let mut eps = Vec::with_capacity(n);
    match *vol {
        VolSpec::Constant { sigma0 } => {
            for _ in 0..n {
                sigma.push(sigma0);
                eps.push(standard_normal(rng));
            }
        }
        VolSpec::LogAr1 {
            sigma0,
            eta,
            persistence,
        } => {
            let phi = persistence.resolve(n);
            let mut log_var = 2.0 * sigma0.ln();
            for _ in 0..n {
                log_var = phi * log_var + eta * standard_normal(rng);
                sigma.push((0.5 * log_var).exp());
                eps.push(standard_normal(rng));
            }
        }
        VolSpec::Garch {
            sigma0,
            alpha_g,
            beta_g,
        } => {
            let mut var = sigma0 * sigma0;
            let mut u = sigma0 * standard_normal(rng);
            for _ in 0..n {
                var = alpha_g * u * u + beta_g * var;
                let s = var.sqrt();
                let e = standard_normal(rng);
                u = s * e;
                sigma.push(s);
                eps.push(e);
            }
        }
    }
    Shocks { sigma, eps }
}

/// Volatility path `sigma_1..sigma_n`.
pub fn gen_volatility<R: Rng + ?Sized>(spec: &VolSpec, n: usize, rng: &mut R) -> Result<Vec<f64>> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::InvalidSpec("volatility path length must be positive".into()));
    }
    Ok(draw_shocks(spec, n, rng).sigma)
}

fn bubble_path(spec: &DgpSpec, shocks: &Shocks) -> Vec<f64> {
    let n = spec.n;
    let (root, tau_e, tau_f) = match &spec.bubble {
        Some(b) => {
            let (e, f) = b.window(n);
            (b.root(n), e, f)
        }
        None => (1.0, usize::MAX, 0),
    };
    let mut x = Vec::with_capacity(n + 1);
    x.push(spec.x0);
    for t in 1..=n {
        let prev = x[t - 1];
        let level = if (tau_e..=tau_f).contains(&t) { root * prev } else { prev };
        x.push(level + shocks.innovation(t - 1));
    }
    x
}

/// Simulates `X_0, X_1, ..., X_n` (length `n + 1`).
///
/// `X_t = delta_n X_{t-1} + u_t` for `tau_e <= t <= tau_f` and
/// `X_t = X_{t-1} + u_t` elsewhere, where `u_t = sigma_t eps_t`.
pub fn simulate(spec: &DgpSpec) -> Result<PriceSeries> {
    spec.validate()?;
    let mut rng = rng::seeded(spec.seed);
    let shocks = draw_shocks(&spec.vol, spec.n, &mut rng);
    PriceSeries::new(bubble_path(spec, &shocks), "simulated")
}

/// Collapse-and-reset model: matches [`simulate`] up to `tau_f`; afterwards
/// the level restarts at `X_{tau_e} + X^c`, `X^c ~ N(0, x_reset_sd^2)`, and
/// accumulates the same innovations as a unit root.
pub fn simulate_pwy_reinit(spec: &DgpSpec, x_reset_sd: f64) -> Result<PriceSeries> {
    spec.validate()?;
    let bubble = spec
        .bubble
        .ok_or_else(|| Error::InvalidSpec("re-initialisation model needs a bubble".into()))?;
    if !(x_reset_sd >= 0.0 && x_reset_sd.is_finite()) {
        return Err(Error::InvalidSpec(format!(
            "reset scale must be nonnegative, got {x_reset_sd}"
        )));
    }
    let mut rng = rng::seeded(spec.seed);
    let shocks = draw_shocks(&spec.vol, spec.n, &mut rng);
    let mut x = bubble_path(spec, &shocks);
    let reset = x_reset_sd * standard_normal(&mut rng);
    let (tau_e, tau_f) = bubble.window(spec.n);
    if tau_f < spec.n {
        let restart = x[tau_e] + reset;
        let mut acc = 0.0;
        for (t, xt) in x.iter_mut().enumerate().skip(tau_f + 1) {
            acc += shocks.innovation(t - 1);
            *xt = restart + acc;
        }
    }
    PriceSeries::new(x, "simulated-reinit")
}

/// Flat key-value form of a [`DgpSpec`], as used in configuration files.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DgpConfig {
    pub n: Option<usize>,
    pub seed: Option<u64>,
    pub x0: Option<f64>,
    pub r_e: Option<f64>,
    pub r_f: Option<f64>,
    pub c: Option<f64>,
    pub alpha: Option<f64>,
    pub vol: Option<String>,
    pub sigma0: Option<f64>,
    pub eta: Option<f64>,
    /// Fixed log-volatility persistence; absent means iterated-log.
    pub phi: Option<f64>,
    pub alpha_g: Option<f64>,
    pub beta_g: Option<f64>,
}

impl DgpConfig {
    /// Fills unset keys from `other`.
    pub fn or(self, other: DgpConfig) -> DgpConfig {
        DgpConfig {
            n: self.n.or(other.n),
            seed: self.seed.or(other.seed),
            x0: self.x0.or(other.x0),
            r_e: self.r_e.or(other.r_e),
            r_f: self.r_f.or(other.r_f),
            c: self.c.or(other.c),
            alpha: self.alpha.or(other.alpha),
            vol: self.vol.or(other.vol),
            sigma0: self.sigma0.or(other.sigma0),
            eta: self.eta.or(other.eta),
            phi: self.phi.or(other.phi),
            alpha_g: self.alpha_g.or(other.alpha_g),
            beta_g: self.beta_g.or(other.beta_g),
        }
    }

    pub fn to_spec(&self) -> Result<DgpSpec> {
        let sigma0 = self.sigma0.unwrap_or(1.0);
        let vol = match self.vol.as_deref().unwrap_or("constant") {
            "constant" => VolSpec::Constant { sigma0 },
            "logar1" => VolSpec::LogAr1 {
                sigma0,
                eta: self.eta.unwrap_or(0.5),
                persistence: self.phi.map_or(Persistence::IteratedLog, Persistence::Fixed),
            },
            "garch" => VolSpec::Garch {
                sigma0,
                alpha_g: self.alpha_g.unwrap_or(0.05),
                beta_g: self.beta_g.unwrap_or(0.94),
            },
            other => {
                return Err(Error::InvalidSpec(format!(
                    "unknown volatility kind '{other}' (expected constant, logar1 or garch)"
                )))
            }
        };
        let bubble = match (self.r_e, self.r_f) {
            (None, None) => None,
            (Some(r_e), Some(r_f)) => Some(BubbleSpec {
                r_e,
                r_f,
                c: self.c.unwrap_or(1.0),
                alpha: self.alpha.unwrap_or(0.5),
            }),
            _ => {
                return Err(Error::InvalidSpec(
                    "r_e and r_f must be given together".into(),
                ))
            }
        };
        let spec = DgpSpec {
            n: self.n.unwrap_or(1000),
            bubble,
            vol,
            x0: self.x0.unwrap_or(0.0),
            seed: self.seed.unwrap_or(0),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_spec(spec: &DgpSpec) -> Self {
        let mut cfg = DgpConfig {
            n: Some(spec.n),
            seed: Some(spec.seed),
            x0: Some(spec.x0),
            vol: Some(spec.vol.kind_name().to_string()),
            ..Default::default()
        };
        if let Some(b) = &spec.bubble {
            cfg.r_e = Some(b.r_e);
            cfg.r_f = Some(b.r_f);
            cfg.c = Some(b.c);
            cfg.alpha = Some(b.alpha);
        }
        match spec.vol {
            VolSpec::Constant { sigma0 } => cfg.sigma0 = Some(sigma0),
            VolSpec::LogAr1 {
                sigma0,
                eta,
                persistence,
            } => {
                cfg.sigma0 = Some(sigma0);
                cfg.eta = Some(eta);
                if let Persistence::Fixed(phi) = persistence {
                    cfg.phi = Some(phi);
                }
            }
            VolSpec::Garch {
                sigma0,
                alpha_g,
                beta_g,
            } => {
                cfg.sigma0 = Some(sigma0);
                cfg.alpha_g = Some(alpha_g);
                cfg.beta_g = Some(beta_g);
            }
        }
        cfg
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats;

    fn noiseless(n: usize, bubble: Option<BubbleSpec>, x0: f64) -> DgpSpec {
        DgpSpec {
            n,
            bubble,
            vol: VolSpec::Constant { sigma0: 0.0 },
            x0,
            seed: 1,
        }
    }

    #[test]
    fn constant_volatility_is_flat() {
        let mut r = rng::seeded(0);
        let v = gen_volatility(&VolSpec::Constant { sigma0: 1.0 }, 5, &mut r).unwrap();
        assert_eq!(v, vec![1.0; 5]);
    }

    #[test]
    fn zero_noise_log_ar1_stays_at_unit_scale() {
        let spec = VolSpec::LogAr1 {
            sigma0: 1.0,
            eta: 0.0,
            persistence: Persistence::Fixed(0.9),
        };
        let v = gen_volatility(&spec, 4, &mut rng::seeded(3)).unwrap();
        assert_eq!(v, vec![1.0; 4]);
    }

    #[test]
    fn log_ar1_moments_match_stationary_ar1() {
        let (eta, phi, n) = (0.5_f64, 0.95_f64, 100_000);
        let spec = VolSpec::LogAr1 {
            sigma0: 1.0,
            eta,
            persistence: Persistence::Fixed(phi),
        };
        let v = gen_volatility(&spec, n, &mut rng::seeded(11)).unwrap();
        let logs: Vec<f64> = v.iter().map(|s| 2.0 * s.ln()).collect();
        let m = stats::mean(&logs);
        let var = stats::sum(logs.iter().map(|x| (x - m) * (x - m))) / (n as f64 - 1.0);
        let gamma0 = eta * eta / (1.0 - phi * phi);
        // long-run variance of the mean of an AR(1)
        let se = (gamma0 * (1.0 + phi) / (1.0 - phi) / n as f64).sqrt();
        assert!(m.abs() < 3.0 * se, "mean {m} se {se}");
        assert!((var / gamma0 - 1.0).abs() < 0.05, "var {var} vs {gamma0}");
    }

    #[test]
    fn log_ar1_unit_persistence_without_noise_is_constant() {
        let spec = VolSpec::LogAr1 {
            sigma0: 2.0,
            eta: 0.0,
            persistence: Persistence::Fixed(1.0),
        };
        let v = gen_volatility(&spec, 50, &mut rng::seeded(2)).unwrap();
        assert!(v.iter().all(|&s| (s - 2.0).abs() < 1e-12));
    }

    #[test]
    fn iterated_log_persistence() {
        let phi = Persistence::IteratedLog.resolve(1000);
        assert!((phi - (1.0 - 1.0 / (1000f64).ln().ln())).abs() < 1e-15);
        assert_eq!(Persistence::IteratedLog.resolve(3), Persistence::IteratedLog.resolve(16));
        assert!(Persistence::IteratedLog.resolve(100_000) > phi);
    }

    #[test]
    fn rejects_bad_volatility_specs() {
        let mut r = rng::seeded(0);
        assert!(gen_volatility(&VolSpec::Constant { sigma0: -1.0 }, 3, &mut r).is_err());
        assert!(gen_volatility(&VolSpec::log_ar1(0.5).with_sigma0(0.0), 3, &mut r).is_err());
        let err = gen_volatility(&VolSpec::garch(0.5, 0.5), 3, &mut r).unwrap_err();
        assert_eq!(err.category(), "invalid-spec");
    }

    #[test]
    fn garch_second_moment_decays_geometrically() {
        let (a, b) = (0.05, 0.94);
        let vol = VolSpec::garch(a, b);
        let reps = 20_000;
        let t = 50;
        let mut acc = Vec::with_capacity(reps);
        for r in 0..reps {
            let mut g = rng::replication_rng(99, r as u64);
            let s = draw_shocks(&vol, t, &mut g);
            acc.push(s.sigma[t - 1].powi(2));
        }
        let m = stats::mean(&acc);
        let expected = (a + b).powi(t as i32);
        let sd = {
            let mu = m;
            (stats::sum(acc.iter().map(|x| (x - mu) * (x - mu))) / (reps as f64 - 1.0)).sqrt()
        };
        let se = sd / (reps as f64).sqrt();
        assert!((m - expected).abs() < 4.0 * se, "mean {m} expected {expected} se {se}");
    }

    #[test]
    fn zero_noise_unit_root_is_flat() {
        let x = simulate(&noiseless(100, None, 5.0)).unwrap();
        assert_eq!(x.len(), 101);
        assert!(x.values().iter().all(|&v| v == 5.0));
    }

    #[test]
    fn zero_noise_bubble_follows_closed_form() {
        let b = BubbleSpec::new(0.4, 0.6, 1.0, 0.5).unwrap();
        assert_eq!(b.root(100), 1.1);
        assert_eq!(b.window(100), (40, 60));
        let x = simulate(&noiseless(100, Some(b), 5.0)).unwrap();
        let v = x.values();
        for t in 0..40 {
            assert_eq!(v[t], 5.0);
        }
        for t in 40..=60 {
            let expected = 5.0 * 1.1f64.powi(t as i32 - 39);
            assert!((v[t] / expected - 1.0).abs() < 1e-13, "t={t}");
        }
        for t in 61..=100 {
            assert_eq!(v[t], v[60]);
        }
        // exact regime ratios
        for t in 1..=100 {
            let ratio = v[t] / v[t - 1];
            let want = if (40..=60).contains(&t) { 1.1 } else { 1.0 };
            assert!((ratio - want).abs() < 1e-14, "t={t} ratio={ratio}");
        }
    }

    #[test]
    fn simulation_is_deterministic() {
        let spec = DgpSpec::bubble(
            300,
            BubbleSpec::new(0.3, 0.6, 1.0, 0.5).unwrap(),
            VolSpec::log_ar1(0.5),
            42,
        );
        assert_eq!(simulate(&spec).unwrap(), simulate(&spec).unwrap());
        assert_ne!(simulate(&spec).unwrap(), simulate(&spec.with_seed(43)).unwrap());
    }

    #[test]
    fn vanishing_c_recovers_unit_root_path() {
        let vol = VolSpec::homoskedastic();
        let null = simulate(&DgpSpec::null(500, vol, 9)).unwrap();
        let tiny = BubbleSpec::new(0.3, 0.6, 1e-12, 0.5).unwrap();
        let alt = simulate(&DgpSpec::bubble(500, tiny, vol, 9)).unwrap();
        for (a, b) in null.values().iter().zip(alt.values()) {
            assert!((a - b).abs() <= 1e-6 * a.abs().max(1.0));
        }
    }

    #[test]
    fn reinit_matches_simulate_until_collapse() {
        let b = BubbleSpec::new(0.4, 0.6, 1.0, 0.5).unwrap();
        let spec = DgpSpec::bubble(200, b, VolSpec::homoskedastic(), 5);
        let plain = simulate(&spec).unwrap();
        let reset = simulate_pwy_reinit(&spec, 1.0).unwrap();
        let (_, tau_f) = b.window(200);
        assert_eq!(&plain.values()[..=tau_f], &reset.values()[..=tau_f]);
        // increments after the reset equal the unit-root innovations
        for t in tau_f + 2..=200 {
            let d1 = plain.values()[t] - plain.values()[t - 1];
            let d2 = reset.values()[t] - reset.values()[t - 1];
            assert!((d1 - d2).abs() < 1e-9 * plain.values()[t].abs().max(1.0));
        }
    }

    #[test]
    fn noiseless_reinit_restarts_at_origination_level() {
        let b = BubbleSpec::new(0.4, 0.6, 1.0, 0.5).unwrap();
        let x = simulate_pwy_reinit(&noiseless(100, Some(b), 5.0), 0.0).unwrap();
        let v = x.values();
        // X_{tau_e} already carries the first explosive step
        assert!((v[40] - 5.5).abs() < 1e-12);
        for t in 61..=100 {
            assert_eq!(v[t], v[40]);
        }
    }

    #[test]
    fn reinit_reset_stays_within_normal_tail() {
        let b = BubbleSpec::new(0.4, 0.6, 1.0, 0.5).unwrap();
        let base = noiseless(100, Some(b), 5.0);
        let mut outside = 0;
        for r in 0..2000u64 {
            let x = simulate_pwy_reinit(&base.with_seed(r), 1.0).unwrap();
            let v = x.values();
            if (v[61] - v[40]).abs() > 4.0 {
                outside += 1;
            }
        }
        // P(|Z| > 4) = 6.3e-5
        assert!(outside <= 1, "{outside} resets beyond 4 sd");
    }

    #[test]
    fn mildly_explosive_covers_whole_sample() {
        let spec = DgpSpec::mildly_explosive(100, 1.0, 0.5, VolSpec::Constant { sigma0: 0.0 }, 0)
            .unwrap()
            .with_x0(1.0);
        let x = simulate(&spec).unwrap();
        let v = x.values();
        for t in 1..=100 {
            assert!((v[t] / v[t - 1] - 1.1).abs() < 1e-12);
        }
    }

    #[test]
    fn reinit_requires_bubble() {
        let spec = DgpSpec::null(100, VolSpec::homoskedastic(), 0);
        assert!(simulate_pwy_reinit(&spec, 1.0).is_err());
    }

    #[test]
    fn rejects_short_samples() {
        let spec = DgpSpec::null(19, VolSpec::homoskedastic(), 0);
        assert_eq!(simulate(&spec).unwrap_err().category(), "invalid-spec");
    }

    #[test]
    fn config_round_trip() {
        let spec = DgpSpec {
            n: 250,
            bubble: Some(BubbleSpec::new(0.2, 0.5, 0.7, 0.4).unwrap()),
            vol: VolSpec::LogAr1 {
                sigma0: 1.5,
                eta: 0.3,
                persistence: Persistence::Fixed(0.97),
            },
            x0: 2.0,
            seed: 77,
        };
        assert_eq!(DgpConfig::from_spec(&spec).to_spec().unwrap(), spec);
        let garch = DgpSpec::null(100, VolSpec::garch(0.1, 0.89), 3);
        assert_eq!(DgpConfig::from_spec(&garch).to_spec().unwrap(), garch);
    }
}
