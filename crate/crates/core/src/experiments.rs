//! Monte Carlo experiments comparing SV-ADF date-stamping with the PWY
//! baseline: identification rates, bias/MSE of the estimated fractions and
//! the re-initialisation gap.

use std::fmt::Write as _;
use std::io;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::calibration::{calibrate_null, CalibrationTable};
use crate::dating::{datestamp, datestamp_pwy, Episode, PersistenceFilter, Tail, ThresholdRule};
use crate::dgp::{fraction_index, simulate, simulate_pwy_reinit, BubbleSpec, DgpSpec, VolSpec};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, replication_seed};
use crate::stats::{mean, KahanSum};
use crate::svadf::{recursive_path, RecursiveConfig, Variant};

pub const MIN_CELL_REPLICATIONS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Design {
    pub n: usize,
    pub bubble: Option<BubbleSpec>,
    pub vol: VolSpec,
}

impl Design {
    pub fn validate(&self) -> Result<()> {
        DgpSpec {
            n: self.n,
            bubble: self.bubble,
            vol: self.vol,
            x0: 0.0,
            seed: 0,
        }
        .validate()
    }
}

/// Persistence requirements, either in observations or as sample fractions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FilterSpec {
    Fixed(PersistenceFilter),
    Proportional { above: f64, below: f64, gap: usize },
}

impl FilterSpec {
    pub fn resolve(&self, n: usize) -> PersistenceFilter {
        match *self {
            FilterSpec::Fixed(f) => f,
            FilterSpec::Proportional { above, below, gap } => {
                PersistenceFilter::proportional(n, above, below, gap)
            }
        }
    }

    pub fn simulation() -> Self {
        FilterSpec::Proportional {
            above: crate::dating::SIM_ABOVE_FRACTION,
            below: crate::dating::SIM_BELOW_FRACTION,
            gap: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Rules {
    pub origination: ThresholdRule,
    pub collapse: ThresholdRule,
    pub filter: FilterSpec,
    /// Single boundary for both margins of the PWY baseline.
    pub pwy: ThresholdRule,
}

impl Rules {
    /// Log rules with the simulation filter; PWY uses `pwy`.
    pub fn with_pwy(pwy: ThresholdRule) -> Self {
        Self {
            origination: ThresholdRule::origination_default(),
            collapse: ThresholdRule::collapse_default(),
            filter: FilterSpec::simulation(),
            pwy,
        }
    }
}

/// PWY boundary: the homoskedastic null `q`-quantile of the coefficient
/// statistic, interpolated in the window size from a table over
/// `[min_size, max_n]`.
pub fn pwy_threshold(min_size: usize, max_n: usize, b: usize, q: f64, seed: u64) -> Result<ThresholdRule> {
    let table = pwy_table(min_size, max_n, b, q, seed)?;
    Ok(ThresholdRule::calibrated(Arc::new(table), Tail::Right))
}

pub fn pwy_table(min_size: usize, max_n: usize, b: usize, q: f64, seed: u64) -> Result<CalibrationTable> {
    let mut sizes = Vec::new();
    let mut s = min_size.max(crate::dgp::MIN_SAMPLE);
    while s < max_n {
        sizes.push(s);
        s = (s * 3).div_ceil(2);
    }
    sizes.push(max_n);
    calibrate_null(&sizes, b, q, &VolSpec::homoskedastic(), Variant::Coefficient, seed)
}

/// Identification bands around the true fractions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub origination: f64,
    pub collapse: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            origination: 0.1,
            collapse: 0.15,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentGrid {
    pub designs: Vec<Design>,
    pub replications: usize,
    pub rules: Rules,
    pub tolerance: Tolerance,
    pub config: RecursiveConfig,
    pub seed: u64,
}

impl ExperimentGrid {
    pub fn new(designs: Vec<Design>, replications: usize, rules: Rules, seed: u64) -> Self {
        Self {
            designs,
            replications,
            rules,
            tolerance: Tolerance::default(),
            config: RecursiveConfig::default(),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications < MIN_CELL_REPLICATIONS {
            return Err(Error::InvalidSpec(format!(
                "at least {MIN_CELL_REPLICATIONS} replications per cell required, got {}",
                self.replications
            )));
        }
        if self.designs.is_empty() {
            return Err(Error::InvalidSpec("experiment grid has no designs".into()));
        }
        self.designs.iter().try_for_each(Design::validate)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Svadf,
    Pwy,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Svadf => "svadf",
            Method::Pwy => "pwy",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub design: Design,
    pub method: Method,
    /// Origination identified within tolerance (any episode under the null).
    pub orig_rate: f64,
    /// Collapse identified as well.
    pub coll_rate: f64,
    /// Fraction of replications with any episode.
    pub detect_rate: f64,
    /// Means and MSEs over replications with an episode; an episode still
    /// running at the end of the sample counts as `r_f_hat = 1`.
    pub mean_r_e_hat: f64,
    pub mean_r_f_hat: f64,
    pub mse_r_e: f64,
    pub mse_r_f: f64,
    pub replications: usize,
    pub failures: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy)]
struct Outcome {
    svadf: Option<Episode>,
    pwy: Option<Episode>,
}

fn replicate(grid: &ExperimentGrid, design: &Design, seed: u64) -> Result<Outcome> {
    let spec = DgpSpec {
        n: design.n,
        bubble: design.bubble,
        vol: design.vol,
        x0: 0.0,
        seed,
    };
    let series = simulate(&spec)?;
    let path = recursive_path(&series, &grid.config)?;
    let filter = grid.rules.filter.resolve(design.n);
    Ok(Outcome {
        svadf: datestamp(&path, &grid.rules.origination, &grid.rules.collapse, &filter)?,
        pwy: datestamp_pwy(&path, &grid.rules.pwy)?,
    })
}

fn summarise(
    design: &Design,
    method: Method,
    episodes: &[Option<Episode>],
    failures: usize,
    tol: &Tolerance,
    seed: u64,
) -> CellResult {
    let b = episodes.len() + failures;
    let detected: Vec<&Episode> = episodes.iter().flatten().collect();
    let (mut orig, mut coll) = (0usize, 0usize);
    for e in &detected {
        match &design.bubble {
            Some(bub) => {
                if (e.r_e_hat - bub.r_e).abs() <= tol.origination {
                    orig += 1;
                    if e.r_f_hat.is_some_and(|r| (r - bub.r_f).abs() <= tol.collapse) {
                        coll += 1;
                    }
                }
            }
            None => {
                orig += 1;
                if e.r_f_hat.is_some() {
                    coll += 1;
                }
            }
        }
    }
    let re: Vec<f64> = detected.iter().map(|e| e.r_e_hat).collect();
    let rf: Vec<f64> = detected.iter().map(|e| e.r_f_hat.unwrap_or(1.0)).collect();
    let mse = |xs: &[f64], truth: Option<f64>| match truth {
        Some(t) if !xs.is_empty() => {
            xs.iter().map(|x| (x - t) * (x - t)).collect::<KahanSum>().value() / xs.len() as f64
        }
        _ => f64::NAN,
    };
    let rate = |k: usize| if b == 0 { f64::NAN } else { k as f64 / b as f64 };
    CellResult {
        design: *design,
        method,
        orig_rate: rate(orig),
        coll_rate: rate(coll),
        detect_rate: rate(detected.len()),
        mean_r_e_hat: mean(&re),
        mean_r_f_hat: mean(&rf),
        mse_r_e: mse(&re, design.bubble.map(|b| b.r_e)),
        mse_r_f: mse(&rf, design.bubble.map(|b| b.r_f)),
        replications: b,
        failures,
        seed,
    }
}

/// Both methods on every cell. Replications that fail are counted, not fatal.
pub fn run_grid(grid: &ExperimentGrid) -> Result<Vec<CellResult>> {
    grid.validate()?;
    let mut out = Vec::with_capacity(2 * grid.designs.len());
    for (k, design) in grid.designs.iter().enumerate() {
        let cell_seed = derive_seed(grid.seed, k as u64);
        let outcomes: Vec<Result<Outcome>> = (0..grid.replications as u64)
            .into_par_iter()
            .map(|rep| replicate(grid, design, replication_seed(cell_seed, rep)))
            .collect();
        let ok: Vec<Outcome> = outcomes.iter().filter_map(|o| o.as_ref().ok().copied()).collect();
        let failures = outcomes.len() - ok.len();
        let sv: Vec<Option<Episode>> = ok.iter().map(|o| o.svadf).collect();
        let pwy: Vec<Option<Episode>> = ok.iter().map(|o| o.pwy).collect();
        out.push(summarise(design, Method::Svadf, &sv, failures, &grid.tolerance, cell_seed));
        out.push(summarise(design, Method::Pwy, &pwy, failures, &grid.tolerance, cell_seed));
    }
    Ok(out)
}

/// Identification rates per cell and method.
pub fn run_power(grid: &ExperimentGrid) -> Result<Vec<CellResult>> {
    run_grid(grid)
}

/// Mean estimates and MSE per cell and method.
pub fn run_accuracy(grid: &ExperimentGrid) -> Result<Vec<CellResult>> {
    run_grid(grid)
}

/// Template for the re-initialisation gap experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapTemplate {
    pub bubble: BubbleSpec,
    /// Scale of the post-collapse reset draw in the PWY model.
    pub reset_sd: f64,
}

impl Default for GapTemplate {
    fn default() -> Self {
        Self {
            bubble: BubbleSpec {
                r_e: 0.4,
                r_f: 0.6,
                c: 1.0,
                alpha: 0.5,
            },
            reset_sd: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapPoint {
    pub n: usize,
    pub regime: String,
    /// Mean `|X_{tau_f} - X_{tau_e}|`.
    pub mean_gap: f64,
    pub log_mean_gap: f64,
    /// Mean `|X_{tau_f + 1} - X_{tau_e}|` in the collapse-and-reset model.
    pub pwy_mean_gap: f64,
    pub replications: usize,
}

pub fn run_reinit_gap(
    ns: &[usize],
    b: usize,
    template: &GapTemplate,
    regimes: &[(String, VolSpec)],
    seed: u64,
) -> Result<Vec<GapPoint>> {
    if b == 0 {
        return Err(Error::InvalidSpec("gap experiment needs replications".into()));
    }
    template.bubble.validate()?;
    let mut out = Vec::new();
    for (ri, (label, vol)) in regimes.iter().enumerate() {
        for &n in ns {
            let master = derive_seed(derive_seed(seed, ri as u64), n as u64);
            let (tau_e, tau_f) = template.bubble.window(n);
            if tau_f >= n {
                return Err(Error::InvalidSpec(format!(
                    "bubble must end before the sample (n = {n})"
                )));
            }
            let gaps = (0..b as u64)
                .into_par_iter()
                .map(|rep| {
                    let spec = DgpSpec::bubble(n, template.bubble, *vol, replication_seed(master, rep));
                    let x = simulate(&spec)?;
                    let r = simulate_pwy_reinit(&spec, template.reset_sd)?;
                    let v = x.values();
                    let w = r.values();
                    Ok(((v[tau_f] - v[tau_e]).abs(), (w[tau_f + 1] - w[tau_e]).abs()))
                })
                .collect::<Result<Vec<(f64, f64)>>>()?;
            let mean_gap = mean(&gaps.iter().map(|g| g.0).collect::<Vec<_>>());
            out.push(GapPoint {
                n,
                regime: label.clone(),
                mean_gap,
                log_mean_gap: mean_gap.ln(),
                pwy_mean_gap: mean(&gaps.iter().map(|g| g.1).collect::<Vec<_>>()),
                replications: b,
            });
        }
    }
    Ok(out)
}

/// Noiseless gap `X_{tau_e} (delta^{tau_f - tau_e} - 1)`.
pub fn noiseless_gap(x_tau_e: f64, bubble: &BubbleSpec, n: usize) -> f64 {
    let (e, f) = bubble.window(n);
    x_tau_e * (bubble.root(n).powi((f - e) as i32) - 1.0)
}

#[derive(Debug, Serialize)]
struct CellRow<'a> {
    n: usize,
    r_e: Option<f64>,
    r_f: Option<f64>,
    c: Option<f64>,
    alpha: Option<f64>,
    vol: &'a str,
    eta: Option<f64>,
    alpha_g: Option<f64>,
    beta_g: Option<f64>,
    method: &'a str,
    orig_rate: f64,
    coll_rate: f64,
    detect_rate: f64,
    mean_re: f64,
    mean_rf: f64,
    mse_re: f64,
    mse_rf: f64,
    #[serde(rename = "B")]
    b: usize,
    failures: usize,
    seed: u64,
}

fn vol_params(v: &VolSpec) -> (Option<f64>, Option<f64>, Option<f64>) {
    match *v {
        VolSpec::Constant { .. } => (None, None, None),
        VolSpec::LogAr1 { eta, .. } => (Some(eta), None, None),
        VolSpec::Garch { alpha_g, beta_g, .. } => (None, Some(alpha_g), Some(beta_g)),
    }
}

/// Tidy CSV, one row per cell and method.
pub fn write_cells_csv<W: io::Write>(out: W, cells: &[CellResult]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::InvalidSeries(format!("csv write failed: {e}"));
    for c in cells {
        let b = c.design.bubble;
        let (eta, alpha_g, beta_g) = vol_params(&c.design.vol);
        w.serialize(CellRow {
            n: c.design.n,
            r_e: b.map(|b| b.r_e),
            r_f: b.map(|b| b.r_f),
            c: b.map(|b| b.c),
            alpha: b.map(|b| b.alpha),
            vol: c.design.vol.kind_name(),
            eta,
            alpha_g,
            beta_g,
            method: c.method.name(),
            orig_rate: c.orig_rate,
            coll_rate: c.coll_rate,
            detect_rate: c.detect_rate,
            mean_re: c.mean_r_e_hat,
            mean_rf: c.mean_r_f_hat,
            mse_re: c.mse_r_e,
            mse_rf: c.mse_r_f,
            b: c.replications,
            failures: c.failures,
            seed: c.seed,
        })
        .map_err(err)?;
    }
    w.flush()
        .map_err(|e| Error::InvalidSeries(format!("csv write failed: {e}")))?;
    Ok(())
}

pub fn write_gap_csv<W: io::Write>(out: W, points: &[GapPoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for p in points {
        w.serialize(p)
            .map_err(|e| Error::InvalidSeries(format!("csv write failed: {e}")))?;
    }
    w.flush()
        .map_err(|e| Error::InvalidSeries(format!("csv write failed: {e}")))?;
    Ok(())
}

fn design_label(d: &Design) -> String {
    let mut s = match &d.bubble {
        Some(b) => format!("r_e={:.2} r_f={:.2} c={} a={}", b.r_e, b.r_f, b.c, b.alpha),
        None => "no bubble".to_string(),
    };
    match d.vol {
        VolSpec::Constant { .. } => s.push_str(" const"),
        VolSpec::LogAr1 { eta, .. } => {
            let _ = write!(s, " sv eta={eta}");
        }
        VolSpec::Garch { alpha_g, beta_g, .. } => {
            let _ = write!(s, " garch {alpha_g}/{beta_g}");
        }
    }
    let _ = write!(s, " n={}", d.n);
    s
}

/// Side-by-side identification rates, one line per design.
pub fn format_power_table(cells: &[CellResult]) -> String {
    let mut out = format!(
        "{:<44} {:>8} {:>8}   {:>8} {:>8}\n",
        "design", "sv orig", "sv coll", "pwy orig", "pwy coll"
    );
    for pair in cells.chunks(2) {
        if let [sv, pwy] = pair {
            let _ = writeln!(
                out,
                "{:<44} {:>8.3} {:>8.3}   {:>8.3} {:>8.3}",
                design_label(&sv.design),
                sv.orig_rate,
                sv.coll_rate,
                pwy.orig_rate,
                pwy.coll_rate
            );
        }
    }
    out
}

/// Mean estimates and MSEs, one line per design.
pub fn format_accuracy_table(cells: &[CellResult]) -> String {
    let mut out = format!(
        "{:<44} {:>7} {:>7} {:>8} {:>8}   {:>7} {:>7} {:>8} {:>8}\n",
        "design", "sv r_e", "sv r_f", "mse r_e", "mse r_f", "pwy r_e", "pwy r_f", "mse r_e", "mse r_f"
    );
    for pair in cells.chunks(2) {
        if let [sv, pwy] = pair {
            let _ = writeln!(
                out,
                "{:<44} {:>7.4} {:>7.4} {:>8.4} {:>8.4}   {:>7.4} {:>7.4} {:>8.4} {:>8.4}",
                design_label(&sv.design),
                sv.mean_r_e_hat,
                sv.mean_r_f_hat,
                sv.mse_r_e,
                sv.mse_r_f,
                pwy.mean_r_e_hat,
                pwy.mean_r_f_hat,
                pwy.mse_r_e,
                pwy.mse_r_f
            );
        }
    }
    out
}

/// Table-2 style grid: `(r_e, r_f)` pairs with common root and volatility.
pub fn bubble_grid(n: usize, pairs: &[(f64, f64)], c: f64, alpha: f64, vol: VolSpec) -> Result<Vec<Design>> {
    pairs
        .iter()
        .map(|&(r_e, r_f)| {
            Ok(Design {
                n,
                bubble: Some(BubbleSpec::new(r_e, r_f, c, alpha)?),
                vol,
            })
        })
        .collect()
}

/// `(r_e, r_f)` cells of the identification-rate table.
pub const POWER_CELLS: [(f64, f64); 10] = [
    (0.2, 0.50),
    (0.2, 0.65),
    (0.2, 0.75),
    (0.3, 0.50),
    (0.3, 0.65),
    (0.3, 0.75),
    (0.4, 0.65),
    (0.4, 0.75),
    (0.5, 0.65),
    (0.5, 0.75),
];

/// `(r_e, r_f, alpha)` rows of the accuracy table.
pub const ACCURACY_ROWS: [(f64, f64, f64); 8] = [
    (0.2, 0.50, 0.3),
    (0.2, 0.65, 0.3),
    (0.3, 0.50, 0.3),
    (0.4, 0.50, 0.5),
    (0.4, 0.65, 0.5),
    (0.4, 0.75, 0.5),
    (0.5, 0.65, 0.7),
    (0.4, 0.65, 1.0),
];

/// Index of `r` within a sample of size `n`, as used by the DGP.
pub fn design_index(n: usize, r: f64) -> usize {
    fraction_index(n, r)
}
