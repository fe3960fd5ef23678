//! Monte Carlo critical values for the full-sample statistic.

use std::io;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dgp::{simulate, BubbleSpec, DgpSpec, Persistence, VolSpec, MIN_SAMPLE};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, replication_rng, replication_seed};
use crate::stats::{quantile, quantile_sorted};
use crate::svadf::{stat_at, Variant};

pub const MIN_REPLICATIONS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Hypothesis {
    NullUnitRoot,
    AlternativeRandomized,
}

impl Hypothesis {
    pub fn name(&self) -> &'static str {
        match self {
            Hypothesis::NullUnitRoot => "H0",
            Hypothesis::AlternativeRandomized => "H1",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "H0" | "h0" | "null" => Ok(Hypothesis::NullUnitRoot),
            "H1" | "h1" | "alternative" => Ok(Hypothesis::AlternativeRandomized),
            other => Err(Error::Table(format!("unknown hypothesis '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationTable {
    pub hypothesis: Hypothesis,
    pub sizes: Vec<usize>,
    pub quantile_level: f64,
    pub values: Vec<f64>,
    pub replications: usize,
    pub variant: Variant,
    pub seed: u64,
}

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    hypothesis: String,
    variant: String,
    n: usize,
    q: f64,
    #[serde(rename = "B")]
    b: usize,
    value: f64,
    seed: u64,
}

impl CalibrationTable {
    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() || self.sizes.len() != self.values.len() {
            return Err(Error::Table("sizes and values must be non-empty and aligned".into()));
        }
        if self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Table("sizes must be strictly increasing".into()));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Table("table values must be finite".into()));
        }
        if self.replications < MIN_REPLICATIONS {
            return Err(Error::Table(format!(
                "tables need at least {MIN_REPLICATIONS} replications, got {}",
                self.replications
            )));
        }
        if !(self.quantile_level > 0.0 && self.quantile_level < 1.0) {
            return Err(Error::Table(format!(
                "quantile level must lie in (0, 1), got {}",
                self.quantile_level
            )));
        }
        Ok(())
    }

    /// Linear interpolation in the sample size, constant beyond the grid.
    pub fn value_at(&self, size: f64) -> f64 {
        let first = self.sizes[0] as f64;
        let last = *self.sizes.last().unwrap() as f64;
        if size <= first {
            return self.values[0];
        }
        if size >= last {
            return *self.values.last().unwrap();
        }
        let k = self.sizes.partition_point(|&s| (s as f64) <= size);
        let (n0, n1) = (self.sizes[k - 1] as f64, self.sizes[k] as f64);
        let (v0, v1) = (self.values[k - 1], self.values[k]);
        v0 + (size - n0) / (n1 - n0) * (v1 - v0)
    }

    pub fn value_for(&self, n: usize) -> Option<f64> {
        self.sizes.iter().position(|&s| s == n).map(|i| self.values[i])
    }

    pub fn write_csv<W: io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for (&n, &value) in self.sizes.iter().zip(&self.values) {
            w.serialize(Row {
                hypothesis: self.hypothesis.name().into(),
                variant: self.variant.name().into(),
                n,
                q: self.quantile_level,
                b: self.replications,
                value,
                seed: self.seed,
            })
            .map_err(|e| Error::Table(format!("csv write failed: {e}")))?;
        }
        w.flush().map_err(|e| Error::Table(format!("csv write failed: {e}")))?;
        Ok(())
    }

    /// Reads a single table; every row must share hypothesis, variant, q, B and seed.
    pub fn read_csv<R: io::Read>(input: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
        let mut rows = Vec::new();
        for (i, rec) in rdr.deserialize::<Row>().enumerate() {
            rows.push(rec.map_err(|e| Error::Table(format!("row {}: {e}", i + 1)))?);
        }
        let first = rows.first().ok_or_else(|| Error::Table("empty calibration table".into()))?;
        let table = CalibrationTable {
            hypothesis: Hypothesis::parse(&first.hypothesis)?,
            variant: Variant::parse(&first.variant).map_err(|e| Error::Table(e.to_string()))?,
            quantile_level: first.q,
            replications: first.b,
            seed: first.seed,
            sizes: rows.iter().map(|r| r.n).collect(),
            values: rows.iter().map(|r| r.value).collect(),
        };
        if rows.iter().any(|r| {
            r.hypothesis != first.hypothesis
                || r.variant != first.variant
                || r.q != first.q
                || r.b != first.b
                || r.seed != first.seed
        }) {
            return Err(Error::Table("rows describe more than one table".into()));
        }
        table.validate()?;
        Ok(table)
    }
}

fn check_args(sizes: &[usize], b: usize, q: f64) -> Result<()> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidSpec(format!("quantile level must lie in (0, 1), got {q}")));
    }
    if b < MIN_REPLICATIONS {
        return Err(Error::InvalidSpec(format!(
            "at least {MIN_REPLICATIONS} replications required, got {b}"
        )));
    }
    if sizes.is_empty() || sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidSpec("sizes must be non-empty and strictly increasing".into()));
    }
    if sizes[0] < MIN_SAMPLE {
        return Err(Error::InvalidSpec(format!(
            "sizes must be at least {MIN_SAMPLE}, got {}",
            sizes[0]
        )));
    }
    Ok(())
}

fn full_sample_stat(spec: &DgpSpec, variant: Variant) -> Result<f64> {
    let series = simulate(spec)?;
    stat_at(&series, spec.n, variant)
}

/// Full-sample statistics of `b` unit-root replications at size `n`.
pub fn null_draws(n: usize, b: usize, vol: &VolSpec, variant: Variant, seed: u64) -> Result<Vec<f64>> {
    let master = derive_seed(seed, n as u64);
    let mut draws = (0..b as u64)
        .into_par_iter()
        .map(|rep| {
            let spec = DgpSpec::null(n, *vol, replication_seed(master, rep));
            full_sample_stat(&spec, variant)
        })
        .collect::<Result<Vec<f64>>>()?;
    draws.sort_by(f64::total_cmp);
    Ok(draws)
}

pub fn calibrate_null(
    sizes: &[usize],
    b: usize,
    q: f64,
    vol: &VolSpec,
    variant: Variant,
    seed: u64,
) -> Result<CalibrationTable> {
    check_args(sizes, b, q)?;
    vol.validate()?;
    let values = sizes
        .iter()
        .map(|&n| null_draws(n, b, vol, variant, seed).map(|d| quantile_sorted(&d, q)))
        .collect::<Result<Vec<f64>>>()?;
    let table = CalibrationTable {
        hypothesis: Hypothesis::NullUnitRoot,
        sizes: sizes.to_vec(),
        quantile_level: q,
        values,
        replications: b,
        variant,
        seed,
    };
    table.validate()?;
    Ok(table)
}

/// Uniform ranges for the randomised alternative. `r_f` is drawn from
/// `U(r_e + min_duration, r_f_max)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NuisanceSampler {
    pub r_e: (f64, f64),
    pub min_duration: f64,
    pub r_f_max: f64,
    pub c: (f64, f64),
    pub alpha: (f64, f64),
    pub eta: (f64, f64),
    /// Volatility scale; the statistic is scale invariant, so this only
    /// affects the simulated levels.
    pub sigma0: (f64, f64),
    /// Independent nuisance draws; each contributes one quantile.
    pub outer: usize,
}

impl Default for NuisanceSampler {
    fn default() -> Self {
        Self {
            r_e: (0.2, 0.5),
            min_duration: 0.15,
            r_f_max: 0.8,
            c: (0.3, 1.5),
            alpha: (0.3, 0.7),
            eta: (0.0, 1.0),
            sigma0: (1.0, 1.0),
            outer: 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NuisanceDraw {
    pub bubble: BubbleSpec,
    pub vol: VolSpec,
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

impl NuisanceSampler {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidSpec(format!("nuisance sampler: {m}")));
        let ordered = |(lo, hi): (f64, f64)| lo.is_finite() && hi.is_finite() && lo <= hi;
        if ![self.r_e, self.c, self.alpha, self.eta, self.sigma0].into_iter().all(ordered) {
            return bad("every range needs finite lo <= hi");
        }
        if !(self.r_e.0 > 0.0 && self.min_duration > 0.0 && self.r_e.1 + self.min_duration <= self.r_f_max && self.r_f_max <= 1.0) {
            return bad("need 0 < r_e, r_e_max + min_duration <= r_f_max <= 1");
        }
        if !(self.c.0 > 0.0 && self.alpha.0 > 0.0 && self.alpha.1 <= 1.0) {
            return bad("need c > 0 and alpha in (0, 1]");
        }
        if !(self.eta.0 >= 0.0 && self.sigma0.0 > 0.0) {
            return bad("need eta >= 0 and sigma0 > 0");
        }
        if self.outer == 0 {
            return bad("at least one outer draw required");
        }
        Ok(())
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<NuisanceDraw> {
        let r_e = uniform(rng, self.r_e);
        let r_f = uniform(rng, (r_e + self.min_duration, self.r_f_max));
        let bubble = BubbleSpec::new(r_e, r_f, uniform(rng, self.c), uniform(rng, self.alpha))?;
        let vol = VolSpec::LogAr1 {
            sigma0: uniform(rng, self.sigma0),
            eta: uniform(rng, self.eta),
            persistence: Persistence::IteratedLog,
        };
        Ok(NuisanceDraw { bubble, vol })
    }
}

/// Averages, over `sampler.outer` nuisance draws, the `q`-quantile of
/// `b / outer` replications simulated under each draw.
pub fn calibrate_alternative(
    sizes: &[usize],
    b: usize,
    q: f64,
    sampler: &NuisanceSampler,
    variant: Variant,
    seed: u64,
) -> Result<CalibrationTable> {
    check_args(sizes, b, q)?;
    sampler.validate()?;
    let inner = b / sampler.outer;
    if inner < 2 {
        return Err(Error::InvalidSpec(format!(
            "{b} replications cannot be split over {} nuisance draws",
            sampler.outer
        )));
    }
    let mut values = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let master = derive_seed(seed, n as u64);
        let batch_quantiles = (0..sampler.outer as u64)
            .into_par_iter()
            .map(|k| {
                let batch_master = derive_seed(master, k);
                let draw = sampler.draw(&mut replication_rng(master, k))?;
                let stats = (0..inner as u64)
                    .map(|rep| {
                        let spec = DgpSpec::bubble(n, draw.bubble, draw.vol, replication_seed(batch_master, rep));
                        full_sample_stat(&spec, variant)
                    })
                    .collect::<Result<Vec<f64>>>()?;
                Ok(quantile(&stats, q))
            })
            .collect::<Result<Vec<f64>>>()?;
        values.push(crate::stats::mean(&batch_quantiles));
    }
    let table = CalibrationTable {
        hypothesis: Hypothesis::AlternativeRandomized,
        sizes: sizes.to_vec(),
        quantile_level: q,
        values,
        replications: inner * sampler.outer,
        variant,
        seed,
    };
    table.validate()?;
    Ok(table)
}

/// Least-squares `d` in `value_n ~ ln(n) / d`.
pub fn fit_log_divisor(table: &CalibrationTable) -> Result<f64> {
    let mut sll = 0.0;
    let mut svl = 0.0;
    for (&n, &v) in table.sizes.iter().zip(&table.values) {
        let l = (n as f64).ln();
        sll += l * l;
        svl += v * l;
    }
    if svl.abs() < f64::EPSILON * sll {
        return Err(Error::Domain("table values are orthogonal to ln(n); no divisor fits".into()));
    }
    Ok(sll / svl)
}

/// Largest `|value_n - ln(n) / d|` over the table.
pub fn max_log_rule_deviation(table: &CalibrationTable, divisor: f64) -> f64 {
    table
        .sizes
        .iter()
        .zip(&table.values)
        .map(|(&n, &v)| (v - (n as f64).ln() / divisor).abs())
        .fold(0.0, f64::max)
}

/// Grid `start, start + step, ..., <= end`.
pub fn size_grid(start: usize, end: usize, step: usize) -> Vec<usize> {
    (start..=end).step_by(step.max(1)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(values: Vec<f64>) -> CalibrationTable {
        CalibrationTable {
            hypothesis: Hypothesis::NullUnitRoot,
            sizes: vec![100, 200, 400],
            quantile_level: 0.9,
            values,
            replications: 1000,
            variant: Variant::Coefficient,
            seed: 1,
        }
    }

    #[test]
    fn interpolation_and_clamping() {
        let t = table(vec![1.0, 2.0, 4.0]);
        assert_eq!(t.value_at(50.0), 1.0);
        assert_eq!(t.value_at(150.0), 1.5);
        assert_eq!(t.value_at(200.0), 2.0);
        assert_eq!(t.value_at(300.0), 3.0);
        assert_eq!(t.value_at(1e6), 4.0);
        assert_eq!(t.value_for(200), Some(2.0));
        assert_eq!(t.value_for(201), None);
    }

    #[test]
    fn invariants_enforced() {
        let mut t = table(vec![1.0, 2.0, f64::NAN]);
        assert!(t.validate().is_err());
        t.values[2] = 3.0;
        t.validate().unwrap();
        t.sizes = vec![100, 100, 400];
        assert!(t.validate().is_err());
        assert!(calibrate_null(&[100], 50, 0.9, &VolSpec::homoskedastic(), Variant::Coefficient, 1).is_err());
        assert!(calibrate_null(&[100], 100, 1.0, &VolSpec::homoskedastic(), Variant::Coefficient, 1).is_err());
    }

    #[test]
    fn divisor_fit_recovers_exact_rule() {
        let sizes = size_grid(500, 1000, 50);
        let t = CalibrationTable {
            values: sizes.iter().map(|&n| (n as f64).ln() / 2.0).collect(),
            sizes,
            ..table(vec![])
        };
        assert!((fit_log_divisor(&t).unwrap() - 2.0).abs() < 1e-12);
        assert!(max_log_rule_deviation(&t, 2.0) < 1e-12);
    }

    #[test]
    fn csv_round_trip() {
        let t = table(vec![0.5, 0.6, 0.7]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("hypothesis,variant,n,q,B,value,seed\nH0,coefficient,100,0.9,1000,0.5,1\n"));
        let back = CalibrationTable::read_csv(text.as_bytes()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn null_table_is_deterministic_and_ordered_in_q() {
        let vol = VolSpec::homoskedastic();
        let a = calibrate_null(&[60, 120], 200, 0.9, &vol, Variant::Coefficient, 5).unwrap();
        let b = calibrate_null(&[60, 120], 200, 0.9, &vol, Variant::Coefficient, 5).unwrap();
        assert_eq!(a, b);
        let med = calibrate_null(&[60, 120], 200, 0.5, &vol, Variant::Coefficient, 5).unwrap();
        for (m, u) in med.values.iter().zip(&a.values) {
            assert!(m <= u);
            assert!(*m < 0.0);
        }
    }

    #[test]
    fn sampler_respects_ordering() {
        let s = NuisanceSampler::default();
        s.validate().unwrap();
        let mut rng = replication_rng(3, 0);
        for _ in 0..500 {
            let d = s.draw(&mut rng).unwrap();
            assert!(d.bubble.r_f >= d.bubble.r_e + 0.15 && d.bubble.r_f <= 0.8);
            assert!((0.3..=0.7).contains(&d.bubble.alpha));
        }
        let bad = NuisanceSampler { r_e: (0.5, 0.2), ..s };
        assert!(bad.validate().is_err());
    }
}
