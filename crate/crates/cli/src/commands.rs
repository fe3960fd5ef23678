use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use bubblestamp_core::calibration::{
    calibrate_alternative, calibrate_null, fit_log_divisor, max_log_rule_deviation, NuisanceSampler,
};
use bubblestamp_core::dating::{datestamp, datestamp_pwy, write_episode_csv, EpisodeRecord, Tail};
use bubblestamp_core::dgp::{fraction_index, simulate, simulate_pwy_reinit, DgpConfig};
use bubblestamp_core::estimator::{fit_adf, select_lag, Window};
use bubblestamp_core::experiments::{
    bubble_grid, format_accuracy_table, format_power_table, pwy_threshold, run_grid, run_reinit_gap,
    write_cells_csv, write_gap_csv, CellResult, Design, ExperimentGrid, Rules, ACCURACY_ROWS, POWER_CELLS,
};
use bubblestamp_core::inference::{infer_root, RootInference};
use bubblestamp_core::svadf::recursive_path;
use bubblestamp_core::{
    BubbleSpec, CalibrationTable, Episode, LagSpec, PersistenceFilter, PriceSeries,
    RecursiveConfig, StatPath, ThresholdRule, Variant, VolSpec,
};
use chrono::{Datelike, Days, NaiveDate, Weekday};
use rayon::prelude::*;

use crate::args::*;
use crate::error::{CliError, CliResult};
use crate::ingest::{load_series, rolling_volatility, write_series_csv};

const LAG_SIG_LEVEL: f64 = 0.05;

pub fn provenance(seed: Option<u64>) -> String {
    let seed = seed.map_or_else(|| "none".to_string(), |s| s.to_string());
    format!("bubblestamp {} seed={seed}", env!("CARGO_PKG_VERSION"))
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

fn sink(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_all(out: &mut dyn Write, text: &str) -> CliResult<()> {
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| CliError::Io(e.to_string()))
}

fn comment_line(out: &mut dyn Write, seed: Option<u64>) -> CliResult<()> {
    writeln!(out, "# {}", provenance(seed)).map_err(|e| CliError::Io(e.to_string()))
}

fn variant(v: VariantArg) -> Variant {
    match v {
        VariantArg::Coefficient => Variant::Coefficient,
        VariantArg::T => Variant::TType,
    }
}

fn vol_spec(kind: VolKind, eta: f64, alpha_g: f64, beta_g: f64) -> CliResult<VolSpec> {
    let vol = match kind {
        VolKind::Constant => VolSpec::homoskedastic(),
        VolKind::Logar1 => VolSpec::log_ar1(eta),
        VolKind::Garch => VolSpec::garch(alpha_g, beta_g),
    };
    vol.validate()?;
    Ok(vol)
}

fn recursive_config(a: &StatArgs) -> RecursiveConfig {
    RecursiveConfig {
        r0: a.r0,
        variant: variant(a.variant),
        lags: match a.max_lag {
            Some(max_lag) => LagSpec::Auto {
                max_lag,
                sig_level: LAG_SIG_LEVEL,
            },
            None => LagSpec::Fixed(a.lags),
        },
    }
}

fn read_table(path: &Path) -> CliResult<Arc<CalibrationTable>> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let table = CalibrationTable::read_csv(file)?;
    Ok(Arc::new(table))
}

fn rule(fixed: Option<f64>, table: Option<&PathBuf>, divisor: f64, side: Tail) -> CliResult<ThresholdRule> {
    Ok(match (fixed, table) {
        (Some(v), _) => ThresholdRule::fixed(v, side),
        (None, Some(p)) => ThresholdRule::calibrated(read_table(p)?, side),
        (None, None) => ThresholdRule::log_rule(divisor, side)?,
    })
}

fn origination_rule(a: &OriginationArgs) -> CliResult<ThresholdRule> {
    rule(a.orig_fixed, a.orig_table.as_ref(), a.orig_divisor, Tail::Right)
}

/// Date-stamping rules resolved once and shared across inputs.
enum Stamper {
    Svadf {
        orig: ThresholdRule,
        coll: ThresholdRule,
        filter: PersistenceFilter,
    },
    Pwy(ThresholdRule),
}

impl Stamper {
    fn new(a: &RuleArgs, seed: u64, max_n: usize, r0: f64) -> CliResult<Self> {
        Ok(match a.method {
            MethodArg::Svadf => Stamper::Svadf {
                orig: origination_rule(&a.origination)?,
                coll: rule(a.coll_fixed, a.coll_table.as_ref(), a.coll_divisor, Tail::Left)?,
                filter: PersistenceFilter {
                    min_above: a.min_above,
                    min_below: a.min_below,
                    consolidation_gap: a.gap,
                },
            },
            MethodArg::Pwy => Stamper::Pwy(match (a.pwy_fixed, &a.pwy_table) {
                (Some(v), _) => ThresholdRule::fixed(v, Tail::Right),
                (None, Some(p)) => ThresholdRule::calibrated(read_table(p)?, Tail::Right),
                (None, None) => {
                    let min_size = fraction_index(max_n, r0).max(bubblestamp_core::dgp::MIN_SAMPLE);
                    pwy_threshold(min_size, max_n, a.pwy_replications, 0.9, seed)?
                }
            }),
        })
    }

    fn curves(&self) -> (&ThresholdRule, &ThresholdRule) {
        match self {
            Stamper::Svadf { orig, coll, .. } => (orig, coll),
            Stamper::Pwy(r) => (r, r),
        }
    }

    fn stamp(&self, path: &StatPath, series: &PriceSeries) -> CliResult<Option<Episode>> {
        let ep = match self {
            Stamper::Svadf { orig, coll, filter } => datestamp(path, orig, coll, filter)?,
            Stamper::Pwy(r) => datestamp_pwy(path, r)?,
        };
        Ok(ep.map(|e| e.with_dates(series)))
    }
}

fn load_all(a: &SeriesArgs) -> CliResult<Vec<PriceSeries>> {
    a.inputs
        .par_iter()
        .map(|p| load_series(p, &a.date_column, &a.price_column, a.log_prices))
        .collect()
}

fn business_days(start: NaiveDate, count: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(count);
    let mut d = start;
    while out.len() < count {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d = d + Days::new(1);
    }
    out
}

pub fn simulate_cmd(a: &SimulateArgs) -> CliResult<()> {
    let cfg = DgpConfig {
        n: Some(a.n),
        seed: Some(a.seed.seed),
        x0: Some(a.x0),
        r_e: a.r_e,
        r_f: a.r_f,
        c: Some(a.c),
        alpha: Some(a.alpha),
        vol: Some(a.vol.name().to_string()),
        sigma0: Some(a.sigma0),
        eta: Some(a.eta),
        phi: a.phi,
        alpha_g: Some(a.alpha_g),
        beta_g: Some(a.beta_g),
    };
    let spec = cfg.to_spec()?;
    let sim = match a.reset_sd {
        Some(sd) => simulate_pwy_reinit(&spec, sd)?,
        None => simulate(&spec)?,
    };
    let dates = business_days(a.start_date, sim.len());
    let series = PriceSeries::with_dates(sim.values().to_vec(), dates, "simulated")?;
    let out = sink(a.output.as_deref())?;
    write_series_csv(out, &series, &a.price_column, &provenance(Some(a.seed.seed)))
}

struct FullSample {
    delta_hat: f64,
    lag: usize,
    coefficient: f64,
    t: f64,
}

fn full_sample(series: &PriceSeries, cfg: &RecursiveConfig) -> CliResult<FullSample> {
    let window = Window::full(series.values())?;
    let lag = match cfg.lags {
        LagSpec::Fixed(l) => l,
        LagSpec::Auto { max_lag, sig_level } => select_lag(&window, max_lag, sig_level)?,
    };
    let fit = fit_adf(&window, lag)?;
    let n = window.tau();
    let eval = |v: Variant| v.evaluate(n, fit.delta_hat, fit.sum_sq_demeaned, fit.sigma_hat_sq);
    Ok(FullSample {
        delta_hat: fit.delta_hat,
        lag,
        coefficient: eval(Variant::Coefficient),
        t: eval(Variant::TType),
    })
}

fn header(series: &PriceSeries) -> String {
    let mut s = format!("series {} (n = {}", series.label(), series.sample_size());
    if let Some(d) = series.dates() {
        let _ = write!(s, ", {} to {}", d[0], d[d.len() - 1]);
    }
    s + ")\n"
}

fn test_block(series: &PriceSeries, cfg: &RecursiveConfig, orig: &ThresholdRule) -> CliResult<String> {
    let fs = full_sample(series, cfg)?;
    let n = series.sample_size();
    let cv = orig.value(n, 1.0)?;
    let stat = match cfg.variant {
        Variant::Coefficient => fs.coefficient,
        Variant::TType => fs.t,
    };
    let decision = if stat > cv {
        "explosive evidence"
    } else {
        "no explosive evidence"
    };
    let mut s = String::new();
    let _ = writeln!(s, "  delta_hat              {:.6}", fs.delta_hat);
    let _ = writeln!(s, "  lag order              {}", fs.lag);
    let _ = writeln!(s, "  coefficient statistic  {:.6}", fs.coefficient);
    let _ = writeln!(s, "  t statistic            {:.6}", fs.t);
    let _ = writeln!(s, "  threshold              {:.6} ({})", cv, orig.describe());
    let _ = writeln!(s, "  decision               {decision} ({} statistic)", cfg.variant.name());
    Ok(s)
}

pub fn test_cmd(a: &TestArgs) -> CliResult<()> {
    let cfg = recursive_config(&a.stat);
    let orig = origination_rule(&a.origination)?;
    let series = load_all(&a.series)?;
    let blocks = series
        .par_iter()
        .map(|s| Ok(header(s) + &test_block(s, &cfg, &orig)?))
        .collect::<CliResult<Vec<String>>>()?;
    write_all(&mut io::stdout().lock(), &blocks.concat())
}

pub fn datestamp_cmd(a: &DatestampArgs) -> CliResult<()> {
    let cfg = recursive_config(&a.stat);
    let series = load_all(&a.series)?;
    let max_n = series.iter().map(PriceSeries::sample_size).max().unwrap_or(0);
    let stamper = Stamper::new(&a.rules, a.seed.seed, max_n, cfg.r0)?;
    std::fs::create_dir_all(&a.out_dir).map_err(|e| CliError::io(&a.out_dir, e))?;
    let seed = (a.rules.method == MethodArg::Pwy).then_some(a.seed.seed);

    let results = series
        .par_iter()
        .map(|s| {
            let path = recursive_path(s, &cfg)?;
            let episode = stamper.stamp(&path, s)?;
            let file = a.out_dir.join(format!("{}_path.csv", s.label()));
            let mut out = create(&file)?;
            comment_line(&mut out, seed)?;
            path.write_csv(&mut out, s.dates(), Some(stamper.curves()))?;
            if let Some(w) = a.vol_window {
                write_volatility(&a.out_dir.join(format!("{}_volatility.csv", s.label())), s, w)?;
            }
            Ok(episode)
        })
        .collect::<CliResult<Vec<Option<Episode>>>>()?;

    let records: Vec<EpisodeRecord> = series
        .iter()
        .zip(&results)
        .map(|(s, e)| EpisodeRecord::new(s.label(), e.as_ref()))
        .collect();
    let file = a.out_dir.join("episodes.csv");
    let mut out = create(&file)?;
    comment_line(&mut out, seed)?;
    write_episode_csv(&mut out, &records)?;

    let mut text = String::new();
    for (s, e) in series.iter().zip(&results) {
        match e {
            Some(e) => {
                let _ = writeln!(text, "{}: {e}", s.label());
            }
            None => {
                let _ = writeln!(text, "{}: no episode", s.label());
            }
        }
    }
    write_all(&mut io::stdout().lock(), &text)
}

fn write_volatility(file: &Path, series: &PriceSeries, window: usize) -> CliResult<()> {
    let vol = rolling_volatility(series, window)?;
    let mut out = create(file)?;
    comment_line(&mut out, None)?;
    let io_err = |e: io::Error| CliError::Io(e.to_string());
    writeln!(out, "index,date,volatility").map_err(io_err)?;
    for (i, v) in vol.iter().enumerate() {
        let date = series.date_at(i).map(|d| d.to_string()).unwrap_or_default();
        let v = v.map(|x| x.to_string()).unwrap_or_default();
        writeln!(out, "{i},{date},{v}").map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

fn window_slice(series: &PriceSeries, start: Option<NaiveDate>, end: Option<NaiveDate>) -> CliResult<PriceSeries> {
    if start.is_none() && end.is_none() {
        return Ok(series.clone());
    }
    let dates = series.dates().expect("ingested series carry dates");
    let lo = start.map_or(0, |d| dates.partition_point(|x| *x < d));
    let hi = end.map_or(dates.len(), |d| dates.partition_point(|x| *x <= d));
    if hi <= lo + 2 {
        return Err(CliError::Usage(format!(
            "{}: estimation window holds {} observations",
            series.label(),
            hi.saturating_sub(lo)
        )));
    }
    Ok(PriceSeries::with_dates(
        series.values()[lo..hi].to_vec(),
        dates[lo..hi].to_vec(),
        series.label(),
    )?)
}

fn inference_block(inf: &RootInference) -> String {
    let mut s = String::new();
    let regime = match inf.regime {
        bubblestamp_core::Regime::SubUnity => "sub-unity (normal limit)",
        bubblestamp_core::Regime::Explosive => "explosive (Cauchy limit)",
    };
    let pct = inf.level * 100.0;
    let _ = writeln!(s, "  delta_hat              {:.6}", inf.delta_hat);
    let _ = writeln!(s, "  gamma_hat              {:.6}", inf.gamma_hat);
    let _ = writeln!(s, "  regime                 {regime}");
    let _ = writeln!(s, "  {pct:.0}% CI for delta      [{:.6}, {:.6}]", inf.ci_delta.0, inf.ci_delta.1);
    let _ = writeln!(s, "  {pct:.0}% CI for gamma      [{:.6}, {:.6}]", inf.ci_gamma.0, inf.ci_gamma.1);
    let _ = writeln!(s, "  classification         {}", inf.classify());
    s
}

pub fn infer_cmd(a: &InferArgs) -> CliResult<()> {
    let series = load_all(&a.series)?;
    let blocks = series
        .par_iter()
        .map(|s| {
            let w = window_slice(s, a.start, a.end)?;
            let inf = infer_root(&w, a.level)?;
            Ok(header(&w) + &inference_block(&inf))
        })
        .collect::<CliResult<Vec<String>>>()?;
    write_all(&mut io::stdout().lock(), &blocks.concat())
}

pub fn calibrate_cmd(a: &CalibrateArgs) -> CliResult<()> {
    let v = variant(a.variant);
    let seed = a.seed.seed;
    let table = match a.hypothesis {
        HypothesisArg::H0 => {
            let vol = vol_spec(a.vol, a.eta, a.alpha_g, a.beta_g)?;
            calibrate_null(&a.sizes, a.replications, a.q, &vol, v, seed)?
        }
        HypothesisArg::H1 => {
            let sampler = NuisanceSampler {
                outer: a.outer,
                ..NuisanceSampler::default()
            };
            calibrate_alternative(&a.sizes, a.replications, a.q, &sampler, v, seed)?
        }
    };
    let mut out = sink(a.output.as_deref())?;
    comment_line(&mut out, Some(seed))?;
    table.write_csv(&mut out)?;
    drop(out);
    if a.output.is_some() {
        let mut msg = format!("{} table at {} sizes", table.hypothesis.name(), table.sizes.len());
        if let Ok(d) = fit_log_divisor(&table) {
            let dev = max_log_rule_deviation(&table, d);
            let _ = write!(msg, "; fitted log divisor {d:.4}, max deviation {dev:.4}");
        }
        write_all(&mut io::stdout().lock(), &(msg + "\n"))?;
    }
    Ok(())
}

pub fn bench_cmd(a: &BenchArgs) -> CliResult<()> {
    let vol = vol_spec(a.vol, a.eta, a.alpha_g, a.beta_g)?;
    let seed = a.seed.seed;
    if a.experiment == Experiment::Gap {
        let ns: Vec<usize> = [a.n / 4, a.n / 2, a.n, 2 * a.n].into_iter().filter(|&n| n >= 100).collect();
        let regimes = vec![
            ("constant".to_string(), VolSpec::homoskedastic()),
            (vol.kind_name().to_string(), vol),
        ];
        let points = run_reinit_gap(&ns, a.replications, &Default::default(), &regimes, seed)?;
        let mut text = format!("{:>6} {:<10} {:>12} {:>14}\n", "n", "regime", "mean gap", "baseline gap");
        for p in &points {
            let _ = writeln!(text, "{:>6} {:<10} {:>12.4} {:>14.4}", p.n, p.regime, p.mean_gap, p.pwy_mean_gap);
        }
        write_all(&mut io::stdout().lock(), &text)?;
        if let Some(path) = &a.output {
            let mut out = create(path)?;
            comment_line(&mut out, Some(seed))?;
            write_gap_csv(&mut out, &points)?;
        }
        return Ok(());
    }

    let designs: Vec<Design> = match a.experiment {
        Experiment::Power => bubble_grid(a.n, &POWER_CELLS, a.c, a.alpha, vol)?,
        Experiment::Accuracy => ACCURACY_ROWS
            .iter()
            .map(|&(r_e, r_f, alpha)| {
                Ok(Design {
                    n: a.n,
                    bubble: Some(BubbleSpec::new(r_e, r_f, a.c, alpha)?),
                    vol,
                })
            })
            .collect::<CliResult<_>>()?,
        Experiment::Size => vec![Design {
            n: a.n,
            bubble: None,
            vol,
        }],
        Experiment::Gap => unreachable!(),
    };
    let cfg = RecursiveConfig::default();
    let pwy = pwy_threshold(fraction_index(a.n, cfg.r0), a.n, a.pwy_replications, 0.9, seed)?;
    let grid = ExperimentGrid::new(designs, a.replications, Rules::with_pwy(pwy), seed);
    let cells = run_grid(&grid)?;
    let text = match a.experiment {
        Experiment::Power => format_power_table(&cells),
        Experiment::Accuracy => format_accuracy_table(&cells),
        _ => size_table(&cells),
    };
    write_all(&mut io::stdout().lock(), &text)?;
    if let Some(path) = &a.output {
        let mut out = create(path)?;
        comment_line(&mut out, Some(seed))?;
        write_cells_csv(&mut out, &cells)?;
    }
    Ok(())
}

fn size_table(cells: &[CellResult]) -> String {
    let mut s = format!("{:<8} {:>6} {:>16}\n", "method", "n", "spurious rate");
    for c in cells {
        let _ = writeln!(s, "{:<8} {:>6} {:>16.4}", c.method.name(), c.design.n, c.orig_rate);
    }
    s
}

pub fn report_cmd(a: &ReportArgs) -> CliResult<()> {
    let cfg = recursive_config(&a.stat);
    let series = load_all(&a.series)?;
    let max_n = series.iter().map(PriceSeries::sample_size).max().unwrap_or(0);
    let stamper = Stamper::new(&a.rules, a.seed.seed, max_n, cfg.r0)?;
    let orig = match &stamper {
        Stamper::Svadf { orig, .. } => orig.clone(),
        Stamper::Pwy(r) => r.clone(),
    };
    let blocks = series
        .par_iter()
        .map(|s| {
            let mut text = header(s);
            text += "full-sample test\n";
            text += &test_block(s, &cfg, &orig)?;
            text += "date-stamping\n";
            let path = recursive_path(s, &cfg)?;
            let _ = match stamper.stamp(&path, s)? {
                Some(e) => writeln!(text, "  {e}"),
                None => writeln!(text, "  no episode"),
            };
            text += "root inference\n";
            match infer_root(s, a.level) {
                Ok(inf) => text += &inference_block(&inf),
                Err(e) => {
                    let _ = writeln!(text, "  unavailable: {e}");
                }
            }
            if let Ok(vol) = rolling_volatility(s, a.vol_window) {
                if let Some(Some(v)) = vol.last() {
                    let _ = writeln!(text, "latest rolling volatility ({} obs)  {v:.6}", a.vol_window);
                }
            }
            Ok(text)
        })
        .collect::<CliResult<Vec<String>>>()?;
    let mut out = sink(a.output.as_deref())?;
    write_all(&mut out, &blocks.join("\n"))
}
