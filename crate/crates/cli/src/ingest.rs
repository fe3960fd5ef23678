//! CSV price ingestion, series output and rolling volatility.

use std::io;
use std::path::Path;

use bubblestamp_core::dgp::MIN_SAMPLE;
use bubblestamp_core::PriceSeries;
use chrono::NaiveDate;

use crate::error::{CliError, CliResult};

/// Reads `date_column` (ISO-8601 dates) and `price_column` (decimals) from a
/// headed CSV. Lines starting with `#` are skipped. Rows are sorted by date;
/// duplicate dates are rejected.
pub fn ingest_csv(path: &Path, date_column: &str, price_column: &str) -> CliResult<PriceSeries> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "series".into());
    read_prices(file, date_column, price_column, &label)
}

pub fn read_prices<R: io::Read>(
    input: R,
    date_column: &str,
    price_column: &str,
    label: &str,
) -> CliResult<PriceSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = rdr
        .headers()
        .map_err(|e| CliError::Schema(format!("cannot read header: {e}")))?
        .clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Schema(format!("missing column '{name}'")))
    };
    let di = find(date_column)?;
    let pi = find(price_column)?;

    let mut rows: Vec<(NaiveDate, f64, u64)> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            CliError::Data(format!("line {line}: {e}"))
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let raw_date = rec.get(di).unwrap_or("");
        let raw_price = rec.get(pi).unwrap_or("");
        let date = NaiveDate::parse_from_str(raw_date, "%Y-%m-%d").map_err(|_| {
            CliError::Data(format!("line {line}: cannot parse date '{raw_date}' in column '{date_column}'"))
        })?;
        let price: f64 = raw_price.parse().map_err(|_| {
            CliError::Data(format!("line {line}: cannot parse price '{raw_price}' in column '{price_column}'"))
        })?;
        if !price.is_finite() {
            return Err(CliError::Data(format!("line {line}: price must be finite")));
        }
        rows.push((date, price, line));
    }
    if rows.is_empty() {
        return Err(CliError::Data("no data rows".into()));
    }
    rows.sort_by_key(|r| r.0);
    if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(CliError::Data(format!(
            "duplicate date {} (lines {} and {})",
            w[0].0, w[0].2, w[1].2
        )));
    }
    let dates = rows.iter().map(|r| r.0).collect();
    let values = rows.iter().map(|r| r.1).collect();
    Ok(PriceSeries::with_dates(values, dates, label)?)
}

/// Loads a series for analysis: at least [`MIN_SAMPLE`] rows, optionally in logs.
pub fn load_series(path: &Path, date_column: &str, price_column: &str, log_prices: bool) -> CliResult<PriceSeries> {
    let series = ingest_csv(path, date_column, price_column)?;
    if series.len() < MIN_SAMPLE {
        return Err(CliError::Data(format!(
            "{}: at least {MIN_SAMPLE} rows required, got {}",
            path.display(),
            series.len()
        )));
    }
    Ok(if log_prices { series.log_prices()? } else { series })
}

/// Writes `date,<price_column>` rows (or `index,<price_column>` without
/// dates) after a `#` comment line. Values use the shortest representation
/// that round-trips exactly.
pub fn write_series_csv<W: io::Write>(
    mut out: W,
    series: &PriceSeries,
    price_column: &str,
    comment: &str,
) -> CliResult<()> {
    let io_err = |e: io::Error| CliError::Io(e.to_string());
    writeln!(out, "# {comment}").map_err(io_err)?;
    let first = if series.dates().is_some() { "date" } else { "index" };
    writeln!(out, "{first},{price_column}").map_err(io_err)?;
    for (i, v) in series.values().iter().enumerate() {
        match series.date_at(i) {
            Some(d) => writeln!(out, "{d},{v}"),
            None => writeln!(out, "{i},{v}"),
        }
        .map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

pub const DEFAULT_VOL_WINDOW: usize = 40;

/// Standard deviation of the last `window` log-returns at each `t >= window`;
/// `None` during the warm-up.
pub fn rolling_volatility(series: &PriceSeries, window: usize) -> CliResult<Vec<Option<f64>>> {
    if window < 2 {
        return Err(CliError::Usage(format!("volatility window must be at least 2, got {window}")));
    }
    if series.len() <= window {
        return Err(CliError::Data(format!(
            "series of length {} is too short for a {window}-observation window",
            series.len()
        )));
    }
    let logs = series.log_prices()?;
    let lp = logs.values();
    let returns: Vec<f64> = lp.windows(2).map(|w| w[1] - w[0]).collect();
    let mut out = vec![None; series.len()];
    for (t, slot) in out.iter_mut().enumerate().skip(window) {
        let r = &returns[t - window..t];
        let m = r.iter().sum::<f64>() / window as f64;
        let var = r.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (window - 1) as f64;
        *slot = Some(var.sqrt());
    }
    Ok(out)
}
