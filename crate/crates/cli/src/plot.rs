//! Long-format series for plotting, derived from a sweep CSV.

use std::io::{Read, Write};

use crate::error::CliError;
use crate::sweep::CSV_HEADER;

/// Normal 97.5% quantile for 95% confidence half-widths.
const Z95: f64 = 1.959_963_984_540_054;

/// `(series name, value column, standard-error column)`.
const SERIES: [(&str, &str, Option<&str>); 9] = [
    ("mc_exact", "mc_exact_mean", Some("mc_exact_se")),
    ("mc_lower", "mc_lower_mean", Some("mc_lower_se")),
    ("mc_upper", "mc_upper_mean", Some("mc_upper_se")),
    ("cf_lower", "cf_lower", None),
    ("cf_upper", "cf_upper", None),
    ("kl_log2lnN", "kl_log2lnN", None),
    ("ku_log2lnN", "ku_log2lnN", None),
    ("mu_hat", "mu_hat", Some("mu_hat_se")),
    ("busy_fraction", "busy_fraction", None),
];

fn column(name: &str) -> usize {
    CSV_HEADER.iter().position(|&h| h == name).expect("known column")
}

fn parse_cell(text: &str, line: u64, col: &str) -> Result<Option<f64>, CliError> {
    if text.is_empty() {
        return Ok(None);
    }
    match text.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Some(v)),
        _ => Err(CliError::MalformedCsv(format!("line {line}, column {col}: '{text}' is not a finite number"))),
    }
}

/// Converts a sweep CSV into `series_name,N,value,ci_half_width` rows,
/// series by series. Empty cells are skipped. Returns the number of data
/// rows written.
pub fn emit_plot_data<R: Read, W: Write>(input: R, output: W) -> Result<usize, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .has_headers(true)
        .from_reader(input);
    let header = reader.headers()?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(CliError::MalformedCsv(format!(
            "unexpected header '{}'",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }

    let mut rows: Vec<(usize, Vec<Option<f64>>)> = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let n: usize = record[0]
            .parse()
            .map_err(|_| CliError::MalformedCsv(format!("line {line}: N = '{}' is not a count", &record[0])))?;
        let values = (1..CSV_HEADER.len())
            .map(|i| parse_cell(&record[i], line, CSV_HEADER[i]))
            .collect::<Result<Vec<_>, _>>()?;
        let mut full = vec![None];
        full.extend(values);
        rows.push((n, full));
    }

    let mut w = csv::Writer::from_writer(output);
    w.write_record(["series_name", "N", "value", "ci_half_width"])?;
    let mut written = 0;
    for (name, value_col, se_col) in SERIES {
        let vi = column(value_col);
        let si = se_col.map(column);
        for (n, cells) in &rows {
            let Some(value) = cells[vi] else { continue };
            let ci = si.and_then(|i| cells[i]).map(|se| format!("{}", Z95 * se)).unwrap_or_default();
            w.write_record([name.to_string(), n.to_string(), format!("{value}"), ci])?;
            written += 1;
        }
    }
    w.flush()?;
    Ok(written)
}
