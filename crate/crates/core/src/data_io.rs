//! UCR-format datasets, single-series CSV files and run reports.
//!
//! # UCR text format
//!
//! One series per line: an integer class label followed by the observations.
//! Fields may be separated by commas, tabs or spaces. Trailing `NaN` values
//! are padding and are dropped, so variable-length archives load as-is.
//!
//! Multivariate data uses the same layout behind a `# d=<dims>` header line;
//! each line then holds the label and `T × d` values in time-major order
//! (all features of step 0, then step 1, ...).
//!
//! # Report formats
//!
//! JSON reports serialise a [`ResultReport`] as-is. CSV reports depend on the
//! payload:
//!
//! | payload       | columns                               |
//! |---------------|---------------------------------------|
//! | accuracy      | `dataset,kind,gamma,k,accuracy`       |
//! | barycenter    | one row per time step, one column per feature, no header |
//! | divergences   | `x,y,kind,gamma,value`                |
//! | trace         | `iteration,value`                     |
//!
//! Floats are written in shortest round-trip form, so re-reading them gives
//! back the same bits.

use std::fs;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::classify::{format_accuracy, LabeledDataset};
use crate::costs::TimeSeries;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadOptions {
    /// Z-normalise every series after loading (per feature).
    pub z_normalize: bool,
}

fn split_fields(line: &str) -> impl Iterator<Item = &str> {
    line.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|f| !f.is_empty())
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

fn parse_dims_header(line: &str) -> Option<usize> {
    let body = line.trim_start_matches('#').trim();
    body.strip_prefix("d=")
        .or_else(|| body.strip_prefix("d ="))
        .and_then(|v| v.trim().parse().ok())
}

/// Parses UCR-format text. `origin` is only used in error messages.
pub fn parse_ucr(text: &str, origin: &Path, opts: LoadOptions) -> Result<LabeledDataset> {
    let mut dims = 1usize;
    let mut series = Vec::new();
    let mut labels = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('#') {
            if let Some(d) = parse_dims_header(line) {
                if d == 0 {
                    return Err(parse_err(origin, lineno, "feature count must be positive"));
                }
                dims = d;
            }
            continue;
        }
        let fields: Vec<&str> = split_fields(line).collect();
        if fields.len() < 2 {
            return Err(parse_err(origin, lineno, "expected a label and at least one value"));
        }
        let label_f: f64 = fields[0]
            .parse()
            .map_err(|_| parse_err(origin, lineno, format!("bad label `{}`", fields[0])))?;
        if label_f.fract() != 0.0 || !label_f.is_finite() {
            return Err(parse_err(origin, lineno, format!("label `{}` is not an integer", fields[0])));
        }
        let mut values = Vec::with_capacity(fields.len() - 1);
        for f in &fields[1..] {
            let v: f64 = f
                .parse()
                .map_err(|_| parse_err(origin, lineno, format!("bad value `{f}`")))?;
            values.push(v);
        }
        while values.last().is_some_and(|v| v.is_nan()) {
            values.pop();
        }
        if values.is_empty() {
            return Err(parse_err(origin, lineno, "series has no observations"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(parse_err(origin, lineno, "non-finite value inside the series"));
        }
        if values.len() % dims != 0 {
            return Err(parse_err(
                origin,
                lineno,
                format!("{} values is not a multiple of d = {dims}", values.len()),
            ));
        }
        let t = values.len() / dims;
        let ts = TimeSeries::new(Array2::from_shape_vec((t, dims), values).expect("shape checked"))?;
        series.push(if opts.z_normalize { ts.z_normalized() } else { ts });
        labels.push(label_f as i64);
    }
    if series.is_empty() {
        return Err(parse_err(origin, 0, "no series found"));
    }
    LabeledDataset::new(series, labels)
}

/// Loads a UCR-format dataset file.
pub fn load_ucr(path: impl AsRef<Path>, opts: LoadOptions) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_ucr(&text, path, opts)
}

/// Reads a single series stored one time step per row (features separated
/// by commas or whitespace). Lines starting with `#` are skipped.
pub fn read_series_csv(path: impl AsRef<Path>) -> Result<TimeSeries> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = split_fields(line)
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| parse_err(path, lineno + 1, format!("bad value `{f}`")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(parse_err(path, lineno + 1, "rows have different widths"));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(parse_err(path, 0, "no time steps found"));
    }
    let d = rows[0].len();
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    TimeSeries::new(Array2::from_shape_vec((flat.len() / d, d), flat).expect("rectangular"))
}

/// Shortest decimal that parses back to the same `f64`, switching to
/// exponent notation for very small or very large magnitudes.
pub fn format_f64(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) || !v.is_finite() {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

fn matrix_csv(m: &Array2<f64>) -> String {
    let mut out = String::new();
    for row in m.rows() {
        let line: Vec<String> = row.iter().map(|v| format_f64(*v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// Writes a series one time step per row.
pub fn write_series_csv(path: impl AsRef<Path>, series: &TimeSeries) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, matrix_csv(series.values())).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub kind: String,
    pub cost: String,
    pub gamma: Option<f64>,
    pub seed: u64,
    pub dataset: Option<String>,
    /// Wall-clock seconds; left out of machine output unless requested.
    pub wall_time_secs: Option<f64>,
    /// Free-form extra settings, e.g. the CV aggregation rule.
    #[serde(default)]
    pub extra: std::collections::BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyRow {
    pub dataset: String,
    pub kind: String,
    pub gamma: Option<f64>,
    pub k: Option<usize>,
    /// Fraction in `[0, 1]`, `None` for NA.
    pub accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceRow {
    pub x: String,
    pub y: String,
    pub kind: String,
    pub gamma: Option<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Payload {
    Accuracy { rows: Vec<AccuracyRow> },
    Barycenter { values: Array2<f64>, objective_trace: Vec<f64> },
    Divergences { rows: Vec<DivergenceRow> },
    Trace { values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultReport {
    pub metadata: RunMetadata,
    pub payload: Payload,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::InvalidParameter(format!("unknown format `{other}`"))),
        }
    }
}

fn opt_f64(v: Option<f64>) -> String {
    v.map(format_f64).unwrap_or_default()
}

/// Renders a report in the given format.
pub fn render_report(report: &ResultReport, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Json => Ok(serde_json::to_string_pretty(report)? + "\n"),
        ReportFormat::Csv => match &report.payload {
            Payload::Barycenter { values, .. } => Ok(matrix_csv(values)),
            payload => {
                let mut w = csv::Writer::from_writer(Vec::new());
                match payload {
                    Payload::Accuracy { rows } => {
                        w.write_record(["dataset", "kind", "gamma", "k", "accuracy"])?;
                        for r in rows {
                            w.write_record([
                                r.dataset.clone(),
                                r.kind.clone(),
                                opt_f64(r.gamma),
                                r.k.map(|k| k.to_string()).unwrap_or_default(),
                                format_accuracy(r.accuracy),
                            ])?;
                        }
                    }
                    Payload::Divergences { rows } => {
                        w.write_record(["x", "y", "kind", "gamma", "value"])?;
                        for r in rows {
                            w.write_record([
                                r.x.clone(),
                                r.y.clone(),
                                r.kind.clone(),
                                opt_f64(r.gamma),
                                format_f64(r.value),
                            ])?;
                        }
                    }
                    Payload::Trace { values } => {
                        w.write_record(["iteration", "value"])?;
                        for (i, v) in values.iter().enumerate() {
                            w.write_record([i.to_string(), format_f64(*v)])?;
                        }
                    }
                    Payload::Barycenter { .. } => unreachable!(),
                }
                let bytes = w.into_inner().map_err(|e| Error::Numerical(e.to_string()))?;
                Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
            }
        },
    }
}

pub fn write_report(report: &ResultReport, format: ReportFormat, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = render_report(report, format)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_report_json(path: impl AsRef<Path>) -> Result<ResultReport> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}
