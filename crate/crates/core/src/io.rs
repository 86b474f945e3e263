//! CSV ingestion of microdata and serialization of reports, experiments and
//! permutation tables.
//!
//! Experiment files use a long layout (one value per line) and print every
//! real with 17 significant digits, so a parsed file reproduces the
//! in-memory values bit for bit.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::value::RawValue;

use crate::error::{Error, Result};
use crate::harness::ReplicationSummary;
use crate::metrics::{Metric, MetricReport};
use crate::stats::PermutationDistanceRecord;
use crate::types::{Correlation, ExperimentResult, NumericMatrix, RankMatrix};

/// Where to read a dataset from and which columns to keep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetSource {
    pub path: PathBuf,
    /// Header names, or 0-based indices when no header name matches.
    /// `None` keeps every column.
    pub selected_columns: Option<Vec<String>>,
    pub header: bool,
}

impl DatasetSource {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        Self {
            path: path.into(),
            selected_columns: None,
            header: true,
        }
    }

    pub fn columns<S: Into<String>>(mut self, columns: impl IntoIterator<Item = S>) -> Self {
        self.selected_columns = Some(columns.into_iter().map(Into::into).collect());
        self
    }

    pub fn header(mut self, header: bool) -> Self {
        self.header = header;
        self
    }
}

fn resolve_columns(source: &DatasetSource, names: &[String], width: usize) -> Result<Vec<usize>> {
    let Some(selection) = &source.selected_columns else {
        return Ok((0..width).collect());
    };
    if selection.is_empty() {
        return Err(Error::invalid("column selection is empty"));
    }
    selection
        .iter()
        .map(|sel| {
            if let Some(pos) = names.iter().position(|n| n == sel) {
                return Ok(pos);
            }
            match sel.parse::<usize>() {
                Ok(idx) if idx < width => Ok(idx),
                _ => Err(Error::invalid(format!(
                    "column '{sel}' not found in {}",
                    source.path.display()
                ))),
            }
        })
        .collect()
}

/// Loads the selected columns of a CSV file. Rows are kept in file order;
/// `row` in parse errors counts data rows from 1.
pub fn load_csv(source: &DatasetSource) -> Result<NumericMatrix> {
    let file = File::open(&source.path).map_err(|e| Error::io(&source.path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(source.header)
        .trim(csv::Trim::All)
        .from_reader(file);

    let csv_err = |row: usize, e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(&source.path, io),
        other => Error::Parse {
            row,
            column: String::from("-"),
            message: format!("{other:?}"),
        },
    };

    let header_names: Vec<String> = if source.header {
        reader
            .headers()
            .map_err(|e| csv_err(0, e))?
            .iter()
            .map(str::to_owned)
            .collect()
    } else {
        Vec::new()
    };

    let mut selected: Option<Vec<usize>> = if source.header {
        Some(resolve_columns(source, &header_names, header_names.len())?)
    } else {
        None
    };

    let mut n = 0;
    let mut values = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let row = idx + 1;
        let record = record.map_err(|e| csv_err(row, e))?;
        let cols = match &selected {
            Some(c) => c,
            None => selected.insert(resolve_columns(source, &header_names, record.len())?),
        };
        for &j in cols.iter() {
            let column = header_names
                .get(j)
                .cloned()
                .unwrap_or_else(|| j.to_string());
            let field = record.get(j).ok_or_else(|| Error::Parse {
                row,
                column: column.clone(),
                message: "missing field".into(),
            })?;
            let value: f64 = field.parse().map_err(|_| Error::Parse {
                row,
                column: column.clone(),
                message: format!("'{field}' is not a number"),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse {
                    row,
                    column,
                    message: format!("'{field}' is not finite"),
                });
            }
            values.push(value);
        }
        n += 1;
    }
    if n == 0 {
        return Err(Error::invalid(format!(
            "{} contains no data rows",
            source.path.display()
        )));
    }
    let selected = selected.unwrap_or_default();
    let matrix = NumericMatrix::new(n, selected.len(), values)?;
    if source.header {
        let names = selected.iter().map(|&j| header_names[j].clone()).collect();
        matrix.with_column_names(names)
    } else {
        Ok(matrix)
    }
}

/// Formats a real with 17 significant digits.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn format_correlation(c: Correlation) -> String {
    c.map_or_else(|| "NA".to_owned(), format_real)
}

fn column_header(names: Option<&[String]>, p: usize) -> Vec<String> {
    match names {
        Some(n) => n.to_vec(),
        None => (1..=p).map(|j| format!("v{j}")).collect(),
    }
}

/// Writes a numeric matrix as CSV using the shortest round-trip
/// representation of each value.
pub fn write_matrix_csv<W: Write>(matrix: &NumericMatrix, header: bool, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let to_err = |e: csv::Error| Error::invalid(format!("csv write failed: {e}"));
    if header {
        w.write_record(column_header(matrix.column_names(), matrix.p()))
            .map_err(to_err)?;
    }
    for i in 0..matrix.n() {
        w.write_record(matrix.row(i).iter().map(|v| v.to_string()))
            .map_err(to_err)?;
    }
    w.flush().map_err(|e| Error::invalid(format!("csv write failed: {e}")))
}

pub fn write_rank_csv<W: Write>(
    ranks: &RankMatrix,
    names: Option<&[String]>,
    header: bool,
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let to_err = |e: csv::Error| Error::invalid(format!("csv write failed: {e}"));
    if header {
        w.write_record(column_header(names, ranks.p())).map_err(to_err)?;
    }
    for i in 0..ranks.n() {
        w.write_record(ranks.columns().iter().map(|c| c[i].to_string()))
            .map_err(to_err)?;
    }
    w.flush().map_err(|e| Error::invalid(format!("csv write failed: {e}")))
}

/// `metric,value` lines for one report, followed by the IL1 skipped-cell count.
pub fn write_report_csv<W: Write>(report: &MetricReport, mut out: W) -> std::io::Result<()> {
    writeln!(out, "metric,value")?;
    for m in Metric::ALL {
        writeln!(out, "{m},{}", format_real(report.get(m)))?;
    }
    writeln!(out, "il1_skipped_cells,{}", report.il1_skipped_cells)
}

fn write_metric_rows<W: Write>(
    result: &ExperimentResult,
    prefix: &str,
    out: &mut W,
) -> std::io::Result<()> {
    for (value, report) in result.grid.iter().zip(&result.reports) {
        for m in Metric::ALL {
            writeln!(
                out,
                "{prefix}{},{m},{}",
                format_real(*value),
                format_real(report.get(m))
            )?;
        }
    }
    Ok(())
}

fn write_spearman_rows<W: Write>(
    result: &ExperimentResult,
    prefix: &str,
    out: &mut W,
) -> std::io::Result<()> {
    for (m, r) in &result.spearman_vs_grid {
        writeln!(out, "{prefix}grid,{m},grid,{}", format_correlation(*r))?;
    }
    for ((a, b), r) in &result.spearman_cross {
        writeln!(out, "{prefix}cross,{a},{b},{}", format_correlation(*r))?;
    }
    Ok(())
}

/// Either a single sweep or a set of replicated sweeps.
#[derive(Debug, Clone, Copy)]
pub enum ExperimentOutput<'a> {
    Single(&'a ExperimentResult),
    Replicated(&'a ReplicationSummary),
}

impl<'a> From<&'a ExperimentResult> for ExperimentOutput<'a> {
    fn from(r: &'a ExperimentResult) -> Self {
        ExperimentOutput::Single(r)
    }
}

impl<'a> From<&'a ReplicationSummary> for ExperimentOutput<'a> {
    fn from(r: &'a ReplicationSummary) -> Self {
        ExperimentOutput::Replicated(r)
    }
}

/// Long-format metric values: `grid_value,metric,value`, with a leading
/// `replication` column for replicated runs.
pub fn write_metrics_csv<W: Write>(output: ExperimentOutput<'_>, mut out: W) -> std::io::Result<()> {
    match output {
        ExperimentOutput::Single(result) => {
            writeln!(out, "grid_value,metric,value")?;
            write_metric_rows(result, "", &mut out)?;
        }
        ExperimentOutput::Replicated(summary) => {
            writeln!(out, "replication,grid_value,metric,value")?;
            for (r, result) in summary.per_replication.iter().enumerate() {
                write_metric_rows(result, &format!("{r},"), &mut out)?;
            }
        }
    }
    out.flush()
}

/// Spearman summary: `kind,metric,against,spearman`, where `kind` is `grid`
/// (metric vs parameter grid) or `cross` (bounded vs unbounded metric).
/// Undefined correlations are written as `NA`.
pub fn write_spearman_csv<W: Write>(output: ExperimentOutput<'_>, mut out: W) -> std::io::Result<()> {
    match output {
        ExperimentOutput::Single(result) => {
            writeln!(out, "kind,metric,against,spearman")?;
            write_spearman_rows(result, "", &mut out)?;
        }
        ExperimentOutput::Replicated(summary) => {
            writeln!(out, "replication,kind,metric,against,spearman")?;
            for (r, result) in summary.per_replication.iter().enumerate() {
                write_spearman_rows(result, &format!("{r},"), &mut out)?;
            }
        }
    }
    out.flush()
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

/// Writes the long-format metrics file and the Spearman summary file.
pub fn write_experiment_csv<'a>(
    output: impl Into<ExperimentOutput<'a>>,
    metrics_path: &Path,
    summary_path: &Path,
) -> Result<()> {
    let output = output.into();
    write_metrics_csv(output, create(metrics_path)?).map_err(|e| Error::io(metrics_path, e))?;
    write_spearman_csv(output, create(summary_path)?).map_err(|e| Error::io(summary_path, e))
}

fn raw(x: f64) -> Box<RawValue> {
    RawValue::from_string(format_real(x)).expect("formatted finite real is valid JSON")
}

fn raw_opt(c: Correlation) -> Option<Box<RawValue>> {
    c.map(raw)
}

#[derive(Serialize)]
struct JsonPoint {
    grid_value: Box<RawValue>,
    metrics: Vec<(Metric, Box<RawValue>)>,
    il1_skipped_cells: usize,
}

#[derive(Serialize)]
struct JsonCorrelation {
    metric: Metric,
    against: String,
    spearman: Option<Box<RawValue>>,
}

#[derive(Serialize)]
struct JsonResult {
    method: String,
    seed: u64,
    grid: Vec<Box<RawValue>>,
    points: Vec<JsonPoint>,
    spearman: Vec<JsonCorrelation>,
}

#[derive(Serialize)]
struct JsonReplication {
    method: String,
    base_seed: u64,
    replication_count: usize,
    replications: Vec<JsonResult>,
}

fn json_result(result: &ExperimentResult) -> JsonResult {
    let points = result
        .grid
        .iter()
        .zip(&result.reports)
        .map(|(&g, report)| JsonPoint {
            grid_value: raw(g),
            metrics: Metric::ALL.iter().map(|&m| (m, raw(report.get(m)))).collect(),
            il1_skipped_cells: report.il1_skipped_cells,
        })
        .collect();
    let spearman = result
        .spearman_vs_grid
        .iter()
        .map(|(&m, &r)| JsonCorrelation {
            metric: m,
            against: "grid".into(),
            spearman: raw_opt(r),
        })
        .chain(result.spearman_cross.iter().map(|(&(a, b), &r)| JsonCorrelation {
            metric: a,
            against: b.name().into(),
            spearman: raw_opt(r),
        }))
        .collect();
    JsonResult {
        method: result.method.name().into(),
        seed: result.seed,
        grid: result.grid.iter().map(|&g| raw(g)).collect(),
        points,
        spearman,
    }
}

/// JSON mirror of the CSV outputs, with the same 17-digit reals.
pub fn write_experiment_json<'a, W: Write>(
    output: impl Into<ExperimentOutput<'a>>,
    mut out: W,
) -> Result<()> {
    let to_err = |e: serde_json::Error| Error::invalid(format!("json write failed: {e}"));
    match output.into() {
        ExperimentOutput::Single(result) => {
            serde_json::to_writer_pretty(&mut out, &json_result(result)).map_err(to_err)?
        }
        ExperimentOutput::Replicated(summary) => serde_json::to_writer_pretty(
            &mut out,
            &JsonReplication {
                method: summary.method.name().into(),
                base_seed: summary.base_seed,
                replication_count: summary.replication_count,
                replications: summary.per_replication.iter().map(json_result).collect(),
            },
        )
        .map_err(to_err)?,
    }
    writeln!(out).map_err(|e| Error::invalid(format!("json write failed: {e}")))
}

/// One parsed line of a long-format metrics file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricRow {
    pub replication: Option<usize>,
    pub grid_value: f64,
    pub metric: Metric,
    pub value: f64,
}

/// Reads a file produced by [`write_metrics_csv`].
pub fn read_metrics_csv(path: &Path) -> Result<Vec<MetricRow>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let replicated = reader
        .headers()
        .map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?
        .get(0)
        == Some("replication");
    let mut rows = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let row = idx + 1;
        let record = record.map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?;
        let field = |i: usize, name: &str| {
            record.get(i).ok_or_else(|| Error::Parse {
                row,
                column: name.into(),
                message: "missing field".into(),
            })
        };
        let real = |i: usize, name: &str| -> Result<f64> {
            let s = field(i, name)?;
            s.parse().map_err(|_| Error::Parse {
                row,
                column: name.into(),
                message: format!("'{s}' is not a number"),
            })
        };
        let offset = usize::from(replicated);
        let replication = if replicated {
            let s = field(0, "replication")?;
            Some(s.parse().map_err(|_| Error::Parse {
                row,
                column: "replication".into(),
                message: format!("'{s}' is not an index"),
            })?)
        } else {
            None
        };
        rows.push(MetricRow {
            replication,
            grid_value: real(offset, "grid_value")?,
            metric: field(offset + 1, "metric")?.parse()?,
            value: real(offset + 2, "value")?,
        });
    }
    Ok(rows)
}

/// One row per permutation: `index,permutation,abs_distance,sq_distance,bounded_abs,bounded_sq`,
/// with the permutation's entries separated by spaces.
pub fn write_permutation_csv<W: Write>(
    records: &[PermutationDistanceRecord],
    mut out: W,
) -> std::io::Result<()> {
    writeln!(out, "index,permutation,abs_distance,sq_distance,bounded_abs,bounded_sq")?;
    for (i, r) in records.iter().enumerate() {
        let perm: Vec<String> = r.permutation.iter().map(usize::to_string).collect();
        writeln!(
            out,
            "{},{},{},{},{},{}",
            i + 1,
            perm.join(" "),
            r.abs_distance,
            r.sq_distance,
            format_real(r.bounded_abs),
            format_real(r.bounded_sq)
        )?;
    }
    out.flush()
}
