//! CSV readers for point files, distance matrices and label files.
//!
//! Point files carry a header `id,x1,..,xd[,label]`. Matrix files have no
//! header: row `i` lists the distances from sample `i` to every sample in id
//! order. Label files carry a header `id,label`.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use lipreg_core::Norm;

use crate::error::{AppError, AppResult};

/// Metric named on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    L1,
    L2,
    Linf,
    Matrix,
}

impl MetricKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MetricKind::L1 => "l1",
            MetricKind::L2 => "l2",
            MetricKind::Linf => "linf",
            MetricKind::Matrix => "matrix",
        }
    }

    /// `None` for the matrix metric.
    pub fn norm(self) -> Option<Norm> {
        match self {
            MetricKind::L1 => Some(Norm::L1),
            MetricKind::L2 => Some(Norm::L2),
            MetricKind::Linf => Some(Norm::Linf),
            MetricKind::Matrix => None,
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MetricKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "l1" => Ok(MetricKind::L1),
            "l2" => Ok(MetricKind::L2),
            "linf" => Ok(MetricKind::Linf),
            "matrix" => Ok(MetricKind::Matrix),
            other => Err(format!("unknown metric `{other}` (expected l1, l2, linf or matrix)")),
        }
    }
}

/// Rows of a point file. `labels` is empty for unlabeled files.
#[derive(Debug, Clone, PartialEq)]
pub struct PointTable {
    pub ids: Vec<String>,
    pub coords: Vec<Vec<f64>>,
    pub labels: Vec<f64>,
}

fn reader(path: &Path, headers: bool) -> AppResult<csv::Reader<std::fs::File>> {
    csv::ReaderBuilder::new()
        .has_headers(headers)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> AppError {
    let line = e.position().map(|p| p.line());
    match (e.into_kind(), line) {
        (csv::ErrorKind::Io(source), _) => AppError::io(path, source),
        (kind, Some(line)) => AppError::Row {
            path: path.into(),
            line,
            message: format!("{kind:?}"),
        },
        (kind, None) => AppError::file(path, format!("{kind:?}")),
    }
}

fn row_error(path: &Path, line: u64, message: impl Into<String>) -> AppError {
    AppError::Row {
        path: path.into(),
        line,
        message: message.into(),
    }
}

fn parse_number(path: &Path, line: u64, column: &str, field: &str) -> AppResult<f64> {
    match field.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(row_error(path, line, format!("{column} `{field}` is not a finite number"))),
    }
}

fn check_label(path: &Path, line: u64, label: f64) -> AppResult<f64> {
    if (0.0..=1.0).contains(&label) {
        Ok(label)
    } else {
        Err(row_error(path, line, format!("label {label} outside [0, 1]")))
    }
}

fn records<'r>(
    path: &Path,
    rdr: &'r mut csv::Reader<std::fs::File>,
) -> impl Iterator<Item = AppResult<(u64, csv::StringRecord)>> + 'r {
    let path = path.to_path_buf();
    rdr.records().map(move |r| {
        let record = r.map_err(|e| csv_error(&path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        Ok((line, record))
    })
}

/// Whether a point file must carry a trailing `label` column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelColumn {
    Required,
    /// Read when the last header field is `label`, otherwise absent.
    Optional,
}

/// Reads a point file. Unlabeled tables come back with empty `labels`.
pub fn read_points(path: &Path, column: LabelColumn) -> AppResult<PointTable> {
    let mut rdr = reader(path, true)?;
    let header = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    let width = header.len();
    let labeled = column == LabelColumn::Required || header.iter().last() == Some("label");
    let min_width = if labeled { 3 } else { 2 };
    if width < min_width || &header[0] != "id" || (labeled && &header[width - 1] != "label") {
        let expected = if labeled { "id,x1,..,xd,label" } else { "id,x1,..,xd" };
        return Err(row_error(path, 1, format!("header must read {expected}")));
    }
    let dim = if labeled { width - 2 } else { width - 1 };
    let mut table = PointTable {
        ids: Vec::new(),
        coords: Vec::new(),
        labels: Vec::new(),
    };
    for item in records(path, &mut rdr) {
        let (line, record) = item?;
        if record.len() != width {
            return Err(row_error(path, line, format!("expected {width} fields, found {}", record.len())));
        }
        table.ids.push(record[0].to_string());
        let coords = (1..=dim)
            .map(|c| parse_number(path, line, &header[c], &record[c]))
            .collect::<AppResult<Vec<f64>>>()?;
        table.coords.push(coords);
        if labeled {
            let label = parse_number(path, line, "label", &record[width - 1])?;
            table.labels.push(check_label(path, line, label)?);
        }
    }
    if table.ids.is_empty() {
        return Err(AppError::file(path, "no data rows"));
    }
    Ok(table)
}

/// Reads a headerless square distance matrix, checking finiteness,
/// non-negativity, a zero diagonal, positive off-diagonal entries and
/// symmetry.
pub fn read_matrix(path: &Path) -> AppResult<(usize, Vec<f64>)> {
    let mut rdr = reader(path, false)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut lines = Vec::new();
    for item in records(path, &mut rdr) {
        let (line, record) = item?;
        let row = record
            .iter()
            .enumerate()
            .map(|(j, f)| parse_number(path, line, &format!("column {}", j + 1), f))
            .collect::<AppResult<Vec<f64>>>()?;
        rows.push(row);
        lines.push(line);
    }
    let n = rows.len();
    if n == 0 {
        return Err(AppError::file(path, "no data rows"));
    }
    if let Some(i) = rows.iter().position(|row| row.len() != n) {
        return Err(row_error(path, lines[i], format!("expected {n} distances, found {}", rows[i].len())));
    }
    for (i, row) in rows.iter().enumerate() {
        let line = lines[i];
        for (j, &v) in row.iter().enumerate() {
            if v < 0.0 {
                return Err(row_error(path, line, format!("distance {v} in column {} is negative", j + 1)));
            }
            if (i == j) != (v == 0.0) {
                let message = if i == j {
                    format!("diagonal entry {v} is not zero")
                } else {
                    format!("column {} is zero off the diagonal", j + 1)
                };
                return Err(row_error(path, line, message));
            }
            if v != rows[j][i] {
                return Err(row_error(
                    path,
                    line,
                    format!("column {} is {v} but the transposed entry is {}", j + 1, rows[j][i]),
                ));
            }
        }
    }
    Ok((n, rows.into_iter().flatten().collect()))
}

/// Reads an `id,label` file.
pub fn read_labels(path: &Path) -> AppResult<(Vec<String>, Vec<f64>)> {
    let mut rdr = reader(path, true)?;
    let header = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    if header.len() != 2 || &header[0] != "id" || &header[1] != "label" {
        return Err(row_error(path, 1, "header must read id,label"));
    }
    let (mut ids, mut labels) = (Vec::new(), Vec::new());
    for item in records(path, &mut rdr) {
        let (line, record) = item?;
        if record.len() != 2 {
            return Err(row_error(path, line, format!("expected 2 fields, found {}", record.len())));
        }
        ids.push(record[0].to_string());
        let label = parse_number(path, line, "label", &record[1])?;
        labels.push(check_label(path, line, label)?);
    }
    if ids.is_empty() {
        return Err(AppError::file(path, "no data rows"));
    }
    Ok((ids, labels))
}

/// Writes `id,prediction` rows.
pub fn write_predictions<W: Write>(out: W, ids: &[String], predictions: &[f64]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["id", "prediction"])?;
    for (id, p) in ids.iter().zip(predictions) {
        w.write_record([id.as_str(), &p.to_string()])?;
    }
    w.flush()
}
