//! CSV ingestion, model persistence and report tables.
//!
//! Every real number written by this module is decimal text with 17
//! significant digits, which reads back to the identical `f64`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use ndarray::Array2;

use crate::bandwidth::BandwidthSearchReport;
use crate::classifier::SelectiveDecision;
use crate::error::{Error, Result};
use crate::estimator::{Dataset, WskdeModel};
use crate::harness::ExperimentReport;
use crate::interval::ConfidenceBound;
use crate::kernel::Bandwidth;
use crate::metrics::{CurveRow, RunSummary};

pub const LABEL_COLUMN: &str = "label";
pub const MODEL_FORMAT_TAG: &str = "wskdc-model";
pub const MODEL_FORMAT_VERSION: u32 = 1;

pub const RECORDS_HEADER: [&str; 9] = [
    "method",
    "seed",
    "bandwidth",
    "d",
    "auprc",
    "aurrc",
    "tau_coverage",
    "t_optim",
    "t_infer",
];
pub const SUMMARY_HEADER: [&str; 9] = [
    "method",
    "auprc_mean",
    "auprc_std",
    "aurrc_mean",
    "aurrc_std",
    "t_optim_mean",
    "t_optim_std",
    "t_infer_mean",
    "t_infer_std",
];
pub const CURVES_HEADER: [&str; 8] = [
    "coverage",
    "precision_mean",
    "precision_q05",
    "precision_q95",
    "recall_mean",
    "recall_q05",
    "recall_q95",
    "tau_marker",
];
pub const PREDICTIONS_HEADER: [&str; 6] =
    ["lower", "center", "upper", "decision", "confidence", "ranking_score"];

/// 17 significant digits in scientific notation.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Feature matrix and labels read from a CSV with a `label` column.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub feature_names: Vec<String>,
    pub data: Dataset,
}

fn path_str(path: &Path) -> String {
    path.display().to_string()
}

fn reader(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn parse_error(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path_str(path),
        line,
        msg: msg.into(),
    }
}

fn csv_error(path: &Path, err: csv::Error) -> Error {
    let line = err.position().map_or(0, |p| p.line() as usize);
    match err.into_kind() {
        csv::ErrorKind::Io(e) => Error::io(path, e),
        csv::ErrorKind::UnequalLengths {
            expected_len, len, ..
        } => parse_error(
            path,
            line,
            format!("expected {expected_len} columns, found {len}"),
        ),
        kind => parse_error(path, line, format!("{kind:?}")),
    }
}

fn parse_real(path: &Path, line: usize, column: &str, cell: &str) -> Result<f64> {
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(parse_error(
            path,
            line,
            format!("column '{column}': '{cell}' is not a finite real number"),
        )),
    }
}

fn parse_label(path: &Path, line: usize, cell: &str) -> Result<bool> {
    match cell.parse::<f64>() {
        Ok(0.0) => Ok(false),
        Ok(1.0) => Ok(true),
        _ => Err(parse_error(
            path,
            line,
            format!("label '{cell}' is not 0 or 1"),
        )),
    }
}

/// Reads a feature table. Exactly one column must be named `label`; every
/// other column is a feature.
pub fn read_feature_csv(path: impl AsRef<Path>) -> Result<FeatureTable> {
    let path = path.as_ref();
    let (names, label_col, rows) = read_numeric_table(path, true)?;
    let label_col = label_col.expect("label column is required");
    let mut labels = Vec::with_capacity(rows.len());
    let mut values = Vec::with_capacity(rows.len() * names.len());
    for (line, record) in &rows {
        for (c, cell) in record.iter().enumerate() {
            if c == label_col {
                labels.push(parse_label(path, *line, cell)?);
            } else {
                values.push(parse_real(path, *line, &record_name(&names, label_col, c), cell)?);
            }
        }
    }
    let features = Array2::from_shape_vec((rows.len(), names.len()), values)
        .expect("row lengths checked by the csv reader");
    Ok(FeatureTable {
        feature_names: names,
        data: Dataset::new(features, labels)?,
    })
}

/// Reads query rows. A `label` column, if present, is ignored.
pub fn read_query_csv(path: impl AsRef<Path>) -> Result<(Vec<String>, Array2<f64>)> {
    let path = path.as_ref();
    let (names, label_col, rows) = read_numeric_table(path, false)?;
    let mut values = Vec::with_capacity(rows.len() * names.len());
    for (line, record) in &rows {
        for (c, cell) in record.iter().enumerate() {
            if Some(c) != label_col {
                let name = record_name(&names, label_col.unwrap_or(usize::MAX), c);
                values.push(parse_real(path, *line, &name, cell)?);
            }
        }
    }
    let features = Array2::from_shape_vec((rows.len(), names.len()), values)
        .expect("row lengths checked by the csv reader");
    Ok((names, features))
}

fn record_name(names: &[String], label_col: usize, c: usize) -> String {
    let idx = if c > label_col { c - 1 } else { c };
    names[idx].clone()
}

type Rows = Vec<(usize, csv::StringRecord)>;

fn read_numeric_table(path: &Path, require_label: bool) -> Result<(Vec<String>, Option<usize>, Rows)> {
    let mut rdr = reader(path)?;
    let header = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    let label_cols: Vec<usize> = header
        .iter()
        .enumerate()
        .filter(|(_, h)| *h == LABEL_COLUMN)
        .map(|(i, _)| i)
        .collect();
    if label_cols.len() > 1 {
        return Err(parse_error(path, 1, "more than one 'label' column"));
    }
    let label_col = label_cols.first().copied();
    if require_label && label_col.is_none() {
        return Err(parse_error(
            path,
            1,
            "header must contain a column named exactly 'label' holding 0/1 targets",
        ));
    }
    let names: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != label_col)
        .map(|(_, h)| h.to_string())
        .collect();
    if names.is_empty() {
        return Err(parse_error(path, 1, "no feature columns"));
    }
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        rows.push((line, record));
    }
    Ok((names, label_col, rows))
}

fn writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::WriterBuilder::new()
        .flexible(true)
        .from_writer(BufWriter::new(file)))
}

fn write_row<W: Write, I, S>(path: &Path, w: &mut csv::Writer<W>, row: I) -> Result<()>
where
    I: IntoIterator<Item = S>,
    S: AsRef<[u8]>,
{
    w.write_record(row).map_err(|e| csv_error(path, e))
}

fn finish<W: Write>(path: &Path, mut w: csv::Writer<W>) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

/// A persisted model: the fitted estimator plus its feature column names.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub feature_names: Vec<String>,
    pub model: WskdeModel,
}

impl ModelFile {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let m = &self.model;
        let mut w = writer(path)?;
        write_row(path, &mut w, [MODEL_FORMAT_TAG.to_string(), MODEL_FORMAT_VERSION.to_string()])?;
        write_row(path, &mut w, ["alpha".to_string(), fmt_real(m.alpha())])?;
        write_row(path, &mut w, ["z".to_string(), fmt_real(m.z())])?;
        write_row(path, &mut w, ["bandwidth".to_string(), fmt_real(m.bandwidth().value())])?;
        write_row(path, &mut w, ["dim".to_string(), m.dim().to_string()])?;
        write_row(path, &mut w, ["rows".to_string(), m.data().len().to_string()])?;
        write_row(
            path,
            &mut w,
            self.feature_names.iter().map(String::as_str).chain([LABEL_COLUMN]),
        )?;
        for (row, &y) in m.data().features().outer_iter().zip(m.data().labels()) {
            let cells = row
                .iter()
                .map(|&v| fmt_real(v))
                .chain([if y { "1" } else { "0" }.to_string()]);
            write_row(path, &mut w, cells)?;
        }
        finish(path, w)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<ModelFile> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(file);
        let mut records = rdr.records().enumerate();
        let mut next = |what: &str| -> Result<(usize, csv::StringRecord)> {
            match records.next() {
                Some((i, r)) => Ok((i + 1, r.map_err(|e| csv_error(path, e))?)),
                None => Err(parse_error(path, 0, format!("truncated model file: missing {what}"))),
            }
        };

        let (line, tag) = next("format tag")?;
        if tag.get(0) != Some(MODEL_FORMAT_TAG) {
            return Err(parse_error(path, line, "not a wskdc model file"));
        }
        if tag.get(1) != Some(MODEL_FORMAT_VERSION.to_string().as_str()) {
            return Err(parse_error(
                path,
                line,
                format!("unsupported model format version {:?}", tag.get(1)),
            ));
        }
        let mut field = |key: &str| -> Result<(usize, String)> {
            let (line, r) = next(key)?;
            if r.get(0) != Some(key) || r.len() != 2 {
                return Err(parse_error(path, line, format!("expected '{key},<value>'")));
            }
            Ok((line, r[1].to_string()))
        };
        let (l, alpha) = field("alpha")?;
        let alpha = parse_real(path, l, "alpha", &alpha)?;
        let (l, z) = field("z")?;
        let z = parse_real(path, l, "z", &z)?;
        let (l, h) = field("bandwidth")?;
        let h = parse_real(path, l, "bandwidth", &h)?;
        let (l, dim) = field("dim")?;
        let dim: usize = dim
            .parse()
            .map_err(|_| parse_error(path, l, format!("dim '{dim}' is not an integer")))?;
        let (l, rows) = field("rows")?;
        let rows: usize = rows
            .parse()
            .map_err(|_| parse_error(path, l, format!("rows '{rows}' is not an integer")))?;

        let (line, header) = next("column header")?;
        if header.len() != dim + 1 || header.get(dim) != Some(LABEL_COLUMN) {
            return Err(parse_error(path, line, "column header does not match dim"));
        }
        let feature_names = header.iter().take(dim).map(str::to_string).collect();

        let mut values = Vec::with_capacity(rows * dim);
        let mut labels = Vec::with_capacity(rows);
        for _ in 0..rows {
            let (line, r) = next("data row")?;
            if r.len() != dim + 1 {
                return Err(parse_error(
                    path,
                    line,
                    format!("expected {} cells, found {}", dim + 1, r.len()),
                ));
            }
            for c in 0..dim {
                values.push(parse_real(path, line, &header[c], &r[c])?);
            }
            labels.push(parse_label(path, line, &r[dim])?);
        }
        if let Some((i, _)) = records.next() {
            return Err(parse_error(path, i + 1, "trailing rows after the declared row count"));
        }
        let features = Array2::from_shape_vec((rows, dim), values)
            .map_err(|e| parse_error(path, 0, e.to_string()))?;
        let data = Dataset::new(features, labels)?;
        let model = WskdeModel::from_parts(data, Bandwidth::new(h)?, alpha, z)?;
        Ok(ModelFile {
            feature_names,
            model,
        })
    }
}

/// Candidate bandwidths with their mean and per-fold held-out NLL.
pub fn write_search_report(path: impl AsRef<Path>, report: &BandwidthSearchReport) -> Result<()> {
    let path = path.as_ref();
    let folds = report.candidates.first().map_or(0, |c| c.fold_nll.len());
    let mut w = writer(path)?;
    let mut header = vec!["h".to_string(), "mean_nll".to_string(), "selected".to_string()];
    header.extend((0..folds).map(|f| format!("fold_{f}")));
    write_row(path, &mut w, header)?;
    for c in &report.candidates {
        let mut row = vec![
            fmt_real(c.h.value()),
            fmt_real(c.mean_nll),
            u8::from(c.h == report.selected).to_string(),
        ];
        row.extend(c.fold_nll.iter().map(|&v| fmt_real(v)));
        write_row(path, &mut w, row)?;
    }
    finish(path, w)
}

pub fn write_predictions(
    path: impl AsRef<Path>,
    rows: &[(ConfidenceBound, SelectiveDecision)],
) -> Result<()> {
    let path = path.as_ref();
    let mut w = writer(path)?;
    write_row(path, &mut w, PREDICTIONS_HEADER)?;
    for (b, d) in rows {
        write_row(
            path,
            &mut w,
            [
                fmt_real(b.lower()),
                fmt_real(b.center),
                fmt_real(b.upper()),
                d.label.to_string(),
                fmt_real(d.confidence),
                fmt_real(d.ranking_score),
            ],
        )?;
    }
    finish(path, w)
}

pub fn write_records(path: impl AsRef<Path>, report: &ExperimentReport) -> Result<()> {
    let path = path.as_ref();
    let mut w = writer(path)?;
    write_row(path, &mut w, RECORDS_HEADER)?;
    for r in &report.records {
        write_row(
            path,
            &mut w,
            [
                report.method.clone(),
                r.seed.to_string(),
                fmt_real(r.bandwidth),
                fmt_real(r.d),
                fmt_real(r.auprc),
                fmt_real(r.aurrc),
                r.tau_coverage.map(fmt_real).unwrap_or_default(),
                fmt_real(r.t_optim),
                fmt_real(r.t_infer),
            ],
        )?;
    }
    finish(path, w)
}

pub fn write_summary(path: impl AsRef<Path>, report: &ExperimentReport) -> Result<()> {
    let path = path.as_ref();
    let s = &report.summary;
    let mut w = writer(path)?;
    write_row(path, &mut w, SUMMARY_HEADER)?;
    write_row(
        path,
        &mut w,
        [
            report.method.clone(),
            fmt_real(s.auprc.mean),
            fmt_real(s.auprc.std),
            fmt_real(s.aurrc.mean),
            fmt_real(s.aurrc.std),
            fmt_real(s.t_optim.mean),
            fmt_real(s.t_optim.std),
            fmt_real(s.t_infer.mean),
            fmt_real(s.t_infer.std),
        ],
    )?;
    finish(path, w)
}

/// Aggregated curves on the summary grid, one row per coverage value.
pub fn write_curves(path: impl AsRef<Path>, summary: &RunSummary) -> Result<()> {
    let path = path.as_ref();
    let mut w = writer(path)?;
    write_row(path, &mut w, CURVES_HEADER)?;
    for (r, &c) in summary.grid.iter().enumerate() {
        let (p, rc) = (&summary.precision, &summary.recall);
        write_row(
            path,
            &mut w,
            [
                fmt_real(c),
                fmt_real(p.mean[r]),
                fmt_real(p.q05[r]),
                fmt_real(p.q95[r]),
                fmt_real(rc.mean[r]),
                fmt_real(rc.q05[r]),
                fmt_real(rc.q95[r]),
                u8::from(summary.tau_marker_row == Some(r)).to_string(),
            ],
        )?;
    }
    finish(path, w)
}

/// Writes a single run's curve table (coverage, precision, recall, tau_marker).
pub fn write_curve_table(path: impl AsRef<Path>, rows: &[CurveRow]) -> Result<()> {
    let path = path.as_ref();
    let mut w = writer(path)?;
    write_row(path, &mut w, ["coverage", "precision", "recall", "tau_marker"])?;
    for r in rows {
        write_row(
            path,
            &mut w,
            [
                fmt_real(r.coverage),
                fmt_real(r.precision),
                fmt_real(r.recall),
                u8::from(r.tau_marker).to_string(),
            ],
        )?;
    }
    finish(path, w)
}

pub fn read_curve_table(path: impl AsRef<Path>) -> Result<Vec<CurveRow>> {
    let path = path.as_ref();
    let mut rdr = reader(path)?;
    let mut rows = Vec::new();
    for record in rdr.records() {
        let r = record.map_err(|e| csv_error(path, e))?;
        let line = r.position().map_or(0, |p| p.line() as usize);
        if r.len() != 4 {
            return Err(parse_error(path, line, "expected 4 columns"));
        }
        rows.push(CurveRow {
            coverage: parse_real(path, line, "coverage", &r[0])?,
            precision: parse_real(path, line, "precision", &r[1])?,
            recall: parse_real(path, line, "recall", &r[2])?,
            tau_marker: parse_label(path, line, &r[3])?,
        });
    }
    Ok(rows)
}

/// A row of the per-run records table as read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordRow {
    pub method: String,
    pub seed: u64,
    pub bandwidth: f64,
    pub d: f64,
    pub auprc: f64,
    pub aurrc: f64,
    pub tau_coverage: Option<f64>,
    pub t_optim: f64,
    pub t_infer: f64,
}

pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<RecordRow>> {
    let path = path.as_ref();
    let mut rdr = reader(path)?;
    let mut out = Vec::new();
    for record in rdr.records() {
        let r = record.map_err(|e| csv_error(path, e))?;
        let line = r.position().map_or(0, |p| p.line() as usize);
        if r.len() != RECORDS_HEADER.len() {
            return Err(parse_error(path, line, "unexpected column count"));
        }
        let real = |c: usize| parse_real(path, line, RECORDS_HEADER[c], &r[c]);
        out.push(RecordRow {
            method: r[0].to_string(),
            seed: r[1]
                .parse()
                .map_err(|_| parse_error(path, line, "seed is not an integer"))?,
            bandwidth: real(2)?,
            d: real(3)?,
            auprc: real(4)?,
            aurrc: real(5)?,
            tau_coverage: if r[6].is_empty() { None } else { Some(real(6)?) },
            t_optim: real(7)?,
            t_infer: real(8)?,
        });
    }
    Ok(out)
}
