//! Trace serialization: per-step CSV, JSON summary, and plot-ready figure series.
//!
//! Floats are written in shortest round-trip scientific form, so parsing a CSV
//! back reproduces every value bit for bit. Vector-valued cells join their
//! components with `;`. Fields that need an exact solution are empty cells when
//! the problem has none.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::analysis::StepRecord;
use crate::controller::{Trace, TraceSummary};

pub const CSV_COLUMNS: [&str; 16] = [
    "i",
    "x",
    "h",
    "rejects",
    "w_lower",
    "w_higher",
    "eps_lower",
    "beta_lower",
    "delta_lower",
    "delta_higher",
    "alpha_term",
    "cond_lhs",
    "cond_rhs",
    "cond_holds",
    "bound",
    "clamped",
];

pub const FIGURE1_COLUMNS: [&str; 3] = ["x", "abs_eps_lower", "abs_alpha_term"];

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("trace has no oracle diagnostics (problem `{0}` has no exact solution)")]
    MissingDiagnostics(String),
    #[error("row {row}, column `{column}`: cannot parse `{value}`")]
    Parse {
        row: usize,
        column: &'static str,
        value: String,
    },
    #[error("unexpected CSV header: {0}")]
    Header(String),
}

pub fn format_float(v: f64) -> String {
    format!("{v:e}")
}

fn format_vec(v: &[f64]) -> String {
    v.iter()
        .map(|x| format_float(*x))
        .collect::<Vec<_>>()
        .join(";")
}

fn opt<T>(v: Option<T>, f: impl FnOnce(T) -> String) -> String {
    v.map(f).unwrap_or_default()
}

fn record_row(r: &StepRecord) -> [String; 16] {
    [
        r.i.to_string(),
        format_float(r.x),
        format_float(r.h),
        r.rejects.to_string(),
        format_vec(&r.w_lower),
        format_vec(&r.w_higher),
        opt(r.eps_lower.as_deref(), format_vec),
        format_vec(&r.beta_lower),
        opt(r.delta_lower.as_deref(), format_vec),
        opt(r.delta_higher.as_deref(), format_vec),
        opt(r.alpha_term.as_deref(), format_vec),
        opt(r.cond_lhs, format_float),
        opt(r.cond_rhs, format_float),
        opt(r.cond_holds, |b| b.to_string()),
        format_float(r.bound),
        r.clamped.to_string(),
    ]
}

/// Writes the header and one row per accepted step.
pub fn write_csv<W: Write>(records: &[StepRecord], out: W) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for r in records {
        w.write_record(record_row(r))?;
    }
    w.flush()?;
    Ok(())
}

struct Row<'a> {
    idx: usize,
    rec: &'a csv::StringRecord,
}

impl Row<'_> {
    fn cell(&self, col: usize) -> &str {
        self.rec.get(col).unwrap_or("")
    }

    fn err(&self, col: usize) -> ReportError {
        ReportError::Parse {
            row: self.idx,
            column: CSV_COLUMNS[col],
            value: self.cell(col).to_string(),
        }
    }

    fn parse<T: std::str::FromStr>(&self, col: usize) -> Result<T, ReportError> {
        self.cell(col).parse().map_err(|_| self.err(col))
    }

    fn opt<T: std::str::FromStr>(&self, col: usize) -> Result<Option<T>, ReportError> {
        match self.cell(col) {
            "" => Ok(None),
            _ => self.parse(col).map(Some),
        }
    }

    fn vec(&self, col: usize) -> Result<Vec<f64>, ReportError> {
        self.cell(col)
            .split(';')
            .map(|s| s.parse::<f64>().map_err(|_| self.err(col)))
            .collect()
    }

    fn opt_vec(&self, col: usize) -> Result<Option<Vec<f64>>, ReportError> {
        match self.cell(col) {
            "" => Ok(None),
            _ => self.vec(col).map(Some),
        }
    }
}

/// Parses a CSV produced by [`write_csv`].
pub fn read_csv<R: Read>(input: R) -> Result<Vec<StepRecord>, ReportError> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers()?.clone();
    if header.iter().ne(CSV_COLUMNS.iter().copied()) {
        return Err(ReportError::Header(
            header.iter().collect::<Vec<_>>().join(","),
        ));
    }
    let mut out = Vec::new();
    for (idx, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = Row {
            idx: idx + 1,
            rec: &rec,
        };
        out.push(StepRecord {
            i: row.parse(0)?,
            x: row.parse(1)?,
            h: row.parse(2)?,
            rejects: row.parse(3)?,
            w_lower: row.vec(4)?,
            w_higher: row.vec(5)?,
            eps_lower: row.opt_vec(6)?,
            beta_lower: row.vec(7)?,
            delta_lower: row.opt_vec(8)?,
            delta_higher: row.opt_vec(9)?,
            alpha_term: row.opt_vec(10)?,
            cond_lhs: row.opt(11)?,
            cond_rhs: row.opt(12)?,
            cond_holds: row.opt(13)?,
            bound: row.parse(14)?,
            clamped: row.parse(15)?,
        });
    }
    Ok(out)
}

pub fn write_summary_json<W: Write>(summary: &TraceSummary, out: W) -> Result<(), ReportError> {
    let mut out = out;
    serde_json::to_writer_pretty(&mut out, summary)?;
    writeln!(out)?;
    Ok(())
}

/// Writes `x, |eps_lower|, |alpha_term|` for every accepted step.
pub fn write_figure1<W: Write>(trace: &Trace, out: W) -> Result<(), ReportError> {
    if !trace.has_diagnostics() {
        return Err(ReportError::MissingDiagnostics(trace.problem.clone()));
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(FIGURE1_COLUMNS)?;
    for r in &trace.records {
        let (Some(eps), Some(alpha)) = (r.abs_eps_lower(), r.abs_alpha_term()) else {
            return Err(ReportError::MissingDiagnostics(trace.problem.clone()));
        };
        w.write_record([format_float(r.x), format_float(eps), format_float(alpha)])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the figure series to `path`.
pub fn figure1_export(trace: &Trace, path: impl AsRef<Path>) -> Result<(), ReportError> {
    if !trace.has_diagnostics() {
        return Err(ReportError::MissingDiagnostics(trace.problem.clone()));
    }
    write_figure1(trace, BufWriter::new(File::create(path)?))
}

pub fn csv_export(trace: &Trace, path: impl AsRef<Path>) -> Result<(), ReportError> {
    write_csv(&trace.records, BufWriter::new(File::create(path)?))
}

pub fn json_export(trace: &Trace, path: impl AsRef<Path>) -> Result<(), ReportError> {
    write_summary_json(&trace.summary, BufWriter::new(File::create(path)?))
}
