//! CSV input and output. Reals are written with 17 significant digits so
//! they round-trip exactly; lines end in `\n`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::cv::{CvCurve, CvSelection};
use crate::error::{Error, Result};
use crate::lars::LassoPath;
use crate::simulation::{ExperimentRecord, SummaryRow};

pub const RECORDS_HEADER: &str =
    "n,rep,selector,s_cv,s_applied,test_mse,full_ols_l1,mean_fold_ols_l1,pinv_ols_l1";

pub const SUMMARY_HEADER: &str =
    "n,selector,mean_test_mse,sd_test_mse,mean_s_applied,sd_s_applied,mean_pinv_ols_l1,mean_full_ols_l1";

pub fn format_real(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_records<W: Write>(records: &[ExperimentRecord], out: &mut W) -> Result<()> {
    writeln!(out, "{RECORDS_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.n,
            r.rep,
            r.selector,
            format_real(r.s_cv),
            format_real(r.s_applied),
            format_real(r.test_mse),
            format_real(r.full_ols_l1),
            format_real(r.mean_fold_ols_l1),
            format_real(r.pinv_ols_l1),
        )?;
    }
    Ok(())
}

pub fn emit_records_csv(records: &[ExperimentRecord], path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_records(records, &mut out)?;
    out.flush()?;
    Ok(())
}

pub fn write_summary<W: Write>(summary: &[SummaryRow], out: &mut W) -> Result<()> {
    if summary.is_empty() {
        return Err(Error::EmptyInput("summary has no rows"));
    }
    writeln!(out, "{SUMMARY_HEADER}")?;
    for row in summary {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            row.n,
            row.selector,
            format_real(row.test_mse.mean),
            format_real(row.test_mse.sd),
            format_real(row.s_applied.mean),
            format_real(row.s_applied.sd),
            format_real(row.pinv_ols_l1.mean),
            format_real(row.full_ols_l1.mean),
        )?;
    }
    Ok(())
}

pub fn emit_summary_csv(summary: &[SummaryRow], path: &Path) -> Result<()> {
    let mut buffer = Vec::new();
    write_summary(summary, &mut buffer)?;
    std::fs::write(path, buffer)?;
    Ok(())
}

fn field(row: &csv::StringRecord, i: usize, line: usize) -> Result<&str> {
    row.get(i).ok_or_else(|| Error::ParseError {
        line,
        message: format!("missing column {}", i + 1),
    })
}

fn parse_field<T: std::str::FromStr>(row: &csv::StringRecord, i: usize, line: usize) -> Result<T> {
    let raw = field(row, i, line)?;
    raw.parse().map_err(|_| Error::ParseError {
        line,
        message: format!("cannot parse `{raw}`"),
    })
}

/// Reads a records file written by [`emit_records_csv`].
pub fn read_records_csv(path: &Path) -> Result<Vec<ExperimentRecord>> {
    let mut reader = csv::Reader::from_path(path)?;
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != RECORDS_HEADER {
        return Err(Error::ParseError {
            line: 1,
            message: format!("expected header `{RECORDS_HEADER}`"),
        });
    }
    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let line = i + 2;
        records.push(ExperimentRecord {
            n: parse_field(&row, 0, line)?,
            rep: parse_field(&row, 1, line)?,
            selector: field(&row, 2, line)?.parse()?,
            s_cv: parse_field(&row, 3, line)?,
            s_applied: parse_field(&row, 4, line)?,
            test_mse: parse_field(&row, 5, line)?,
            full_ols_l1: parse_field(&row, 6, line)?,
            mean_fold_ols_l1: parse_field(&row, 7, line)?,
            pinv_ols_l1: parse_field(&row, 8, line)?,
        });
    }
    Ok(records)
}

/// A regression data set read from CSV: a `y` column plus predictors.
#[derive(Debug, Clone)]
pub struct DataSet {
    pub predictor_names: Vec<String>,
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
}

/// Reads a CSV with a header row; the column named `y` is the response and
/// every other column is a predictor.
pub fn read_data_csv(path: &Path) -> Result<DataSet> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let y_col = header.iter().position(|h| h == "y").ok_or_else(|| Error::ParseError {
        line: 1,
        message: "no column named `y`".into(),
    })?;
    let predictor_cols: Vec<usize> = (0..header.len()).filter(|&c| c != y_col).collect();
    if predictor_cols.is_empty() {
        return Err(Error::ParseError {
            line: 1,
            message: "no predictor columns".into(),
        });
    }

    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let line = i + 2;
        if row.len() != header.len() {
            return Err(Error::ParseError {
                line,
                message: format!("expected {} fields, got {}", header.len(), row.len()),
            });
        }
        ys.push(parse_field::<f64>(&row, y_col, line)?);
        for &c in &predictor_cols {
            xs.push(parse_field::<f64>(&row, c, line)?);
        }
    }
    let n = ys.len();
    Ok(DataSet {
        predictor_names: predictor_cols.iter().map(|&c| header[c].clone()).collect(),
        x: DMatrix::from_row_slice(n, predictor_cols.len(), &xs),
        y: DVector::from_vec(ys),
    })
}

/// One row per knot: index, λ, ℓ1 norm, active-set size, then coefficients.
pub fn write_knots<W: Write>(path: &LassoPath, names: &[String], out: &mut W) -> Result<()> {
    write!(out, "knot,lambda,l1,n_active")?;
    for name in names {
        write!(out, ",{name}")?;
    }
    writeln!(out)?;
    for (i, knot) in path.knots().iter().enumerate() {
        write!(
            out,
            "{},{},{},{}",
            i,
            format_real(knot.lambda),
            format_real(knot.l1),
            knot.active_set.len()
        )?;
        for b in knot.beta.beta().iter() {
            write!(out, ",{}", format_real(*b))?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn write_curve<W: Write>(curve: &CvCurve, out: &mut W) -> Result<()> {
    writeln!(out, "s,mean_error")?;
    for (s, e) in curve.s_grid.iter().zip(&curve.mean_error) {
        writeln!(out, "{},{}", format_real(*s), format_real(*e))?;
    }
    Ok(())
}

/// `key=value` lines describing both selections made from one curve.
pub fn describe_selections(standard: &CvSelection, normalized: &CvSelection) -> String {
    format!(
        "s_cv={}\ns_tilde={}\nmean_fold_ols_l1={}\nfull_ols_l1={}\n",
        format_real(standard.s_cv),
        format_real(normalized.s_tilde),
        format_real(normalized.mean_fold_ols_l1),
        format_real(normalized.full_ols_l1.unwrap_or(f64::NAN)),
    )
}
