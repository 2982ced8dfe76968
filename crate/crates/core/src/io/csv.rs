//! Numeric CSV input and output.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use ndarray::Array2;

use crate::data::DataMatrix;
use crate::error::{Result, SongError};

/// Reads a rectangular numeric CSV. Row and column numbers in errors are
/// 1-based positions in the file (the header counts as row 1).
///
/// `label_column` names a zero-based column holding integer labels; it is
/// removed from the matrix.
pub fn load_csv(path: impl AsRef<Path>, has_header: bool, label_column: Option<usize>) -> Result<DataMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path.as_ref())
        .map_err(csv_error)?;

    let mut values = Vec::new();
    let mut labels = label_column.map(|_| Vec::new());
    let mut width: Option<usize> = None;
    let mut nrows = 0;
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(csv_error)?;
        let row = i + 1 + usize::from(has_header);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        match width {
            None => width = Some(record.len()),
            Some(w) if w != record.len() => {
                return Err(SongError::Parse {
                    row,
                    column: record.len().min(w) + 1,
                    message: format!("expected {w} fields, found {}", record.len()),
                })
            }
            _ => {}
        }
        if let Some(lc) = label_column {
            if lc >= record.len() {
                return Err(SongError::Parse {
                    row,
                    column: lc + 1,
                    message: format!("label column {lc} outside {} fields", record.len()),
                });
            }
        }
        for (j, field) in record.iter().enumerate() {
            let parse_err = |message: String| SongError::Parse { row, column: j + 1, message };
            if Some(j) == label_column {
                let label = parse_label(field).ok_or_else(|| parse_err(format!("invalid label {field:?}")))?;
                labels.as_mut().unwrap().push(label);
            } else {
                let v: f64 = field.parse().map_err(|_| parse_err(format!("not a number: {field:?}")))?;
                if !v.is_finite() {
                    return Err(parse_err(format!("non-finite value {field:?}")));
                }
                values.push(v);
            }
        }
        nrows += 1;
    }
    let dim = width.unwrap_or(0) - usize::from(label_column.is_some() && width.is_some());
    let rows = Array2::from_shape_vec((nrows, dim), values).expect("rectangular by construction");
    DataMatrix::new(rows, labels)
}

fn parse_label(field: &str) -> Option<i64> {
    field.parse::<i64>().ok().or_else(|| {
        let v: f64 = field.parse().ok()?;
        (v.fract() == 0.0 && v.abs() < 9.0e15).then_some(v as i64)
    })
}

fn csv_error(e: csv::Error) -> SongError {
    let row = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => SongError::Io(io),
        other => SongError::Parse {
            row,
            column: 0,
            message: format!("{other:?}"),
        },
    }
}

/// Writes a matrix with an optional trailing label column. Values use the
/// shortest representation that parses back to the same `f64`.
pub fn write_csv(path: impl AsRef<Path>, rows: &Array2<f64>, labels: Option<&[i64]>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_csv_to(&mut out, rows, labels)?;
    out.flush()?;
    Ok(())
}

pub fn write_csv_to<W: Write>(out: &mut W, rows: &Array2<f64>, labels: Option<&[i64]>) -> Result<()> {
    if let Some(l) = labels {
        if l.len() != rows.nrows() {
            return Err(SongError::InvalidData(format!("{} labels for {} rows", l.len(), rows.nrows())));
        }
    }
    for (i, row) in rows.rows().into_iter().enumerate() {
        let mut first = true;
        for v in row {
            if !first {
                out.write_all(b",")?;
            }
            first = false;
            write!(out, "{v}")?;
        }
        if let Some(l) = labels {
            if !first {
                out.write_all(b",")?;
            }
            write!(out, "{}", l[i])?;
        }
        out.write_all(b"\n")?;
    }
    Ok(())
}
