//! CSV ingestion and dumping.
//!
//! Dialect: comma-separated, `.` decimal point, one observation per row. An
//! optional single header row is auto-detected (first row with any
//! non-numeric cell). Parse failures report the 1-based row and column of the
//! first offending cell.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::matrix::DataMatrix;
use crate::scalar::Scalar;

/// Parses a data matrix, skipping an optional header row.
pub fn read_matrix<T: Scalar, R: BufRead>(reader: R) -> Result<DataMatrix<T>> {
    let mut width: Option<usize> = None;
    let mut values: Vec<T> = Vec::new();
    let mut rows = 0usize;
    let mut header_skipped = false;

    for (line_idx, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let cells: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        let parsed: std::result::Result<Vec<T>, (usize, String)> = cells
            .iter()
            .enumerate()
            .map(|(c, cell)| {
                cell.parse::<f64>()
                    .map(T::from_f64_lossy)
                    .map_err(|_| (c, format!("cannot parse {cell:?} as a number")))
            })
            .collect();

        match parsed {
            Ok(row) => {
                match width {
                    None => width = Some(row.len()),
                    Some(w) if w != row.len() => {
                        return Err(Error::Parse {
                            row: line_idx + 1,
                            col: row.len().min(w) + 1,
                            message: format!("expected {w} cells, found {}", row.len()),
                        });
                    }
                    _ => {}
                }
                if let Some(pos) = row.iter().position(|v| !v.is_finite()) {
                    return Err(Error::Parse {
                        row: line_idx + 1,
                        col: pos + 1,
                        message: "non-finite value".into(),
                    });
                }
                values.extend(row);
                rows += 1;
            }
            Err((col, message)) => {
                // a non-numeric first row is treated as the single header
                if !header_skipped && rows == 0 && width.is_none() {
                    header_skipped = true;
                    continue;
                }
                return Err(Error::Parse {
                    row: line_idx + 1,
                    col: col + 1,
                    message,
                });
            }
        }
    }

    let width = width.ok_or_else(|| Error::InvalidInput("csv contains no data rows".into()))?;
    DataMatrix::new(rows, width, values)
}

/// Writes a matrix, one observation per line. Values print in shortest
/// round-trip form, so dumping and re-reading is lossless.
pub fn write_matrix<T: Scalar, W: Write>(x: &DataMatrix<T>, mut writer: W) -> Result<()> {
    for row in x.rows_iter() {
        let mut first = true;
        for v in row {
            if !first {
                write!(writer, ",")?;
            }
            write!(writer, "{v}")?;
            first = false;
        }
        writeln!(writer)?;
    }
    Ok(())
}

/// Parses a single column of binary labels (0/1, or any nonzero = true).
pub fn read_labels<R: BufRead>(reader: R) -> Result<Vec<bool>> {
    let x = read_matrix::<f64, R>(reader)?;
    if x.n_cols() != 1 {
        return Err(Error::InvalidInput(format!(
            "label file must have one column, found {}",
            x.n_cols()
        )));
    }
    Ok(x.values().iter().map(|&v| v != 0.0).collect())
}
