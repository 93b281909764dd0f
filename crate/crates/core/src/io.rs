//! Plain-text CSV matrices and vectors: one row per coordinate, one column
//! per generator, no header row.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::Serializer;

use crate::error::{Error, Result};

pub fn read_matrix(path: &Path) -> Result<DMatrix<f64>> {
    let file = File::open(path).map_err(|e| parse_error(path, e.to_string()))?;
    parse_matrix(file).map_err(|message| parse_error(path, message))
}

/// Reads a single-column CSV vector.
pub fn read_vector(path: &Path) -> Result<DVector<f64>> {
    let m = read_matrix(path)?;
    if m.ncols() != 1 {
        return Err(parse_error(path, format!("expected a single column, found {}", m.ncols())));
    }
    Ok(m.column(0).into_owned())
}

pub fn parse_matrix<R: Read>(reader: R) -> std::result::Result<DMatrix<f64>, String> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut values = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (line, record) in csv.records().enumerate() {
        let record = record.map_err(|e| e.to_string())?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        match cols {
            None => cols = Some(record.len()),
            Some(c) if c != record.len() => {
                return Err(format!("row {} has {} columns, expected {c}", line + 1, record.len()));
            }
            _ => {}
        }
        for field in record.iter() {
            let v: f64 = field
                .parse()
                .map_err(|_| format!("row {}: cannot parse {field:?} as a number", line + 1))?;
            if !v.is_finite() {
                return Err(format!("row {}: non-finite value {field:?}", line + 1));
            }
            values.push(v);
        }
        rows += 1;
    }
    let cols = cols.ok_or_else(|| "no data rows".to_string())?;
    Ok(DMatrix::from_row_slice(rows, cols, &values))
}

pub fn write_matrix<W: Write>(mut out: W, m: &DMatrix<f64>) -> std::io::Result<()> {
    for row in m.row_iter() {
        let line: Vec<String> = row.iter().map(|&v| fmt_f64(v)).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

pub fn write_vector<W: Write>(mut out: W, v: &DVector<f64>) -> std::io::Result<()> {
    for &x in v.iter() {
        writeln!(out, "{}", fmt_f64(x))?;
    }
    Ok(())
}

/// Shortest round-trip representation, with `-0` printed as `0`.
pub fn fmt_f64(v: f64) -> String {
    format!("{}", v + 0.0)
}

pub(crate) fn serialize_vector<S: Serializer>(v: &DVector<f64>, serializer: S) -> std::result::Result<S::Ok, S::Error> {
    serializer.collect_seq(v.iter().map(|&x| x + 0.0))
}

fn parse_error(path: &Path, message: String) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        message,
    }
}
