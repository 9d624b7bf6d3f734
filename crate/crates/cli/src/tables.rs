//! Labelled numeric grids in delimited text.
//!
//! A grid has `header_rows` rows of column labels followed by data rows that
//! start with `index_cols` label cells. Rows whose numeric cells are all
//! empty (such as the extra label row in EXIOBASE text files) are skipped.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use mrio_core::matrix::DenseMatrix;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    /// `header_rows` label rows, each one entry per value column.
    pub column_labels: Vec<Vec<String>>,
    /// One entry per data row, each with `index_cols` labels.
    pub row_labels: Vec<Vec<String>>,
    pub values: DenseMatrix,
}

/// All numbers are written with 17 significant digits so they parse back exactly.
pub fn format_number(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn parse_number(cell: &str) -> Option<f64> {
    let t = cell.trim();
    if t.is_empty() {
        return Some(0.0);
    }
    t.parse::<f64>().ok().filter(|v| v.is_finite())
}

pub fn delimiter_byte(name: &str) -> Result<u8> {
    match name {
        "tab" | "\t" => Ok(b'\t'),
        "comma" | "," => Ok(b','),
        "semicolon" | ";" => Ok(b';'),
        other => Err(CliError::Config(format!(
            "delimiter must be tab, comma or semicolon, got `{other}`"
        ))),
    }
}

fn reader(path: &Path, delimiter: u8) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .from_reader(file))
}

fn records(path: &Path, delimiter: u8) -> Result<Vec<csv::StringRecord>> {
    reader(path, delimiter)?
        .records()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| CliError::parse(path, e.to_string()))
}

pub fn read_grid(path: &Path, delimiter: u8, index_cols: usize, header_rows: usize) -> Result<Grid> {
    let rows = records(path, delimiter)?;
    if rows.len() < header_rows {
        return Err(CliError::parse(
            path,
            format!("expected {header_rows} header rows, found {}", rows.len()),
        ));
    }
    let width = rows[0].len();
    if width <= index_cols {
        return Err(CliError::parse(path, "no value columns"));
    }
    let ncols = width - index_cols;
    let column_labels: Vec<Vec<String>> = rows[..header_rows]
        .iter()
        .enumerate()
        .map(|(r, rec)| {
            if rec.len() != width {
                return Err(CliError::parse(
                    path,
                    format!("header row {} has {} cells, expected {width}", r + 1, rec.len()),
                ));
            }
            Ok(rec.iter().skip(index_cols).map(|c| c.trim().to_string()).collect())
        })
        .collect::<Result<_>>()?;

    let mut row_labels = Vec::new();
    let mut data = Vec::new();
    for (r, rec) in rows.iter().enumerate().skip(header_rows) {
        let line = r + 1;
        if rec.iter().skip(index_cols).all(|c| c.trim().is_empty()) {
            continue;
        }
        if rec.len() != width {
            return Err(CliError::parse(
                path,
                format!("line {line} has {} cells, expected {width}", rec.len()),
            ));
        }
        row_labels.push(rec.iter().take(index_cols).map(|c| c.trim().to_string()).collect());
        for (c, cell) in rec.iter().enumerate().skip(index_cols) {
            let v = parse_number(cell).ok_or_else(|| {
                CliError::parse(path, format!("line {line}, column {}: not a number: `{cell}`", c + 1))
            })?;
            data.push(v);
        }
    }
    let values = DenseMatrix::from_row_major(row_labels.len(), ncols, data).map_err(|e| CliError::data(path, e))?;
    Ok(Grid {
        column_labels,
        row_labels,
        values,
    })
}

/// Header names in the first column of each header row, then the grid.
pub fn write_grid(path: &Path, delimiter: u8, header_names: &[&str], grid: &Grid) -> Result<()> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = csv::WriterBuilder::new()
        .delimiter(delimiter)
        .flexible(true)
        .from_writer(BufWriter::new(file));
    let index_cols = grid.row_labels.first().map_or(header_names.len().min(1), Vec::len);
    let io = |e: csv::Error| CliError::parse(path, e.to_string());
    for (h, labels) in grid.column_labels.iter().enumerate() {
        let mut lead = vec![String::new(); index_cols];
        if let Some(slot) = lead.last_mut() {
            *slot = header_names.get(h).copied().unwrap_or_default().to_string();
        }
        w.write_record(lead.iter().map(String::as_str).chain(labels.iter().map(String::as_str)))
            .map_err(io)?;
    }
    for (r, labels) in grid.row_labels.iter().enumerate() {
        let values = grid.values.row(r).iter().map(|v| format_number(*v));
        let record: Vec<String> = labels.iter().cloned().chain(values).collect();
        w.write_record(&record).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Plain CSV with a header row; returns rows as trimmed strings.
pub fn read_records(path: &Path, delimiter: u8, expected_cols: usize) -> Result<Vec<Vec<String>>> {
    let rows = records(path, delimiter)?;
    let mut out = Vec::new();
    for (r, rec) in rows.iter().enumerate().skip(1) {
        if rec.iter().all(|c| c.trim().is_empty()) {
            continue;
        }
        if rec.len() < expected_cols {
            return Err(CliError::parse(
                path,
                format!("line {} has {} cells, expected {expected_cols}", r + 1, rec.len()),
            ));
        }
        out.push(rec.iter().take(expected_cols).map(|c| c.trim().to_string()).collect());
    }
    Ok(out)
}

pub fn write_records<I, R>(path: &Path, delimiter: u8, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = csv::WriterBuilder::new()
        .delimiter(delimiter)
        .from_writer(BufWriter::new(file));
    let io = |e: csv::Error| CliError::parse(path, e.to_string());
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(row.into_iter().collect::<Vec<_>>()).map_err(io)?;
    }
    w.into_inner()
        .map_err(|e| CliError::parse(path, e.to_string()))?
        .flush()
        .map_err(|e| CliError::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip_exactly() {
        for v in [0.0, 1.0 / 3.0, 1e-300, 123_456_789.123_456_79, f64::MAX, 5e-324] {
            assert_eq!(parse_number(&format_number(v)), Some(v));
        }
    }

    #[test]
    fn accepts_scientific_and_blank() {
        assert_eq!(parse_number("1.5E-03"), Some(0.0015));
        assert_eq!(parse_number("  "), Some(0.0));
        assert_eq!(parse_number("abc"), None);
        assert_eq!(parse_number("NaN"), None);
    }

    #[test]
    fn grid_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.csv");
        let grid = Grid {
            column_labels: vec![vec!["R1".into(), "R2".into()], vec!["a".into(), "b".into()]],
            row_labels: vec![vec!["R1".into(), "a".into()], vec!["R2".into(), "b".into()]],
            values: DenseMatrix::from_rows(&[vec![0.1, 2.0], vec![1e-17, 3.0]]).unwrap(),
        };
        write_grid(&path, b',', &["region", "sector"], &grid).unwrap();
        assert_eq!(read_grid(&path, b',', 2, 2).unwrap(), grid);
    }

    #[test]
    fn skips_label_only_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.tsv");
        std::fs::write(&path, "region\tR1\nsector\ta\nstressor\t\nx\t2.5\n").unwrap();
        let grid = read_grid(&path, b'\t', 1, 2).unwrap();
        assert_eq!(grid.row_labels, vec![vec!["x".to_string()]]);
        assert_eq!(grid.values[(0, 0)], 2.5);
    }

    #[test]
    fn bad_number_names_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.csv");
        std::fs::write(&path, "region,R1\nsector,a\nx,oops\n").unwrap();
        let err = read_grid(&path, b',', 1, 2).unwrap_err().to_string();
        assert!(err.contains("line 3") && err.contains("oops"), "{err}");
    }
}
