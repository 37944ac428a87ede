//! CSV formats.
//!
//! Adjacency matrices are headerless `d x d` grids, row `i` holding the edges
//! leaving node `i`. Binary graphs use `0`/`1`; weighted matrices are written
//! with shortest round-trip float formatting. Datasets carry a header row of
//! variable names followed by one row per sample.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::{BinaryGraph, WeightedAdjacency};
use crate::sem::Dataset;

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn write_rows<I, R, S>(path: &Path, rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = S>,
    S: std::fmt::Display,
{
    let mut out = create(path)?;
    let io_err = |e| Error::io(path, e);
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(|c| c.to_string()).collect();
        writeln!(out, "{}", cells.join(",")).map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

pub fn write_weighted_csv(path: &Path, w: &WeightedAdjacency) -> Result<()> {
    let m = w.matrix();
    write_rows(
        path,
        (0..m.nrows()).map(|i| (0..m.ncols()).map(move |j| m[(i, j)])),
    )
}

pub fn write_binary_csv(path: &Path, g: &BinaryGraph) -> Result<()> {
    let d = g.d();
    write_rows(
        path,
        (0..d).map(|i| (0..d).map(move |j| g.has_edge(i, j) as u8)),
    )
}

fn reader(path: &Path, has_headers: bool) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(has_headers)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Numeric rows, each tagged with its 1-based line number.
fn numeric_rows(path: &Path, rdr: &mut csv::Reader<File>) -> Result<Vec<(usize, Vec<f64>)>> {
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_error(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let values = record
            .iter()
            .enumerate()
            .map(|(col, cell)| {
                cell.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| {
                        parse_error(
                            path,
                            line,
                            format!("column {}: not a finite number: {cell:?}", col + 1),
                        )
                    })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push((line, values));
    }
    Ok(rows)
}

fn read_square(path: &Path) -> Result<DMatrix<f64>> {
    let rows = numeric_rows(path, &mut reader(path, false)?)?;
    let d = rows.len();
    if d == 0 {
        return Err(parse_error(path, 1, "empty adjacency matrix"));
    }
    let mut m = DMatrix::zeros(d, d);
    for (i, (line, row)) in rows.iter().enumerate() {
        if row.len() != d {
            return Err(parse_error(
                path,
                *line,
                format!("expected {d} columns, found {}", row.len()),
            ));
        }
        for (j, v) in row.iter().enumerate() {
            m[(i, j)] = *v;
        }
    }
    Ok(m)
}

pub fn read_weighted_csv(path: &Path) -> Result<WeightedAdjacency> {
    WeightedAdjacency::new(read_square(path)?)
}

/// Reads a binary adjacency; any non-zero entry is an edge.
pub fn read_binary_csv(path: &Path) -> Result<BinaryGraph> {
    BinaryGraph::from_matrix(&read_square(path)?)
}

pub fn write_dataset_csv(path: &Path, data: &Dataset) -> Result<()> {
    let m = data.values();
    let header = std::iter::once(
        data.names()
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>(),
    );
    let body = (0..m.nrows()).map(|r| {
        (0..m.ncols())
            .map(|c| m[(r, c)].to_string())
            .collect::<Vec<_>>()
    });
    write_rows(path, header.chain(body))
}

/// Reads a header row of names and a rectangular numeric body, unmodified.
pub fn read_dataset_csv(path: &Path) -> Result<Dataset> {
    let mut rdr = reader(path, true)?;
    let names: Vec<String> = rdr
        .headers()
        .map_err(|e| parse_error(path, 1, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if names.is_empty() || names.iter().all(String::is_empty) {
        return Err(parse_error(path, 1, "missing header row"));
    }
    let rows = numeric_rows(path, &mut rdr)?;
    if rows.is_empty() {
        return Err(parse_error(path, 2, "no data rows"));
    }
    let d = names.len();
    let mut values = DMatrix::zeros(rows.len(), d);
    for (r, (line, row)) in rows.iter().enumerate() {
        if row.len() != d {
            return Err(parse_error(
                path,
                *line,
                format!("expected {d} columns, found {}", row.len()),
            ));
        }
        for (c, v) in row.iter().enumerate() {
            values[(r, c)] = *v;
        }
    }
    Dataset::new(values, names).map_err(|e| parse_error(path, 1, e.to_string()))
}
