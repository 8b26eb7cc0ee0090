//! Plain-text matrix files.
//!
//! Dense: one row per line, comma-separated. Sparse: a header line `n nnz_stored`
//! followed by `i j value` triples (0-based, `i <= j`), whitespace-separated.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::{ColBlock, SparseSymmetric, SymmetricDense};

fn parse_err(path: &Path, line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        column,
        message: message.into(),
    }
}

/// Reads comma-separated rows as a general (not necessarily square) row-major table.
pub fn read_table(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut rows = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .enumerate()
            .map(|(c, f)| {
                f.trim()
                    .parse::<f64>()
                    .map_err(|_| parse_err(path, ln + 1, c + 1, format!("not a number: {:?}", f.trim())))
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first().map(|r: &Vec<f64>| r.len()) {
            if row.len() != first {
                return Err(parse_err(
                    path,
                    ln + 1,
                    row.len().min(first) + 1,
                    format!("expected {first} fields, found {}", row.len()),
                ));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(parse_err(path, 1, 1, "empty file"));
    }
    Ok(rows)
}

pub fn read_dense(path: &Path) -> Result<SymmetricDense> {
    SymmetricDense::from_rows(&read_table(path)?)
}

pub fn write_dense(path: &Path, a: &SymmetricDense) -> Result<()> {
    let n = a.n();
    let rows: Vec<&[f64]> = (0..n).map(|i| a.row(i)).collect();
    write_rows(path, rows.into_iter())
}

/// Writes an `n x m` block one row per line.
pub fn write_block(path: &Path, b: &ColBlock) -> Result<()> {
    let rows: Vec<Vec<f64>> = (0..b.rows())
        .map(|i| (0..b.cols()).map(|j| b.get(i, j)).collect())
        .collect();
    write_rows(path, rows.iter().map(|r| r.as_slice()))
}

pub fn write_values(path: &Path, values: &[f64]) -> Result<()> {
    let mut out = String::new();
    for v in values {
        let _ = writeln!(out, "{v:e}");
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

fn write_rows<'a>(path: &Path, rows: impl Iterator<Item = &'a [f64]>) -> Result<()> {
    let mut out = String::new();
    for row in rows {
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            // shortest representation that round-trips exactly
            let _ = write!(out, "{v:e}");
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn read_sparse(path: &Path) -> Result<SparseSymmetric> {
    let (n, triplets) = read_triplets(path)?;
    SparseSymmetric::from_triplets(n, triplets)
}

/// Index pattern of a sparse matrix file; values (including zeros) are ignored.
pub fn read_pattern(path: &Path) -> Result<(usize, Vec<(usize, usize)>)> {
    let (n, triplets) = read_triplets(path)?;
    Ok((n, triplets.into_iter().map(|(i, j, _)| (i, j)).collect()))
}

type Triplets = Vec<(usize, usize, f64)>;

fn read_triplets(path: &Path) -> Result<(usize, Triplets)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (hl, header) = lines.next().ok_or_else(|| parse_err(path, 1, 1, "empty file"))?;
    let head: Vec<&str> = header.split_whitespace().collect();
    if head.len() != 2 {
        return Err(parse_err(path, hl + 1, 1, "header must be `n nnz_stored`"));
    }
    let n: usize = head[0]
        .parse()
        .map_err(|_| parse_err(path, hl + 1, 1, "bad dimension"))?;
    let stored: usize = head[1]
        .parse()
        .map_err(|_| parse_err(path, hl + 1, 2, "bad entry count"))?;
    let mut triplets = Vec::with_capacity(stored);
    for (ln, line) in lines {
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 3 {
            return Err(parse_err(path, ln + 1, 1, "expected `i j value`"));
        }
        let i: usize = f[0].parse().map_err(|_| parse_err(path, ln + 1, 1, "bad row index"))?;
        let j: usize = f[1].parse().map_err(|_| parse_err(path, ln + 1, 2, "bad column index"))?;
        let v: f64 = f[2].parse().map_err(|_| parse_err(path, ln + 1, 3, "bad value"))?;
        if i > j {
            return Err(parse_err(path, ln + 1, 1, "row index exceeds column index"));
        }
        triplets.push((i, j, v));
    }
    if triplets.len() != stored {
        return Err(parse_err(
            path,
            hl + 1,
            2,
            format!("header declares {stored} entries, found {}", triplets.len()),
        ));
    }
    if let Some(&(i, j, _)) = triplets.iter().find(|t| t.1 >= n) {
        return Err(parse_err(path, hl + 1, 1, format!("entry ({i}, {j}) outside dimension {n}")));
    }
    Ok((n, triplets))
}

pub fn write_sparse(path: &Path, a: &SparseSymmetric) -> Result<()> {
    let mut out = format!("{} {}\n", a.n(), a.stored());
    for &(i, j, v) in a.triplets() {
        let _ = writeln!(out, "{i} {j} {v:e}");
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
