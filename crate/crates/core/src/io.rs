//! Plain-text matrix files.
//!
//! Dense:
//!
//! ```text
//! n
//! a_00 a_01 ... a_0(n-1)
//! ...
//! ```
//!
//! Sparse (strict upper triangle, 0-based, `i < j`, `v > 0`):
//!
//! ```text
//! sparse n nnz
//! i j v
//! ...
//! ```
//!
//! Values are written with the shortest representation that parses back to
//! the same `f64`, so write → read is bit-exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::AffinityMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MatrixFormat {
    Dense,
    Sparse,
}

pub fn parse_matrix(text: &str) -> Result<AffinityMatrix> {
    let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l.trim()));
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "empty matrix file"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let matrix = match fields.as_slice() {
        ["sparse", n, nnz] => {
            let n = parse_count(n, 1, "n")?;
            let nnz = parse_count(nnz, 1, "nnz")?;
            parse_sparse(n, nnz, &mut lines)?
        }
        [n] => parse_dense(parse_count(n, 1, "n")?, &mut lines)?,
        _ => {
            return Err(Error::parse(
                1,
                format!("expected `n` or `sparse n nnz`, found `{header}`"),
            ))
        }
    };
    if let Some((line, extra)) = lines.find(|(_, l)| !l.is_empty()) {
        return Err(Error::parse(line, format!("unexpected trailing content `{extra}`")));
    }
    Ok(matrix)
}

fn parse_count(s: &str, line: usize, what: &str) -> Result<usize> {
    s.parse()
        .map_err(|_| Error::parse(line, format!("{what} must be a nonnegative integer, found `{s}`")))
}

fn parse_value(s: &str, line: usize) -> Result<f64> {
    let v: f64 = s
        .parse()
        .map_err(|_| Error::parse(line, format!("`{s}` is not a number")))?;
    if !v.is_finite() || v < 0.0 {
        return Err(Error::parse(line, format!("entry {v} must be finite and nonnegative")));
    }
    Ok(v)
}

fn parse_dense<'a>(
    n: usize,
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
) -> Result<AffinityMatrix> {
    if n == 0 {
        return Err(Error::parse(1, "n must be positive"));
    }
    let mut entries = Vec::with_capacity(n * n);
    for i in 0..n {
        let (line, row) = lines
            .next()
            .ok_or_else(|| Error::parse(i + 2, format!("missing row {i}")))?;
        let values = row
            .split_whitespace()
            .map(|s| parse_value(s, line))
            .collect::<Result<Vec<_>>>()?;
        if values.len() != n {
            return Err(Error::parse(
                line,
                format!("row {i} has {} entries, expected {n}", values.len()),
            ));
        }
        if values[i] != 0.0 {
            return Err(Error::parse(line, format!("diagonal entry ({i},{i}) = {} is not zero", values[i])));
        }
        for (j, &v) in values.iter().enumerate().take(i) {
            let mirror = entries[j * n + i];
            if v != mirror {
                return Err(Error::parse(
                    line,
                    format!("entry ({i},{j}) = {v} differs from ({j},{i}) = {mirror}"),
                ));
            }
        }
        entries.extend(values);
    }
    AffinityMatrix::from_dense(n, entries)
}

fn parse_sparse<'a>(
    n: usize,
    nnz: usize,
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
) -> Result<AffinityMatrix> {
    if n == 0 {
        return Err(Error::parse(1, "n must be positive"));
    }
    let mut triplets = Vec::with_capacity(nnz);
    let mut seen = std::collections::HashMap::with_capacity(nnz);
    for k in 0..nnz {
        let (line, text) = lines
            .next()
            .ok_or_else(|| Error::parse(k + 2, format!("expected {nnz} entries, found {k}")))?;
        let fields: Vec<&str> = text.split_whitespace().collect();
        let [i, j, v] = fields.as_slice() else {
            return Err(Error::parse(line, format!("expected `i j v`, found `{text}`")));
        };
        let i = parse_count(i, line, "i")?;
        let j = parse_count(j, line, "j")?;
        let v = parse_value(v, line)?;
        if i >= n || j >= n {
            return Err(Error::parse(line, format!("index ({i},{j}) out of range for n = {n}")));
        }
        if i == j {
            return Err(Error::parse(line, format!("diagonal entry ({i},{i}) is not allowed")));
        }
        if i > j {
            return Err(Error::parse(line, format!("entry ({i},{j}) must have i < j")));
        }
        if v == 0.0 {
            return Err(Error::parse(line, format!("entry ({i},{j}) must be positive")));
        }
        if let Some(prev) = seen.insert((i, j), v) {
            if prev != v {
                return Err(Error::parse(
                    line,
                    format!("entry ({i},{j}) repeated with a different value ({prev} vs {v})"),
                ));
            }
        }
        triplets.push((i, j, v));
    }
    AffinityMatrix::from_triplets(n, triplets)
}

pub fn write_dense(a: &AffinityMatrix) -> String {
    let n = a.n();
    let mut out = String::with_capacity(n * n * 20);
    let _ = writeln!(out, "{n}");
    for i in 0..n {
        for j in 0..n {
            if j > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{}", a.get(i, j));
        }
        out.push('\n');
    }
    out
}

pub fn write_sparse(a: &AffinityMatrix) -> String {
    let entries = a.upper_entries();
    let mut out = String::with_capacity(entries.len() * 28 + 32);
    let _ = writeln!(out, "sparse {} {}", a.n(), entries.len());
    for (i, j, v) in entries {
        let _ = writeln!(out, "{i} {j} {v}");
    }
    out
}

pub fn write_matrix(a: &AffinityMatrix, format: MatrixFormat) -> String {
    match format {
        MatrixFormat::Dense => write_dense(a),
        MatrixFormat::Sparse => write_sparse(a),
    }
}

pub fn read_matrix_file(path: &Path) -> Result<AffinityMatrix> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_matrix(&text)
}

pub fn write_matrix_file(path: &Path, a: &AffinityMatrix, format: MatrixFormat) -> Result<()> {
    fs::write(path, write_matrix(a, format)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const A3_DENSE: &str = "3\n0 0.5 0.2\n0.5 0 0.1\n0.2 0.1 0\n";
    const A3_SPARSE: &str = "sparse 3 3\n0 1 0.5\n0 2 0.2\n1 2 0.1\n";

    fn line_of(err: Error) -> usize {
        match err {
            Error::Parse { line, .. } => line,
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn dense_and_sparse_agree() {
        let d = parse_matrix(A3_DENSE).unwrap();
        let s = parse_matrix(A3_SPARSE).unwrap();
        assert!(!d.is_sparse());
        assert!(s.is_sparse());
        assert_eq!(s.to_dense(), d);
        assert_eq!(write_dense(&d), A3_DENSE);
        assert_eq!(write_sparse(&d), A3_SPARSE);
        assert_eq!(write_sparse(&s), A3_SPARSE);
    }

    #[test]
    fn dense_errors_carry_line_numbers() {
        assert_eq!(line_of(parse_matrix("2\n0 1\n1 1\n").unwrap_err()), 3);
        assert_eq!(line_of(parse_matrix("2\n0 1\n0.5 0\n").unwrap_err()), 3);
        assert_eq!(line_of(parse_matrix("2\n0 1\n").unwrap_err()), 3);
        assert_eq!(line_of(parse_matrix("2\n0 x\n1 0\n").unwrap_err()), 2);
        assert_eq!(line_of(parse_matrix("2\n0 1 1\n1 0\n").unwrap_err()), 2);
        assert_eq!(line_of(parse_matrix("2\n0 1\n1 0\n7\n").unwrap_err()), 4);
        assert_eq!(line_of(parse_matrix("two\n").unwrap_err()), 1);
        assert_eq!(line_of(parse_matrix("").unwrap_err()), 1);
        assert_eq!(line_of(parse_matrix("0\n").unwrap_err()), 1);
    }

    #[test]
    fn sparse_errors_carry_line_numbers() {
        assert_eq!(line_of(parse_matrix("sparse 3 1\n1 1 0.5\n").unwrap_err()), 2);
        assert_eq!(line_of(parse_matrix("sparse 3 1\n1 0 0.5\n").unwrap_err()), 2);
        assert_eq!(line_of(parse_matrix("sparse 3 2\n0 1 0.5\n0 1 0.4\n").unwrap_err()), 3);
        assert_eq!(line_of(parse_matrix("sparse 3 1\n0 3 0.5\n").unwrap_err()), 2);
        assert_eq!(line_of(parse_matrix("sparse 3 1\n0 1 0\n").unwrap_err()), 2);
        assert_eq!(line_of(parse_matrix("sparse 3 2\n0 1 0.5\n").unwrap_err()), 3);
        assert_eq!(line_of(parse_matrix("sparse 3\n").unwrap_err()), 1);
    }

    #[test]
    fn blank_trailing_lines_are_fine() {
        assert!(parse_matrix("2\n0 1\n1 0\n\n\n").is_ok());
        let empty = parse_matrix("sparse 4 0\n").unwrap();
        assert_eq!(empty.nnz(), 0);
        assert_eq!(empty.n(), 4);
    }
}
