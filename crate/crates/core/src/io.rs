//! Matrix text and CSV formats.
//!
//! The text format is a header line `"m n"` followed by `m` lines of `n`
//! space-separated numbers, each line ending in `\n`. Numbers are written in
//! the shorter of Rust's plain and exponent renderings, both of which are the
//! shortest digit strings that round-trip exactly.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

pub fn format_number(v: f64) -> String {
    let plain = format!("{v}");
    let exp = format!("{v:e}");
    if exp.len() < plain.len() {
        exp
    } else {
        plain
    }
}

pub fn to_text(m: &DenseMatrix) -> String {
    let mut out = format!("{} {}\n", m.rows(), m.cols());
    for i in 0..m.rows() {
        let line: Vec<String> = m.row(i).iter().map(|v| format_number(*v)).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

fn parse_entry(tok: &str, line: usize) -> Result<f64> {
    let v: f64 = tok.trim().parse().map_err(|_| Error::Parse {
        line,
        msg: format!("invalid number {tok:?}"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            msg: format!("non-finite value {tok:?}"),
        });
    }
    Ok(v)
}

pub fn read_text<R: Read>(reader: R) -> Result<DenseMatrix> {
    let mut lines = BufReader::new(reader).lines();
    let header = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "missing header".into(),
    })??;
    let dims: Vec<&str> = header.split_whitespace().collect();
    let parse_dim = |s: &str| {
        s.parse::<usize>().map_err(|_| Error::Parse {
            line: 1,
            msg: format!("invalid dimension {s:?}"),
        })
    };
    let (m, n) = match dims.as_slice() {
        [a, b] => (parse_dim(a)?, parse_dim(b)?),
        _ => {
            return Err(Error::Parse {
                line: 1,
                msg: "header must be \"m n\"".into(),
            })
        }
    };
    let mut data = Vec::with_capacity(m.saturating_mul(n));
    for i in 0..m {
        let lineno = i + 2;
        let line = lines.next().ok_or(Error::Parse {
            line: lineno,
            msg: format!("expected {m} rows"),
        })??;
        let before = data.len();
        for tok in line.split_whitespace() {
            data.push(parse_entry(tok, lineno)?);
        }
        if data.len() - before != n {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected {n} entries, found {}", data.len() - before),
            });
        }
    }
    for (k, rest) in lines.enumerate() {
        if !rest?.trim().is_empty() {
            return Err(Error::Parse {
                line: m + 2 + k,
                msg: "trailing content after the last row".into(),
            });
        }
    }
    DenseMatrix::new(m, n, data)
}

pub fn write_csv<W: Write>(m: &DenseMatrix, writer: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(writer);
    for i in 0..m.rows() {
        w.write_record(m.row(i).iter().map(|v| format_number(*v)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(reader: R) -> Result<DenseMatrix> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(reader);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|tok| parse_entry(tok, i + 1))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    DenseMatrix::from_rows(&rows)
}

fn is_csv(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

/// Reads a matrix, choosing CSV for `.csv` files and the text format otherwise.
pub fn read_matrix(path: &Path) -> Result<DenseMatrix> {
    let file = fs::File::open(path)?;
    if is_csv(path) {
        read_csv(file)
    } else {
        read_text(file)
    }
}

pub fn write_matrix(m: &DenseMatrix, path: &Path) -> Result<()> {
    if is_csv(path) {
        write_csv(m, fs::File::create(path)?)
    } else {
        fs::write(path, to_text(m))?;
        Ok(())
    }
}
