//! Plain-text matrix format.
//!
//! First non-comment line holds `rows cols`; each following non-comment line
//! holds one row of whitespace-separated decimals. Lines whose first
//! non-blank character is `#` are ignored, as are blank lines.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::matrix::DenseMatrix;

pub fn parse_matrix<T: Scalar>(text: &str) -> Result<DenseMatrix<T>> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, header) = lines.next().ok_or(Error::Parse {
        line: 0,
        message: "missing 'rows cols' header".into(),
    })?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Parse {
            line: hline,
            message: format!("bad header: {e}"),
        })?;
    let [rows, cols] = dims[..] else {
        return Err(Error::Parse {
            line: hline,
            message: "header must be 'rows cols'".into(),
        });
    };
    let mut data = Vec::with_capacity(rows * cols);
    let mut seen = 0;
    for (line, l) in lines {
        if seen == rows {
            return Err(Error::Parse {
                line,
                message: format!("more than {rows} data rows"),
            });
        }
        let before = data.len();
        for tok in l.split_whitespace() {
            let v: f64 = tok.parse().map_err(|_| Error::Parse {
                line,
                message: format!("'{tok}' is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line,
                    message: format!("non-finite entry '{tok}'"),
                });
            }
            data.push(T::of(v));
        }
        if data.len() - before != cols {
            return Err(Error::Parse {
                line,
                message: format!("expected {cols} entries, got {}", data.len() - before),
            });
        }
        seen += 1;
    }
    if seen != rows {
        return Err(Error::Parse {
            line: 0,
            message: format!("expected {rows} data rows, got {seen}"),
        });
    }
    DenseMatrix::new(rows, cols, data)
}

/// Reads a vector stored as an `n×1` or `1×n` matrix.
pub fn parse_vector<T: Scalar>(text: &str) -> Result<Vec<T>> {
    let m: DenseMatrix<T> = parse_matrix(text)?;
    match m.shape() {
        (_, 1) | (1, _) => Ok(m.as_slice().to_vec()),
        (r, c) => Err(Error::Input(format!("expected a vector, got a {r}x{c} matrix"))),
    }
}

pub fn format_matrix<T: Scalar>(m: &DenseMatrix<T>) -> String {
    let mut out = format!("{} {}\n", m.rows(), m.cols());
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|v| format!("{:.16e}", v.as_f64())).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// Writes a vector as an `n×1` matrix.
pub fn format_vector<T: Scalar>(v: &[T]) -> String {
    let mut out = format!("{} 1\n", v.len());
    for x in v {
        out.push_str(&format!("{:.16e}\n", x.as_f64()));
    }
    out
}
