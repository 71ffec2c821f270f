//! Matrix CSV files and instance manifests.
//!
//! A matrix file starts with a `rows,cols` header followed by one line per
//! row. Entries are `a`, `bi` or `a+bi`, where `a` and `b` are integers,
//! fractions `p/q` or decimals. A manifest has lines `NAME = path`, with
//! paths relative to the manifest, blank lines and `#` comments.

use crate::matrix::{Instance, Matrix};
use crate::scalar::{parse_gauss, GaussRat, Scalar, Tower};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum IoError {
    #[error("{path}: {message}")]
    Read { path: String, message: String },
    #[error("{source_name}:{line}: {message}")]
    Format {
        source_name: String,
        line: usize,
        message: String,
    },
}

fn format_error(source_name: &str, line: usize, message: impl Into<String>) -> IoError {
    IoError::Format {
        source_name: source_name.to_string(),
        line,
        message: message.into(),
    }
}

fn read(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|e| IoError::Read {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Parses matrix CSV text. `source_name` labels error messages.
pub fn parse_matrix_csv(text: &str, source_name: &str) -> Result<Matrix<GaussRat>, IoError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hl, header) = lines
        .next()
        .ok_or_else(|| format_error(source_name, 1, "missing `rows,cols` header"))?;
    let dims: Vec<usize> = header
        .split(',')
        .map(|s| s.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| format_error(source_name, hl, "header must be `rows,cols`"))?;
    let [rows, cols] = dims[..] else {
        return Err(format_error(source_name, hl, "header must be `rows,cols`"));
    };
    if rows == 0 || cols == 0 {
        return Err(format_error(source_name, hl, "dimensions must be positive"));
    }
    let mut data = Vec::with_capacity(rows * cols);
    let mut seen = 0;
    for (ln, line) in lines {
        seen += 1;
        if seen > rows {
            return Err(format_error(source_name, ln, format!("more than {rows} rows")));
        }
        let entries: Vec<&str> = line.split(',').collect();
        if entries.len() != cols {
            return Err(format_error(
                source_name,
                ln,
                format!("expected {cols} entries, found {}", entries.len()),
            ));
        }
        for e in entries {
            data.push(
                parse_gauss(e)
                    .ok_or_else(|| format_error(source_name, ln, format!("bad entry `{}`", e.trim())))?,
            );
        }
    }
    if seen != rows {
        return Err(format_error(
            source_name,
            hl,
            format!("expected {rows} rows, found {seen}"),
        ));
    }
    Ok(Matrix::from_vec(rows, cols, data))
}

pub fn read_matrix_csv(path: &Path) -> Result<Matrix<GaussRat>, IoError> {
    parse_matrix_csv(&read(path)?, &path.display().to_string())
}

fn format_f64(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x}")
    }
}

/// Text of one entry: exact values verbatim, floats in shortest
/// round-trip decimal form.
pub fn format_entry<T: Scalar>(x: &T) -> String {
    match T::TOWER {
        Tower::Exact => x.to_string(),
        Tower::Float => {
            let z = x.to_c64();
            if z.im == 0.0 {
                format_f64(z.re)
            } else if z.re == 0.0 {
                format!("{}i", format_f64(z.im))
            } else if z.im < 0.0 {
                format!("{}-{}i", format_f64(z.re), format_f64(-z.im))
            } else {
                format!("{}+{}i", format_f64(z.re), format_f64(z.im))
            }
        }
    }
}

pub fn write_matrix_csv<T: Scalar>(m: &Matrix<T>) -> String {
    let mut out = format!("{},{}\n", m.rows(), m.cols());
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(format_entry).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Parses a manifest into `(name, path)` pairs with paths resolved
/// against `base`.
pub fn parse_manifest(
    text: &str,
    base: &Path,
    source_name: &str,
) -> Result<Vec<(String, PathBuf)>, IoError> {
    let mut out: Vec<(String, PathBuf)> = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (name, path) = line
            .split_once('=')
            .ok_or_else(|| format_error(source_name, k + 1, "expected `NAME = path`"))?;
        let name = name.trim();
        if name.is_empty() || !name.chars().all(|c| c.is_alphanumeric() || c == '_') {
            return Err(format_error(source_name, k + 1, format!("bad variable name `{name}`")));
        }
        if out.iter().any(|(n, _)| n == name) {
            return Err(format_error(source_name, k + 1, format!("duplicate variable `{name}`")));
        }
        out.push((name.to_string(), base.join(path.trim())));
    }
    Ok(out)
}

/// Loads every matrix listed in a manifest file.
pub fn read_instance(manifest: &Path) -> Result<Instance<GaussRat>, IoError> {
    let text = read(manifest)?;
    let base = manifest.parent().unwrap_or(Path::new("."));
    let mut inst = Instance::new();
    for (name, path) in parse_manifest(&text, base, &manifest.display().to_string())? {
        inst.insert(name, read_matrix_csv(&path)?);
    }
    Ok(inst)
}
