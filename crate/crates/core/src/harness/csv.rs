//! CSV output. Floats use Rust's `{:e}` formatting, which is the shortest
//! decimal string that parses back to the same binary64 value.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::rangefinder::{ErrorTable, TrainingStep};

fn write_lines(path: &Path, header: &str, rows: impl IntoIterator<Item = String>) -> Result<()> {
    let mut out = String::with_capacity(1 << 12);
    out.push_str(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row);
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn finite(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::SolverFailure(format!("non-finite value {v} in {what}")))
    }
}

pub fn error_table_header(n_dims: usize) -> String {
    (1..=n_dims).map(|n| format!("error_dim_{n},scalar_error_dim_{n},flux_error_dim_{n}")).collect::<Vec<_>>().join(",")
}

pub fn emit_csv(table: &ErrorTable, path: &Path) -> Result<()> {
    let dims = table.n_dims();
    if dims == 0 {
        return Err(Error::EmptyBasis);
    }
    let mut rows = Vec::with_capacity(table.n_samples());
    for i in 0..table.n_samples() {
        let mut row = String::new();
        for n in 0..dims {
            for v in [table.total[i][n], table.scalar[i][n], table.flux[i][n]] {
                if !row.is_empty() {
                    row.push(',');
                }
                write!(row, "{:e}", finite(v, "error table")?).unwrap();
            }
        }
        rows.push(row);
    }
    write_lines(path, &error_table_header(dims), rows)
}

pub fn emit_sigmas(sigmas: &[f64], path: &Path) -> Result<()> {
    let rows = sigmas
        .iter()
        .enumerate()
        .map(|(k, &s)| Ok(format!("{},{:e}", k + 1, finite(s, "singular values")?)))
        .collect::<Result<Vec<_>>>()?;
    write_lines(path, "k,sigma", rows)
}

pub fn emit_training_log(log: &[TrainingStep], path: &Path) -> Result<()> {
    let rows = log.iter().map(|s| format!("{},{:e},{:e}", s.basis_size, s.max_test_norm, s.estimate));
    write_lines(path, "basis_size,max_test_norm,estimate", rows)
}

/// One basis vector per row, flat interior `[flux; scalar]` coefficients.
pub fn emit_basis(basis: &[Vec<f64>], n_flux: usize, path: &Path) -> Result<()> {
    let n = basis.first().map_or(0, Vec::len);
    let header = (0..n)
        .map(|i| if i < n_flux { format!("flux_{i}") } else { format!("scalar_{}", i - n_flux) })
        .collect::<Vec<_>>()
        .join(",");
    let mut rows = Vec::with_capacity(basis.len());
    for b in basis {
        let mut row = String::with_capacity(24 * n);
        for (i, &v) in b.iter().enumerate() {
            if i > 0 {
                row.push(',');
            }
            write!(row, "{:e}", finite(v, "basis")?).unwrap();
        }
        rows.push(row);
    }
    write_lines(path, &header, rows)
}

/// Plain numeric CSV with the given header.
pub fn emit_rows(header: &str, rows: &[Vec<f64>], path: &Path) -> Result<()> {
    let lines =
        rows.iter().map(|r| r.iter().map(|&v| format!("{v:e}")).collect::<Vec<_>>().join(",")).collect::<Vec<_>>();
    write_lines(path, header, lines)
}
