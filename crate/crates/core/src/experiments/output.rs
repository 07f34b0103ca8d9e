//! CSV rendering of a sweep: one row per point.
//!
//! Columns, in order:
//!
//! ```text
//! axis_value, nmse_fc, nmse_ns, failures_fc, failures_ns, flagged,
//! analytic_R_C..., empirical_fc_R_C..., empirical_ns_R_C...
//! ```
//!
//! Matrix blocks are `2K × 2K` in row-major order, indexed from 0, with rows
//! and columns ordered `(ξ_1..ξ_K, η_1..η_K)`. For SNR sweeps they hold the
//! average over the swept phases. Missing values are empty cells. Floats use
//! the shortest representation that round-trips.

use std::io::Write;

use super::{Method, SweepPoint, SweepResult};
use crate::error::Result;

pub fn csv_header(eigenvalue_count: usize) -> Vec<String> {
    let dim = 2 * eigenvalue_count;
    let mut cols: Vec<String> =
        ["axis_value", "nmse_fc", "nmse_ns", "failures_fc", "failures_ns", "flagged"].map(String::from).to_vec();
    for block in ["analytic", "empirical_fc", "empirical_ns"] {
        for r in 0..dim {
            for c in 0..dim {
                cols.push(format!("{block}_{r}_{c}"));
            }
        }
    }
    cols
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn row(point: &SweepPoint, dim: usize) -> Vec<String> {
    let mut out = vec![
        point.axis_value.to_string(),
        cell(point.nmse_fc),
        cell(point.nmse_ns),
        point.failures_fc.to_string(),
        point.failures_ns.to_string(),
        point.flagged.to_string(),
    ];
    for block in [point.mean_analytic(), point.mean_empirical(Method::Fc), point.mean_empirical(Method::Ns)] {
        match block {
            Some(m) if m.len() == dim * dim => out.extend(m.iter().map(|v| v.to_string())),
            _ => out.extend(std::iter::repeat_n(String::new(), dim * dim)),
        }
    }
    out
}

/// Writes the header and one row per point.
pub fn write_csv<W: Write>(result: &SweepResult, writer: W) -> Result<()> {
    let dim = 2 * result.eigenvalue_count;
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(csv_header(result.eigenvalue_count))?;
    for p in &result.points {
        w.write_record(row(p, dim))?;
    }
    w.flush()?;
    Ok(())
}
