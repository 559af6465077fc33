//! CSV serialization of nodal arrays, per-epsilon traces and verification
//! rows. Numbers are written with Rust's shortest round-trip formatting,
//! which is locale-independent and reproduces the value bit-exactly on read.

use crate::grid::Grid;
use crate::solver::TraceRow;
use std::fmt::Write as _;
use std::io;
use std::path::Path;

fn fmt_f64(v: f64) -> String {
    format!("{}", v)
}

/// Nodal array serialization: comment lines name axes and spacings, then one
/// `index..., value` row per node.
pub fn grid_function_csv(grid: &Grid, values: &[f64]) -> String {
    let mut out = String::new();
    for d in 0..grid.dim() {
        let _ = writeln!(
            out,
            "# axis x{d}: n={} h={} L={}",
            grid.counts()[d],
            fmt_f64(grid.spacings()[d]),
            fmt_f64(grid.lengths()[d]),
        );
    }
    match grid.dim() {
        1 => {
            out.push_str("i0,value\n");
            for (i, v) in values.iter().enumerate() {
                let _ = writeln!(out, "{i},{}", fmt_f64(*v));
            }
        }
        _ => {
            out.push_str("i0,i1,value\n");
            for (idx, v) in values.iter().enumerate() {
                let m = grid.node_multi(idx);
                let _ = writeln!(out, "{},{},{}", m[0], m[1], fmt_f64(*v));
            }
        }
    }
    out
}

pub fn write_grid_function(path: &Path, grid: &Grid, values: &[f64]) -> io::Result<()> {
    std::fs::write(path, grid_function_csv(grid, values))
}

/// Read a nodal array written by [`write_grid_function`]; validates the node
/// count against the grid.
pub fn read_grid_function(path: &Path, grid: &Grid) -> io::Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    let mut values = vec![0.0; grid.node_count()];
    let mut seen = 0usize;
    for line in text.lines() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') || t.starts_with('i') {
            continue;
        }
        let parts: Vec<&str> = t.split(',').collect();
        let bad = || io::Error::new(io::ErrorKind::InvalidData, format!("bad row '{t}'"));
        let idx = match (grid.dim(), parts.as_slice()) {
            (1, [i, _]) => i.trim().parse::<usize>().map_err(|_| bad())?,
            (2, [i, j, _]) => {
                let i = i.trim().parse::<usize>().map_err(|_| bad())?;
                let j = j.trim().parse::<usize>().map_err(|_| bad())?;
                grid.node_index(&[i, j])
            }
            _ => return Err(bad()),
        };
        if idx >= values.len() {
            return Err(io::Error::new(
                io::ErrorKind::InvalidData,
                format!("index {idx} out of range"),
            ));
        }
        values[idx] = parts
            .last()
            .unwrap()
            .trim()
            .parse::<f64>()
            .map_err(|_| bad())?;
        seen += 1;
    }
    if seen != grid.node_count() {
        return Err(io::Error::new(
            io::ErrorKind::InvalidData,
            format!("expected {} rows, found {seen}", grid.node_count()),
        ));
    }
    Ok(values)
}

/// One row per epsilon: `eps, iterations, residual, energy, objective` plus
/// one truncation-energy column per configured level.
pub fn trace_csv(rows: &[TraceRow]) -> String {
    let mut out = String::new();
    out.push_str("eps,iterations,residual,energy,objective");
    if let Some(first) = rows.first() {
        for (k, _) in &first.truncation {
            let _ = write!(out, ",trunc_energy_k={}", fmt_f64(*k));
        }
    }
    out.push('\n');
    for r in rows {
        let _ = write!(
            out,
            "{},{},{},{},{}",
            fmt_f64(r.eps),
            r.iterations,
            fmt_f64(r.residual),
            fmt_f64(r.energy),
            fmt_f64(r.objective)
        );
        for (_, v) in &r.truncation {
            let _ = write!(out, ",{}", fmt_f64(*v));
        }
        out.push('\n');
    }
    out
}

/// One verification row: name, parameters, measured value, threshold, verdict.
#[derive(Debug, Clone)]
pub struct CheckRow {
    pub name: String,
    pub params: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

pub fn checks_csv(rows: &[CheckRow]) -> String {
    let mut out = String::from("check,params,value,threshold,pass\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.name,
            r.params,
            fmt_f64(r.value),
            fmt_f64(r.threshold),
            if r.pass { "pass" } else { "fail" }
        );
    }
    out
}

/// `set, grid size, value` rows for capacity sweeps.
pub fn capacity_csv(rows: &[(String, usize, f64)]) -> String {
    let mut out = String::from("set,n,value\n");
    for (set, n, v) in rows {
        let _ = writeln!(out, "{},{},{}", set, n, fmt_f64(*v));
    }
    out
}
