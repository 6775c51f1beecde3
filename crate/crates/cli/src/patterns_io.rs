//! Port-pattern table CSV reading and synthetic-pattern generation.

use std::path::Path;

use num_complex::Complex64;

use mma_core::array::{PortPattern, PortPatternTable};
use mma_core::error::{Error, Result};
use mma_core::farfield::{FarField, SphereGrid};

/// Sampled far fields of the synthetic multi-mode pattern family, for
/// writing the pattern-table CSV.
pub fn synthetic_pattern_fields(n_ports: usize, grid: &SphereGrid) -> Vec<FarField> {
    PortPatternTable::synthetic(n_ports, grid)
        .patterns
        .into_iter()
        .map(|p| match p {
            PortPattern::Sampled(f) => f,
            PortPattern::Isotropic => unreachable!("synthetic patterns are sampled"),
        })
        .collect()
}

/// Read a pattern-table CSV (port, theta_rad, phi_rad, re/im e_theta, re/im
/// e_phi, weight) back into a pattern table. The sample layout must match the
/// grids this toolkit writes (Gauss-Legendre rows, uniform azimuth).
pub fn read_pattern_table(path: &Path) -> Result<PortPatternTable> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    if !header.starts_with("port,theta_rad,phi_rad") {
        return Err(Error::Io(format!(
            "{}: not a pattern-table CSV (header '{header}')",
            path.display()
        )));
    }
    struct Row {
        port: usize,
        theta: f64,
        phi: f64,
        e_theta: Complex64,
        e_phi: Complex64,
    }
    let mut rows = Vec::new();
    for (ln, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(Error::Io(format!(
                "{}:{}: expected 8 columns, got {}",
                path.display(),
                ln + 2,
                fields.len()
            )));
        }
        let num = |i: usize| -> Result<f64> {
            fields[i]
                .trim()
                .parse()
                .map_err(|_| Error::Io(format!("{}:{}: bad number '{}'", path.display(), ln + 2, fields[i])))
        };
        rows.push(Row {
            port: num(0)? as usize,
            theta: num(1)?,
            phi: num(2)?,
            e_theta: Complex64::new(num(3)?, num(4)?),
            e_phi: Complex64::new(num(5)?, num(6)?),
        });
    }
    if rows.is_empty() {
        return Err(Error::Io(format!("{}: empty pattern table", path.display())));
    }
    let n_ports = rows.iter().map(|r| r.port).max().unwrap() + 1;
    let per_port = rows.len() / n_ports;
    if per_port * n_ports != rows.len() {
        return Err(Error::Io(format!(
            "{}: ragged pattern table ({} rows over {} ports)",
            path.display(),
            rows.len(),
            n_ports
        )));
    }
    // Infer the grid shape from the first port block: rows are theta-major.
    let first = &rows[..per_port];
    let n_phi = first
        .iter()
        .position(|r| (r.theta - first[0].theta).abs() > 1e-12)
        .unwrap_or(per_port);
    if n_phi == 0 || per_port % n_phi != 0 {
        return Err(Error::Io(format!("{}: cannot infer grid shape", path.display())));
    }
    let n_theta = per_port / n_phi;
    let grid = SphereGrid::new(n_theta, n_phi)?;

    let mut patterns = Vec::with_capacity(n_ports);
    for p in 0..n_ports {
        let block = &rows[p * per_port..(p + 1) * per_port];
        if block.iter().any(|r| r.port != p) {
            return Err(Error::Io(format!(
                "{}: pattern rows out of port-major order",
                path.display()
            )));
        }
        let mut e_theta = Vec::with_capacity(per_port);
        let mut e_phi = Vec::with_capacity(per_port);
        for (i, row) in block.iter().enumerate() {
            let want_theta = grid.theta[i / n_phi];
            let want_phi = grid.phi[i % n_phi];
            if (row.theta - want_theta).abs() > 1e-9 || (row.phi - want_phi).abs() > 1e-9 {
                return Err(Error::Io(format!(
                    "{}: sample {i} of port {p} off the expected sphere grid",
                    path.display()
                )));
            }
            e_theta.push(row.e_theta);
            e_phi.push(row.e_phi);
        }
        patterns.push(PortPattern::Sampled(FarField {
            grid: grid.clone(),
            e_theta,
            e_phi,
        }));
    }
    Ok(PortPatternTable { patterns })
}
