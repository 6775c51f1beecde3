//! Frequency-independent analog precoders.
//!
//! Wire order for transmit ports is element-major: port index = m * N_p + p.
//! Structural contracts per scheme:
//!
//! - digital: A = I, N_RF = N_Tx
//! - fully_connected: every entry unit modulus, configured N_RF
//! - spatial_filtering: N_RF = N_p; same-mode ports of all elements form one
//!   sub-array, so A is block diagonal in mode-major row order, each block a
//!   steering vector across elements
//! - single_element_select: N_RF = N_Ant; each element block picks the single
//!   port pattern that fits the target direction best
//! - single_element_combine: N_RF = N_Ant; each element block is the
//!   unit-norm combination steering that element's pattern to the target

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::array::{position_phase, ArrayLayout, PortPatternTable};
use crate::error::{Error, Result};

use super::{ChannelRealization, Scheme};

/// Channel-state input for the analog stage: a drawn channel or explicit
/// target directions (theta, phi) in radians.
#[derive(Debug, Clone)]
pub enum Csi<'a> {
    Channel(&'a ChannelRealization),
    Angles(Vec<(f64, f64)>),
}

/// Frequency-flat analog precoder in wire (element-major) port order.
#[derive(Debug, Clone)]
pub struct AnalogPrecoder {
    pub scheme: Scheme,
    pub a: DMatrix<Complex64>,
    pub n_rf: usize,
    pub n_ant: usize,
    pub n_ports: usize,
}

impl AnalogPrecoder {
    pub fn n_tx(&self) -> usize {
        self.n_ant * self.n_ports
    }

    /// A with rows permuted to the scheme's own port ordering (mode-major for
    /// spatial filtering, wire order otherwise).
    pub fn a_in_scheme_order(&self) -> DMatrix<Complex64> {
        match self.scheme {
            Scheme::SpatialFiltering => {
                let mut out = DMatrix::<Complex64>::zeros(self.a.nrows(), self.a.ncols());
                for m in 0..self.n_ant {
                    for p in 0..self.n_ports {
                        let wire = m * self.n_ports + p;
                        let mode_major = p * self.n_ant + m;
                        out.set_row(mode_major, &self.a.row(wire));
                    }
                }
                out
            }
            _ => self.a.clone(),
        }
    }

    /// Check the scheme's structural invariant; error strings say which entry
    /// violates it.
    pub fn verify_structure(&self) -> Result<()> {
        let tol = 1e-9;
        match self.scheme {
            Scheme::Digital => {
                if self.n_rf != self.n_tx() {
                    return Err(Error::InvalidConfiguration(
                        "digital scheme requires N_RF = N_Tx".into(),
                    ));
                }
                let eye = DMatrix::<Complex64>::identity(self.a.nrows(), self.a.ncols());
                if (&self.a - eye).norm() > tol {
                    return Err(Error::InvalidConfiguration(
                        "digital analog stage must be the identity".into(),
                    ));
                }
            }
            Scheme::FullyConnected => {
                for (idx, v) in self.a.iter().enumerate() {
                    if (v.norm() - 1.0).abs() > tol {
                        return Err(Error::InvalidConfiguration(format!(
                            "fully-connected entry {idx} has modulus {}",
                            v.norm()
                        )));
                    }
                }
            }
            Scheme::SpatialFiltering => {
                if self.n_rf != self.n_ports {
                    return Err(Error::InvalidConfiguration(
                        "spatial filtering requires N_RF = ports per element".into(),
                    ));
                }
                let ordered = self.a_in_scheme_order();
                for p in 0..self.n_ports {
                    for m in 0..self.n_ant {
                        let row = p * self.n_ant + m;
                        for r in 0..self.n_rf {
                            if r != p && ordered[(row, r)].norm() > tol {
                                return Err(Error::InvalidConfiguration(format!(
                                    "spatial filtering off-block entry ({row},{r}) nonzero"
                                )));
                            }
                        }
                    }
                }
            }
            Scheme::SingleElementSelect | Scheme::SingleElementCombine => {
                if self.n_rf != self.n_ant {
                    return Err(Error::InvalidConfiguration(
                        "single-element schemes require N_RF = element count".into(),
                    ));
                }
                for m in 0..self.n_ant {
                    for p in 0..self.n_ports {
                        let row = m * self.n_ports + p;
                        for r in 0..self.n_rf {
                            if r != m && self.a[(row, r)].norm() > tol {
                                return Err(Error::InvalidConfiguration(format!(
                                    "single-element off-block entry ({row},{r}) nonzero"
                                )));
                            }
                        }
                    }
                }
                if matches!(self.scheme, Scheme::SingleElementSelect) {
                    for r in 0..self.n_rf {
                        let nonzero = (0..self.a.nrows())
                            .filter(|&row| self.a[(row, r)].norm() > tol)
                            .count();
                        if nonzero != 1 {
                            return Err(Error::InvalidConfiguration(format!(
                                "select block {r} drives {nonzero} ports"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Quantize phase-only entries to 2^bits levels (optional hardware model).
    pub fn quantize_phases(&mut self, bits: u32) {
        let levels = (1u64 << bits) as f64;
        let step = std::f64::consts::TAU / levels;
        for v in self.a.iter_mut() {
            if (v.norm() - 1.0).abs() < 1e-9 {
                let q = (v.arg() / step).round() * step;
                *v = Complex64::from_polar(1.0, q);
            }
        }
    }
}

/// Theta-polarized scalar pattern of port p toward (theta, phi).
fn port_gain(patterns: &PortPatternTable, p: usize, theta: f64, phi: f64) -> Complex64 {
    patterns.patterns[p].eval(theta, phi).0
}

/// Build the analog precoder for a scheme.
///
/// `n_rf` is only consulted by the fully connected scheme (where it is
/// required); the other schemes derive their RF chain count from the layout.
pub fn build_analog_precoder(
    scheme: Scheme,
    layout: &ArrayLayout,
    patterns: &PortPatternTable,
    csi: &Csi,
    n_rf: Option<usize>,
) -> Result<AnalogPrecoder> {
    let n_ant = layout.element_count();
    let n_ports = layout.ports_per_element;
    let n_tx = n_ant * n_ports;
    if patterns.ports_per_element() != n_ports {
        return Err(Error::InvalidConfiguration(format!(
            "pattern table has {} ports but layout expects {n_ports}",
            patterns.ports_per_element()
        )));
    }

    // First target direction for steered schemes.
    let target = match csi {
        Csi::Angles(list) => list.first().copied().ok_or_else(|| {
            Error::InvalidConfiguration("angle CSI needs at least one direction".into())
        })?,
        Csi::Channel(ch) => {
            let u = ch.strongest_user();
            ch.users[u].direction()
        }
    };

    let (a, n_rf) = match scheme {
        Scheme::Digital => {
            if let Some(r) = n_rf {
                if r != n_tx {
                    return Err(Error::InvalidConfiguration(format!(
                        "digital scheme pins N_RF = N_Tx = {n_tx}, got {r}"
                    )));
                }
            }
            (DMatrix::<Complex64>::identity(n_tx, n_tx), n_tx)
        }
        Scheme::FullyConnected => {
            let r = n_rf.ok_or_else(|| {
                Error::InvalidConfiguration("fully_connected requires an explicit N_RF".into())
            })?;
            if r == 0 || r > n_tx {
                return Err(Error::InvalidConfiguration(format!(
                    "fully_connected N_RF must be in 1..={n_tx}, got {r}"
                )));
            }
            let mut a = DMatrix::<Complex64>::zeros(n_tx, r);
            for chain in 0..r {
                // Phase-conjugate match to the strongest path of a user
                // (chains cycle through users / target angles).
                let row: Vec<Complex64> = match csi {
                    Csi::Channel(ch) => {
                        let u = chain % ch.n_users();
                        // strongest subcarrier of that user
                        let f_star = (0..ch.subcarriers)
                            .max_by(|&f1, &f2| {
                                ch.h[f1]
                                    .row(u)
                                    .norm_squared()
                                    .partial_cmp(&ch.h[f2].row(u).norm_squared())
                                    .unwrap()
                                    .then(f2.cmp(&f1))
                            })
                            .unwrap_or(0);
                        ch.h[f_star].row(u).iter().copied().collect()
                    }
                    Csi::Angles(list) => {
                        let (theta, phi) = list[chain % list.len()];
                        (0..n_tx)
                            .map(|idx| {
                                let (m, p) = (idx / n_ports, idx % n_ports);
                                let (et, _) = patterns.embedded(layout, m, p, theta, phi);
                                et
                            })
                            .collect()
                    }
                };
                for (idx, hv) in row.iter().enumerate() {
                    let phase = if hv.norm() > 0.0 { -hv.arg() } else { 0.0 };
                    a[(idx, chain)] = Complex64::from_polar(1.0, phase);
                }
            }
            (a, r)
        }
        Scheme::SpatialFiltering => {
            // One sub-array per mode: steering phases across elements.
            let mut a = DMatrix::<Complex64>::zeros(n_tx, n_ports);
            let scale = 1.0 / (n_ant as f64).sqrt();
            for p in 0..n_ports {
                for m in 0..n_ant {
                    let steer = position_phase(layout, m, target.0, target.1).conj();
                    a[(m * n_ports + p, p)] = steer * scale;
                }
            }
            (a, n_ports)
        }
        Scheme::SingleElementSelect => {
            let mut a = DMatrix::<Complex64>::zeros(n_tx, n_ant);
            // Patterns are shared across elements, so the best port is too.
            let best = (0..n_ports)
                .max_by(|&p1, &p2| {
                    port_gain(patterns, p1, target.0, target.1)
                        .norm()
                        .partial_cmp(&port_gain(patterns, p2, target.0, target.1).norm())
                        .unwrap()
                        .then(p2.cmp(&p1))
                })
                .unwrap();
            for m in 0..n_ant {
                a[(m * n_ports + best, m)] = Complex64::new(1.0, 0.0);
            }
            (a, n_ant)
        }
        Scheme::SingleElementCombine => {
            let mut a = DMatrix::<Complex64>::zeros(n_tx, n_ant);
            let g: Vec<Complex64> = (0..n_ports)
                .map(|p| port_gain(patterns, p, target.0, target.1))
                .collect();
            let norm: f64 = g.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-300 {
                return Err(Error::InvalidConfiguration(
                    "element pattern vanishes toward the target direction".into(),
                ));
            }
            for m in 0..n_ant {
                for p in 0..n_ports {
                    a[(m * n_ports + p, m)] = g[p].conj() / norm;
                }
            }
            (a, n_ant)
        }
    };

    let built = AnalogPrecoder {
        scheme,
        a,
        n_rf,
        n_ant,
        n_ports,
    };
    built.verify_structure()?;
    Ok(built)
}
