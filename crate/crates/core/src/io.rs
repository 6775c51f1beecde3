//! File formats for the pipeline stage handoffs.
//!
//! JSON is written canonically: object keys sorted, floats at 17 significant
//! digits, no whitespace variation, so identical inputs produce byte-identical
//! outputs. CSV columns are fixed per format below.

use std::path::Path;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::beamforming::RateRow;
use crate::cma::CharacteristicBasis;
use crate::error::{Error, Result};
use crate::farfield::FarField;
use crate::ports::{CouplingElement, PortSet};

/// Format a float with 17 significant digits (roundtrip-exact for f64).
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_value(out: &mut String, v: &Value) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                out.push_str(&i.to_string());
            } else if let Some(u) = n.as_u64() {
                out.push_str(&u.to_string());
            } else {
                out.push_str(&fmt_f64(n.as_f64().unwrap()));
            }
        }
        Value::String(s) => {
            out.push_str(&serde_json::to_string(s).expect("string encoding"));
        }
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(out, item);
            }
            out.push(']');
        }
        Value::Object(map) => {
            // serde_json's default map is a BTreeMap: keys already sorted.
            out.push('{');
            for (i, (k, item)) in map.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(k).expect("key encoding"));
                out.push(':');
                write_value(out, item);
            }
            out.push('}');
        }
    }
}

/// Canonical JSON encoding of any serializable value.
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value)?;
    let mut out = String::new();
    write_value(&mut out, &v);
    out.push('\n');
    Ok(out)
}

pub fn write_json_file<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    std::fs::write(path, to_canonical_json(value)?)?;
    Ok(())
}

pub fn read_json_file<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let text = std::fs::read_to_string(&path).map_err(|e| {
        Error::Io(format!("{}: {e}", path.as_ref().display()))
    })?;
    Ok(serde_json::from_str(&text)?)
}

/// Far-field CSV: theta_rad, phi_rad, re_etheta, im_etheta, re_ephi, im_ephi,
/// weight.
pub fn far_field_csv(f: &FarField) -> String {
    let mut out = String::from("theta_rad,phi_rad,re_etheta,im_etheta,re_ephi,im_ephi,weight\n");
    for i in 0..f.grid.len() {
        let theta = f.grid.theta[i / f.grid.n_phi];
        let phi = f.grid.phi[i % f.grid.n_phi];
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            fmt_f64(theta),
            fmt_f64(phi),
            fmt_f64(f.e_theta[i].re),
            fmt_f64(f.e_theta[i].im),
            fmt_f64(f.e_phi[i].re),
            fmt_f64(f.e_phi[i].im),
            fmt_f64(f.grid.weight(i)),
        ));
    }
    out
}

/// Pattern-table CSV: the far-field format with a leading port column.
pub fn pattern_table_csv(patterns: &[FarField]) -> String {
    let mut out =
        String::from("port,theta_rad,phi_rad,re_etheta,im_etheta,re_ephi,im_ephi,weight\n");
    for (p, f) in patterns.iter().enumerate() {
        for i in 0..f.grid.len() {
            let theta = f.grid.theta[i / f.grid.n_phi];
            let phi = f.grid.phi[i % f.grid.n_phi];
            out.push_str(&format!(
                "{p},{},{},{},{},{},{},{}\n",
                fmt_f64(theta),
                fmt_f64(phi),
                fmt_f64(f.e_theta[i].re),
                fmt_f64(f.e_theta[i].im),
                fmt_f64(f.e_phi[i].re),
                fmt_f64(f.e_phi[i].im),
                fmt_f64(f.grid.weight(i)),
            ));
        }
    }
    out
}

/// Flat campaign CSV: scheme, seed, snr_db, sum_rate.
pub fn rate_rows_csv(rows: &[RateRow]) -> String {
    let mut out = String::from("scheme,seed,snr_db,sum_rate\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.scheme,
            r.seed,
            fmt_f64(r.snr_db),
            fmt_f64(r.sum_rate)
        ));
    }
    out
}

/// One mode line of the modal report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModalReportEntry {
    pub index: usize,
    pub eigenvalue: f64,
    pub significance: f64,
    pub sym_class: Option<String>,
}

/// Modal report: per-mode eigenvalue, significance, and symmetry class.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModalReport {
    pub modes: Vec<ModalReportEntry>,
    pub rank_kept: usize,
    pub significant_count: usize,
}

impl ModalReport {
    pub fn from_basis(basis: &CharacteristicBasis) -> Self {
        ModalReport {
            modes: (0..basis.mode_count())
                .map(|i| ModalReportEntry {
                    index: i,
                    eigenvalue: basis.eigenvalues[i],
                    significance: basis.significance[i],
                    sym_class: basis.sym_class[i].clone(),
                })
                .collect(),
            rank_kept: basis.rank_kept,
            significant_count: basis.significant_modes().len(),
        }
    }
}

/// Serialized port set: element sites, feed weights, dominant modes, and the
/// pairwise correlation matrix in dB (floored at -300 dB).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PortSetFile {
    pub ports: Vec<PortFileEntry>,
    pub correlation_db: Vec<Vec<f64>>,
    pub achieved_ports: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PortFileEntry {
    pub label: String,
    /// Interior-edge indices of the port's coupling elements.
    pub elements: Vec<usize>,
    /// Feed-network weights as [re, im] pairs, aligned with `elements`.
    pub weights: Vec<[f64; 2]>,
    pub dominant_modes: Vec<usize>,
}

impl PortSetFile {
    pub fn from_port_set(set: &PortSet, candidates: &[CouplingElement]) -> Self {
        let n = set.ports.len();
        let correlation_db: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (10.0 * set.correlation.ecc[(i, j)].log10()).max(-300.0))
                    .collect()
            })
            .collect();
        PortSetFile {
            ports: set
                .ports
                .iter()
                .zip(set.dominant_modes.iter())
                .map(|(p, dom)| PortFileEntry {
                    label: p.label.clone(),
                    elements: p.elements.iter().map(|&e| candidates[e].site).collect(),
                    weights: p.weights.iter().map(|w| [w.re, w.im]).collect(),
                    dominant_modes: dom.clone(),
                })
                .collect(),
            correlation_db,
            achieved_ports: set.achieved,
        }
    }

    pub fn port_weights(&self, p: usize) -> Vec<Complex64> {
        self.ports[p]
            .weights
            .iter()
            .map(|w| Complex64::new(w[0], w[1]))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::farfield::SphereGrid;

    #[test]
    fn canonical_json_is_deterministic_and_sorted() {
        #[derive(Serialize)]
        struct Demo {
            zeta: f64,
            alpha: u32,
            name: String,
        }
        let d = Demo {
            zeta: 0.58,
            alpha: 7,
            name: "x".into(),
        };
        let a = to_canonical_json(&d).unwrap();
        let b = to_canonical_json(&d).unwrap();
        assert_eq!(a, b);
        // keys sorted: alpha before name before zeta
        let ai = a.find("alpha").unwrap();
        let ni = a.find("name").unwrap();
        let zi = a.find("zeta").unwrap();
        assert!(ai < ni && ni < zi);
        assert!(a.contains("5.7999999999999996e-1"));
    }

    #[test]
    fn float_format_roundtrips() {
        for &x in &[0.58, 1.0 / 3.0, 2.0_f64.sqrt(), 1e-300, -247.25] {
            let s = fmt_f64(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{s}");
        }
    }

    #[test]
    fn far_field_csv_has_header_and_rows() {
        let grid = SphereGrid::new(18, 36).unwrap();
        let f = FarField {
            e_theta: vec![Complex64::new(1.0, 0.0); grid.len()],
            e_phi: vec![Complex64::default(); grid.len()],
            grid,
        };
        let csv = far_field_csv(&f);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "theta_rad,phi_rad,re_etheta,im_etheta,re_ephi,im_ephi,weight");
        assert_eq!(lines.len(), 1 + 18 * 36);
    }

    #[test]
    fn json_file_roundtrip() {
        let dir = std::env::temp_dir().join(format!("mma-io-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("report.json");
        let report = ModalReport {
            modes: vec![ModalReportEntry {
                index: 0,
                eigenvalue: -0.25,
                significance: 0.970_142_500_145_331_5,
                sym_class: Some("A1".into()),
            }],
            rank_kept: 10,
            significant_count: 1,
        };
        write_json_file(&path, &report).unwrap();
        let back: ModalReport = read_json_file(&path).unwrap();
        assert_eq!(back.modes[0].eigenvalue, report.modes[0].eigenvalue);
        assert_eq!(back.modes[0].sym_class.as_deref(), Some("A1"));
        std::fs::remove_dir_all(&dir).ok();
    }
}
