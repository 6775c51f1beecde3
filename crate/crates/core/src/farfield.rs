//! Radiated far fields of RWG current coefficient vectors.
//!
//! Fields are normalized so that the sphere-quadrature power of a pattern
//! equals c^H R c for the same coefficients, i.e. the far-field inner product
//! reproduces the radiation quadratic form of the impedance operator.

use nalgebra::Vector3;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mom::WAVENUMBER;
use crate::quadrature::{gauss_legendre, triangle_points};
use crate::rwg::RwgBasis;

/// Full-sphere direction grid: Gauss-Legendre in cos(theta) crossed with a
/// uniform azimuth grid. Weights sum to 4*pi (exactly, up to rounding).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereGrid {
    pub n_theta: usize,
    pub n_phi: usize,
    /// Polar angles of the theta rows, radians.
    pub theta: Vec<f64>,
    /// Azimuth angles, radians.
    pub phi: Vec<f64>,
    /// Per-row quadrature weight; the full weight of sample (t, p) is
    /// `row_weight[t] * (2 pi / n_phi)`.
    pub row_weight: Vec<f64>,
}

impl SphereGrid {
    /// Build a grid with at least 18 polar and 36 azimuth samples.
    pub fn new(n_theta: usize, n_phi: usize) -> Result<SphereGrid> {
        if n_theta < 18 || n_phi < 36 {
            return Err(Error::InvalidArgument(format!(
                "sphere grid must be at least 18 x 36, got {n_theta} x {n_phi}"
            )));
        }
        let (nodes, w) = gauss_legendre(n_theta);
        let theta: Vec<f64> = nodes.iter().map(|&u| u.acos()).collect();
        let phi: Vec<f64> = (0..n_phi)
            .map(|j| std::f64::consts::TAU * (j as f64 + 0.5) / n_phi as f64)
            .collect();
        Ok(SphereGrid {
            n_theta,
            n_phi,
            theta,
            phi,
            row_weight: w,
        })
    }

    pub fn len(&self) -> usize {
        self.n_theta * self.n_phi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Solid-angle weight of flattened sample index `i = t * n_phi + p`.
    pub fn weight(&self, i: usize) -> f64 {
        self.row_weight[i / self.n_phi] * std::f64::consts::TAU / self.n_phi as f64
    }

    /// Unit direction and the local (theta-hat, phi-hat) frame of sample `i`.
    pub fn direction(&self, i: usize) -> (Vector3<f64>, Vector3<f64>, Vector3<f64>) {
        let t = self.theta[i / self.n_phi];
        let p = self.phi[i % self.n_phi];
        direction_frame(t, p)
    }

    pub fn total_weight(&self) -> f64 {
        (0..self.len()).map(|i| self.weight(i)).sum()
    }
}

/// Unit vector and spherical frame for (theta, phi).
pub fn direction_frame(theta: f64, phi: f64) -> (Vector3<f64>, Vector3<f64>, Vector3<f64>) {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let u = Vector3::new(st * cp, st * sp, ct);
    let that = Vector3::new(ct * cp, ct * sp, -st);
    let phat = Vector3::new(-sp, cp, 0.0);
    (u, that, phat)
}

/// Far-field pattern sampled on a [`SphereGrid`].
#[derive(Debug, Clone)]
pub struct FarField {
    pub grid: SphereGrid,
    pub e_theta: Vec<Complex64>,
    pub e_phi: Vec<Complex64>,
}

impl FarField {
    /// Sphere-integrated radiated power.
    pub fn total_power(&self) -> f64 {
        (0..self.grid.len())
            .map(|i| self.grid.weight(i) * (self.e_theta[i].norm_sqr() + self.e_phi[i].norm_sqr()))
            .sum()
    }

    /// Negate the pattern (used by correlation sanity checks).
    pub fn negated(&self) -> FarField {
        FarField {
            grid: self.grid.clone(),
            e_theta: self.e_theta.iter().map(|c| -c).collect(),
            e_phi: self.e_phi.iter().map(|c| -c).collect(),
        }
    }

    /// Linear combination sum_i c_i F_i of patterns on a common grid.
    pub fn linear_combination(fields: &[&FarField], coeffs: &[Complex64]) -> Result<FarField> {
        if fields.is_empty() || fields.len() != coeffs.len() {
            return Err(Error::InvalidArgument(
                "linear_combination needs matching non-empty field/coefficient lists".into(),
            ));
        }
        let grid = fields[0].grid.clone();
        if fields.iter().any(|f| f.grid != grid) {
            return Err(Error::InvalidArgument(
                "far fields sampled on different grids".into(),
            ));
        }
        let len = grid.len();
        let mut e_theta = vec![Complex64::default(); len];
        let mut e_phi = vec![Complex64::default(); len];
        for (f, &c) in fields.iter().zip(coeffs.iter()) {
            for i in 0..len {
                e_theta[i] += f.e_theta[i] * c;
                e_phi[i] += f.e_phi[i] * c;
            }
        }
        Ok(FarField {
            grid,
            e_theta,
            e_phi,
        })
    }
}

/// Radiate a complex RWG coefficient vector to the far field.
///
/// Linear in the coefficients; the zero vector gives the zero field.
pub fn radiated_far_field(
    basis: &RwgBasis,
    coefficients: &[Complex64],
    grid: &SphereGrid,
) -> Result<FarField> {
    if coefficients.len() != basis.basis_count() {
        return Err(Error::InvalidArgument(format!(
            "coefficient length {} != basis count {}",
            coefficients.len(),
            basis.basis_count()
        )));
    }
    let mesh = &basis.mesh;
    let k = WAVENUMBER;
    // e = k/(4 pi) * transverse part of Int J e^{+j k rhat.r'} dS'
    let scale = k / (4.0 * std::f64::consts::PI);

    struct TriQuad {
        points: [(Vector3<f64>, f64); 7],
    }
    let tris: Vec<TriQuad> = (0..mesh.triangles.len())
        .map(|t| {
            let v = mesh.triangle_vertices(t);
            TriQuad {
                points: triangle_points(&v[0], &v[1], &v[2], mesh.triangle_area(t)),
            }
        })
        .collect();

    let len = grid.len();
    let samples: Vec<(Complex64, Complex64)> = (0..len)
        .into_par_iter()
        .map(|i| {
            let (u, that, phat) = grid.direction(i);
            let mut f = [Complex64::default(); 3];
            for (t, tq) in tris.iter().enumerate() {
                let supported = basis.basis_on_triangle(t);
                if supported.is_empty() {
                    continue;
                }
                // Current on this triangle at each quadrature point.
                for (r, w) in &tq.points {
                    let phase = k * u.dot(r);
                    let (s, c) = phase.sin_cos();
                    let e = Complex64::new(c, s) * *w;
                    let mut cur = [Complex64::default(); 3];
                    for &(n, sign) in supported {
                        let cn = coefficients[n];
                        if cn == Complex64::default() {
                            continue;
                        }
                        let g = basis.eval_on_triangle(n, t, sign, r);
                        cur[0] += cn * g.x;
                        cur[1] += cn * g.y;
                        cur[2] += cn * g.z;
                    }
                    f[0] += cur[0] * e;
                    f[1] += cur[1] * e;
                    f[2] += cur[2] * e;
                }
            }
            let et = (f[0] * that.x + f[1] * that.y + f[2] * that.z) * scale;
            let ep = (f[0] * phat.x + f[1] * phat.y + f[2] * phat.z) * scale;
            (et, ep)
        })
        .collect();

    Ok(FarField {
        grid: grid.clone(),
        e_theta: samples.iter().map(|s| s.0).collect(),
        e_phi: samples.iter().map(|s| s.1).collect(),
    })
}
