//! EFIE Galerkin impedance operator over the RWG basis.
//!
//! The plate is an infinitesimally thin free-space PEC sheet; all lengths are
//! in wavelengths, so the wavenumber is fixed at k = 2*pi and the impedance
//! is normalized by the free-space wave impedance. With the e^{-j k R}/R
//! kernel the real part R = Re(Z) carries the smooth sin(kR)/R radiation
//! kernel (positive semidefinite), while the singular cos(kR)/R part lands in
//! the reactance X = Im(Z) and is handled by static extraction.
//!
//! Entry formula (Galerkin, identical expansion and testing functions):
//!
//!   Z_mn = j/(4 pi k) IntInt [ k^2 f_m . f_n  -  (div f_m)(div f_n) ] G dS' dS

use nalgebra::{DMatrix, Vector3};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::{static_potential_integrals, triangle_points};
use crate::rwg::RwgBasis;

/// Free-space wavenumber in rad per wavelength.
pub const WAVENUMBER: f64 = std::f64::consts::TAU;

/// Dense complex symmetric MoM impedance operator at the design frequency.
#[derive(Debug, Clone)]
pub struct ImpedanceOperator {
    /// Symmetrized impedance matrix.
    pub z: DMatrix<Complex64>,
    /// Wavenumber the operator was assembled at (2*pi in wavelength units).
    pub wavenumber: f64,
    /// Relative Frobenius asymmetry ||Z - Z^T||/||Z|| before averaging.
    pub raw_asymmetry: f64,
}

impl ImpedanceOperator {
    pub fn n(&self) -> usize {
        self.z.nrows()
    }

    /// Radiation part R = Re(Z); symmetric positive semidefinite.
    pub fn real_part(&self) -> DMatrix<f64> {
        self.z.map(|v| v.re)
    }

    /// Reactance part X = Im(Z); symmetric.
    pub fn imag_part(&self) -> DMatrix<f64> {
        self.z.map(|v| v.im)
    }
}

/// Knobs for [`assemble_impedance_with`].
#[derive(Debug, Clone)]
pub struct AssemblyOptions {
    /// Dense-storage cap on the basis count.
    pub size_cap: usize,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        AssemblyOptions { size_cap: 20_000 }
    }
}

/// Assemble the impedance operator with default options.
pub fn assemble_impedance(basis: &RwgBasis) -> Result<ImpedanceOperator> {
    assemble_impedance_with(basis, &AssemblyOptions::default())
}

struct TriData {
    verts: [Vector3<f64>; 3],
    area: f64,
    centroid: Vector3<f64>,
    radius: f64,
    points: [(Vector3<f64>, f64); 7],
}

/// Smooth remainder (e^{-jkR} - 1)/R of the kernel after static extraction;
/// finite at R = 0 where it equals -j k.
#[inline]
fn smooth_kernel(k: f64, r: f64) -> Complex64 {
    if r < 1e-14 {
        Complex64::new(0.0, -k)
    } else {
        let half = 0.5 * k * r;
        Complex64::new(-2.0 * half.sin().powi(2) / r, -(k * r).sin() / r)
    }
}

/// Full kernel e^{-jkR}/R for well-separated pairs.
#[inline]
fn full_kernel(k: f64, r: f64) -> Complex64 {
    let (s, c) = (k * r).sin_cos();
    Complex64::new(c / r, -s / r)
}

#[inline]
fn cdot(a: &Vector3<f64>, b: &[Complex64; 3]) -> Complex64 {
    b[0] * a.x + b[1] * a.y + b[2] * a.z
}

/// Assemble the dense Galerkin EFIE operator.
pub fn assemble_impedance_with(
    basis: &RwgBasis,
    opts: &AssemblyOptions,
) -> Result<ImpedanceOperator> {
    let n = basis.basis_count();
    if n == 0 {
        return Err(Error::InvalidArgument(
            "basis has no interior edges; nothing to assemble".into(),
        ));
    }
    if n > opts.size_cap {
        return Err(Error::ProblemTooLarge {
            n,
            cap: opts.size_cap,
        });
    }
    let mesh = &basis.mesh;
    let k = WAVENUMBER;
    let h = mesh.characteristic_length;

    let mut tris = Vec::with_capacity(mesh.triangles.len());
    for t in 0..mesh.triangles.len() {
        let verts = mesh.triangle_vertices(t);
        let area = mesh.triangle_area(t);
        if area < 1e-10 * h * h {
            return Err(Error::InvalidMesh(format!(
                "quadrature failure: triangle {t} is degenerate (area {area:.3e})"
            )));
        }
        let centroid = (verts[0] + verts[1] + verts[2]) / 3.0;
        let radius = verts
            .iter()
            .map(|v| (v - centroid).norm())
            .fold(0.0, f64::max);
        let points = triangle_points(&verts[0], &verts[1], &verts[2], area);
        tris.push(TriData {
            verts,
            area,
            centroid,
            radius,
            points,
        });
    }

    let shares_vertex = |p: usize, q: usize| -> bool {
        mesh.triangles[p]
            .iter()
            .any(|v| mesh.triangles[q].contains(v))
    };

    let t_count = tris.len();
    let raw: DMatrix<Complex64> = (0..t_count)
        .into_par_iter()
        .fold(
            || DMatrix::<Complex64>::zeros(n, n),
            |mut z, p| {
                let tp = &tris[p];
                for (q, tq) in tris.iter().enumerate() {
                    let near = shares_vertex(p, q)
                        || (tp.centroid - tq.centroid).norm() < 1.25 * (tp.radius + tq.radius);

                    // Accumulate the four pair integrals over outer points:
                    //   s0 = IntInt G,      bv = IntInt G r,
                    //   cv = IntInt G r',   a  = IntInt G (r . r')
                    let mut s0 = Complex64::default();
                    let mut a = Complex64::default();
                    let mut bv = [Complex64::default(); 3];
                    let mut cv = [Complex64::default(); 3];

                    for (r_obs, w_obs) in &tp.points {
                        let mut j0 = Complex64::default();
                        let mut jv = [Complex64::default(); 3];
                        if near {
                            for (rp, wp) in &tq.points {
                                let g = smooth_kernel(k, (rp - r_obs).norm()) * *wp;
                                j0 += g;
                                jv[0] += g * rp.x;
                                jv[1] += g * rp.y;
                                jv[2] += g * rp.z;
                            }
                            let (i_one, i_rho) = static_potential_integrals(&tq.verts, r_obs);
                            let stat = i_rho + r_obs * i_one;
                            j0 += i_one;
                            jv[0] += stat.x;
                            jv[1] += stat.y;
                            jv[2] += stat.z;
                        } else {
                            for (rp, wp) in &tq.points {
                                let g = full_kernel(k, (rp - r_obs).norm()) * *wp;
                                j0 += g;
                                jv[0] += g * rp.x;
                                jv[1] += g * rp.y;
                                jv[2] += g * rp.z;
                            }
                        }
                        s0 += j0 * *w_obs;
                        a += cdot(r_obs, &jv) * *w_obs;
                        for d in 0..3 {
                            bv[d] += j0 * r_obs[d] * *w_obs;
                            cv[d] += jv[d] * *w_obs;
                        }
                    }

                    for &(m, sm) in basis.basis_on_triangle(p) {
                        let em = &basis.edges[m];
                        let vm = mesh.vertex(basis.free_vertex(m, p));
                        let fm = sm * em.length / (2.0 * tp.area);
                        let dm = sm * em.length / tp.area;
                        for &(nn, sn) in basis.basis_on_triangle(q) {
                            let en = &basis.edges[nn];
                            let vn = mesh.vertex(basis.free_vertex(nn, q));
                            let fn_ = sn * en.length / (2.0 * tq.area);
                            let dn = sn * en.length / tq.area;
                            let vec_term =
                                a - cdot(&vn, &bv) - cdot(&vm, &cv) + s0 * vm.dot(&vn);
                            z[(m, nn)] +=
                                vec_term * (k * k * fm * fn_) - s0 * (dm * dn);
                        }
                    }
                }
                z
            },
        )
        .reduce(|| DMatrix::<Complex64>::zeros(n, n), |a, b| a + b);

    let scale = Complex64::new(0.0, 1.0 / (4.0 * std::f64::consts::PI * k));
    let raw = raw * scale;

    let mut asym_sq = 0.0;
    let mut norm_sq = 0.0;
    for i in 0..n {
        for j in 0..n {
            let d = raw[(i, j)] - raw[(j, i)];
            asym_sq += d.norm_sqr();
            norm_sq += raw[(i, j)].norm_sqr();
        }
    }
    let raw_asymmetry = (asym_sq / norm_sq).sqrt();

    let mut z = DMatrix::<Complex64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            z[(i, j)] = (raw[(i, j)] + raw[(j, i)]) * 0.5;
        }
    }

    Ok(ImpedanceOperator {
        z,
        wavenumber: k,
        raw_asymmetry,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{make_plate_mesh, PlateSpec};
    use crate::rwg::build_rwg_basis;
    use nalgebra::DVector;

    fn strip_operator() -> (RwgBasis, ImpedanceOperator) {
        let mesh = make_plate_mesh(
            PlateSpec::Rectangle {
                width: 0.5,
                height: 0.1,
            },
            0.05,
        )
        .unwrap();
        let basis = build_rwg_basis(&mesh).unwrap();
        let zop = assemble_impedance(&basis).unwrap();
        (basis, zop)
    }

    #[test]
    fn symmetrized_operator_is_exactly_symmetric() {
        let (_, zop) = strip_operator();
        let n = zop.n();
        for i in 0..n {
            for j in 0..n {
                assert_eq!(zop.z[(i, j)], zop.z[(j, i)]);
            }
        }
        // raw asymmetry is small and logged
        assert!(zop.raw_asymmetry < 1e-3, "raw asymmetry {}", zop.raw_asymmetry);
    }

    #[test]
    fn radiation_part_is_positive_semidefinite() {
        let (_, zop) = strip_operator();
        let r = zop.real_part();
        let n = r.nrows();
        let norm = r.norm();
        // deterministic pseudo-random probes
        for seed in 0..8u64 {
            let c = DVector::from_fn(n, |i, _| {
                let x = ((i as u64 + 1) * (seed * 2 + 3) * 2654435761 % 1000) as f64;
                x / 500.0 - 1.0
            });
            let quad = (c.transpose() * &r * &c)[(0, 0)];
            assert!(
                quad >= -1e-8 * norm * c.norm_squared(),
                "c^T R c = {quad} for seed {seed}"
            );
        }
    }

    #[test]
    fn reciprocity_bilinear_form() {
        let (_, zop) = strip_operator();
        let n = zop.n();
        let u = DVector::from_fn(n, |i, _| ((i * 37 + 5) % 11) as f64 - 5.0);
        let v = DVector::from_fn(n, |i, _| ((i * 17 + 3) % 7) as f64 - 3.0);
        let zu = &zop.z * u.map(|x| Complex64::new(x, 0.0));
        let zv = &zop.z * v.map(|x| Complex64::new(x, 0.0));
        let uzv: Complex64 = v
            .iter()
            .zip(zu.iter().copied())
            .map(|(&a, b)| b * a)
            .sum();
        let vzu: Complex64 = u
            .iter()
            .zip(zv.iter().copied())
            .map(|(&a, b)| b * a)
            .sum();
        assert!((uzv - vzu).norm() <= 1e-12 * uzv.norm());
    }

    #[test]
    fn empty_basis_rejected() {
        let mesh = crate::mesh::TriMesh {
            shape: crate::mesh::ShapeTag::Custom,
            vertices: vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            triangles: vec![[0, 1, 2]],
            characteristic_length: 1.0,
        };
        let basis = build_rwg_basis(&mesh).unwrap();
        assert!(matches!(
            assemble_impedance(&basis),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn size_cap_enforced() {
        let mesh = make_plate_mesh(
            PlateSpec::Rectangle {
                width: 1.0,
                height: 0.5,
            },
            0.125,
        )
        .unwrap();
        let basis = build_rwg_basis(&mesh).unwrap();
        let err = assemble_impedance_with(&basis, &AssemblyOptions { size_cap: 10 }).unwrap_err();
        assert!(matches!(err, Error::ProblemTooLarge { .. }));
    }
}
