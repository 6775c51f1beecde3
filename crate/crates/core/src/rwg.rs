//! Rao-Wilton-Glisson edge basis over a triangulated plate.
//!
//! One basis function per interior edge, supported on the edge's two
//! triangles. The triangle with the lower index is always the plus triangle,
//! which fixes the sign structure deterministically.

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::mesh::TriMesh;

/// One RWG basis function: the shared edge, its two triangles, and the free
/// (opposite) vertex in each.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RwgEdge {
    /// Edge endpoints as vertex indices, lower index first.
    pub vertices: (usize, usize),
    /// Plus triangle (current flows out of it); the lower triangle index.
    pub tri_plus: usize,
    /// Minus triangle (current flows into it).
    pub tri_minus: usize,
    /// Vertex of `tri_plus` opposite the edge.
    pub free_plus: usize,
    /// Vertex of `tri_minus` opposite the edge.
    pub free_minus: usize,
    /// Edge length in wavelengths.
    pub length: f64,
}

/// RWG basis: mesh plus its interior-edge bookkeeping.
#[derive(Debug, Clone)]
pub struct RwgBasis {
    pub mesh: TriMesh,
    pub edges: Vec<RwgEdge>,
    /// Per triangle, the (basis index, sign) pairs supported on it.
    tri_basis: Vec<Vec<(usize, f64)>>,
}

impl RwgBasis {
    pub fn basis_count(&self) -> usize {
        self.edges.len()
    }

    /// Basis functions supported on triangle `t` with their signs
    /// (+1 when `t` is the plus triangle).
    pub fn basis_on_triangle(&self, t: usize) -> &[(usize, f64)] {
        &self.tri_basis[t]
    }

    /// Free vertex of basis `n` on triangle `t` (which must support it).
    pub fn free_vertex(&self, n: usize, t: usize) -> usize {
        let e = &self.edges[n];
        if e.tri_plus == t {
            e.free_plus
        } else {
            debug_assert_eq!(e.tri_minus, t);
            e.free_minus
        }
    }

    /// Evaluate the RWG vector function of basis `n` restricted to triangle
    /// `t` at point `r`: sign * l/(2A) * (r - v_free).
    pub fn eval_on_triangle(&self, n: usize, t: usize, sign: f64, r: &Vector3<f64>) -> Vector3<f64> {
        let e = &self.edges[n];
        let free = self.mesh.vertex(self.free_vertex(n, t));
        let area = self.mesh.triangle_area(t);
        (r - free) * (sign * e.length / (2.0 * area))
    }

    /// Surface divergence of basis `n` on triangle `t`: sign * l/A.
    pub fn divergence_on_triangle(&self, n: usize, t: usize, sign: f64) -> f64 {
        let e = &self.edges[n];
        sign * e.length / self.mesh.triangle_area(t)
    }

    /// Index of the basis function whose edge is (a, b), if interior.
    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        let key = (a.min(b), a.max(b));
        self.edges.iter().position(|e| e.vertices == key)
    }
}

/// Construct the RWG basis of a valid mesh. Fails on non-manifold edges.
pub fn build_rwg_basis(mesh: &TriMesh) -> Result<RwgBasis> {
    mesh.validate()?;
    let mut edges = Vec::new();
    for ((a, b), tris) in mesh.edge_incidence() {
        match tris.len() {
            1 => {} // boundary edge: no basis function
            2 => {
                let (tp, tm) = (tris[0].min(tris[1]), tris[0].max(tris[1]));
                let opposite = |t: usize| -> Result<usize> {
                    mesh.triangles[t]
                        .iter()
                        .copied()
                        .find(|&v| v != a && v != b)
                        .ok_or_else(|| Error::InvalidMesh(format!("degenerate triangle {t}")))
                };
                let length = (mesh.vertex(a) - mesh.vertex(b)).norm();
                edges.push(RwgEdge {
                    vertices: (a, b),
                    tri_plus: tp,
                    tri_minus: tm,
                    free_plus: opposite(tp)?,
                    free_minus: opposite(tm)?,
                    length,
                });
            }
            n => {
                return Err(Error::InvalidMesh(format!(
                    "non-manifold edge ({a},{b}) shared by {n} triangles"
                )))
            }
        }
    }
    let mut tri_basis = vec![Vec::new(); mesh.triangles.len()];
    for (n, e) in edges.iter().enumerate() {
        tri_basis[e.tri_plus].push((n, 1.0));
        tri_basis[e.tri_minus].push((n, -1.0));
    }
    Ok(RwgBasis {
        mesh: mesh.clone(),
        edges,
        tri_basis,
    })
}
