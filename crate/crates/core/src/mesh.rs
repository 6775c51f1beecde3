//! Triangulated PEC plate geometries.
//!
//! Plates live in the z = 0 plane and all lengths are in wavelengths at the
//! design frequency. Meshes for the supported canonical shapes are built on
//! structured grids whose vertex sets are invariant under the shape's point
//! group, so symmetry operations act as exact vertex permutations.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Canonical plate shapes with built-in symmetry groups, plus `Custom` for
/// irregular geometries (no symmetry analysis).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeTag {
    Rectangle,
    Square,
    Hexagon,
    Custom,
}

/// Shape selector with dimensions for [`make_plate_mesh`], all in wavelengths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PlateSpec {
    /// Axis-aligned rectangle, `width` along x and `height` along y.
    Rectangle { width: f64, height: f64 },
    /// Square with the given side length.
    Square { side: f64 },
    /// Regular hexagon with the given circumradius (center to corner).
    Hexagon { circumradius: f64 },
}

impl PlateSpec {
    pub fn shape_tag(&self) -> ShapeTag {
        match self {
            PlateSpec::Rectangle { .. } => ShapeTag::Rectangle,
            PlateSpec::Square { .. } => ShapeTag::Square,
            PlateSpec::Hexagon { .. } => ShapeTag::Hexagon,
        }
    }

    fn smallest_dimension(&self) -> f64 {
        match *self {
            PlateSpec::Rectangle { width, height } => width.min(height),
            PlateSpec::Square { side } => side,
            PlateSpec::Hexagon { circumradius } => circumradius,
        }
    }

    fn dims(&self) -> Vec<f64> {
        match *self {
            PlateSpec::Rectangle { width, height } => vec![width, height],
            PlateSpec::Square { side } => vec![side],
            PlateSpec::Hexagon { circumradius } => vec![circumradius],
        }
    }
}

/// Triangulated plate surface.
///
/// Vertices are 3D coordinates in wavelengths (z = 0 for all built-in
/// shapes); triangles are CCW-oriented vertex index triples.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TriMesh {
    pub shape: ShapeTag,
    pub vertices: Vec<[f64; 3]>,
    pub triangles: Vec<[usize; 3]>,
    pub characteristic_length: f64,
}

impl TriMesh {
    pub fn vertex(&self, i: usize) -> Vector3<f64> {
        Vector3::from(self.vertices[i])
    }

    pub fn triangle_vertices(&self, t: usize) -> [Vector3<f64>; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertex(a), self.vertex(b), self.vertex(c)]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_vertices(t);
        0.5 * (b - a).cross(&(c - a)).norm()
    }

    /// Signed area with respect to the +z normal; positive for CCW triangles.
    pub fn triangle_signed_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_vertices(t);
        0.5 * (b - a).cross(&(c - a)).z
    }

    pub fn triangle_centroid(&self, t: usize) -> Vector3<f64> {
        let [a, b, c] = self.triangle_vertices(t);
        (a + b + c) / 3.0
    }

    /// Enumerate undirected edges with their incident triangle lists, sorted
    /// by vertex pair for deterministic ordering.
    pub fn edge_incidence(&self) -> Vec<((usize, usize), Vec<usize>)> {
        let mut map: std::collections::BTreeMap<(usize, usize), Vec<usize>> =
            std::collections::BTreeMap::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            for k in 0..3 {
                let a = tri[k];
                let b = tri[(k + 1) % 3];
                let key = (a.min(b), a.max(b));
                map.entry(key).or_default().push(t);
            }
        }
        map.into_iter().collect()
    }

    /// Check all mesh invariants: positive triangle areas, manifold edges
    /// (interior edges shared by exactly 2 triangles, boundary by 1), and the
    /// Euler relation V - E + F = 1 for a simply connected plate.
    pub fn validate(&self) -> Result<()> {
        for (t, tri) in self.triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= self.vertices.len()) {
                return Err(Error::InvalidMesh(format!(
                    "triangle {t} references a vertex out of range"
                )));
            }
            let area = self.triangle_signed_area(t);
            if !(area > 0.0) {
                return Err(Error::InvalidMesh(format!(
                    "triangle {t} has non-positive area {area}"
                )));
            }
        }
        let edges = self.edge_incidence();
        for (&(a, b), tris) in edges.iter().map(|(e, t)| (e, t)) {
            if tris.len() > 2 {
                return Err(Error::InvalidMesh(format!(
                    "edge ({a},{b}) shared by {} triangles",
                    tris.len()
                )));
            }
        }
        let v = self.vertices.len() as i64;
        let e = edges.len() as i64;
        let f = self.triangles.len() as i64;
        if v - e + f != 1 {
            return Err(Error::InvalidMesh(format!(
                "Euler relation violated: V-E+F = {} (expected 1)",
                v - e + f
            )));
        }
        Ok(())
    }

    /// Longest edge length in the mesh.
    pub fn max_edge_length(&self) -> f64 {
        self.edge_incidence()
            .iter()
            .map(|((a, b), _)| (self.vertex(*a) - self.vertex(*b)).norm())
            .fold(0.0, f64::max)
    }
}

/// Build a structured, symmetry-invariant triangle mesh of a canonical plate.
///
/// `h` is the target edge length in wavelengths; the actual cell size is
/// rounded so the mesh is exactly symmetric, with all edges <= 1.5 h.
pub fn make_plate_mesh(spec: PlateSpec, h: f64) -> Result<TriMesh> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "target edge length must be positive, got {h}"
        )));
    }
    for d in spec.dims() {
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "plate dimensions must be positive, got {d}"
            )));
        }
    }
    let dim = spec.smallest_dimension();
    if h >= dim {
        return Err(Error::ResolutionTooCoarse { h, dim });
    }
    let mesh = match spec {
        PlateSpec::Rectangle { width, height } => {
            grid_mesh(ShapeTag::Rectangle, width, height, h)
        }
        PlateSpec::Square { side } => grid_mesh(ShapeTag::Square, side, side, h),
        PlateSpec::Hexagon { circumradius } => hex_mesh(circumradius, h),
    };
    mesh.validate()?;
    debug_assert!(mesh.max_edge_length() <= 1.5 * h + 1e-12);
    Ok(mesh)
}

/// Rectangle with a rectangular notch removed from the +x/+y corner.
///
/// The result is tagged [`ShapeTag::Custom`]: it has no symmetry group and is
/// the stand-in for irregular chassis-like geometries.
pub fn make_notched_plate_mesh(
    width: f64,
    height: f64,
    notch_w: f64,
    notch_h: f64,
    h: f64,
) -> Result<TriMesh> {
    let base = make_plate_mesh(PlateSpec::Rectangle { width, height }, h)?;
    if !(notch_w > 0.0 && notch_h > 0.0) {
        return Err(Error::InvalidArgument(
            "notch dimensions must be positive".into(),
        ));
    }
    if notch_w >= width || notch_h >= height {
        return Err(Error::InvalidArgument(
            "notch must be strictly smaller than the plate".into(),
        ));
    }
    // Remove every triangle whose centroid falls inside the notch rectangle.
    let x_cut = width / 2.0 - notch_w;
    let y_cut = height / 2.0 - notch_h;
    let kept: Vec<[usize; 3]> = (0..base.triangles.len())
        .filter(|&t| {
            let c = base.triangle_centroid(t);
            !(c.x > x_cut && c.y > y_cut)
        })
        .map(|t| base.triangles[t])
        .collect();
    if kept.len() == base.triangles.len() {
        return Err(Error::InvalidArgument(
            "notch smaller than one mesh cell; nothing removed".into(),
        ));
    }
    let mesh = compact_mesh(ShapeTag::Custom, &base.vertices, &kept, h);
    mesh.validate()?;
    Ok(mesh)
}

/// Drop unreferenced vertices and renumber triangles.
fn compact_mesh(
    shape: ShapeTag,
    vertices: &[[f64; 3]],
    triangles: &[[usize; 3]],
    h: f64,
) -> TriMesh {
    let mut remap = vec![usize::MAX; vertices.len()];
    let mut new_vertices = Vec::new();
    let mut new_triangles = Vec::with_capacity(triangles.len());
    for tri in triangles {
        let mut mapped = [0usize; 3];
        for (slot, &v) in mapped.iter_mut().zip(tri.iter()) {
            if remap[v] == usize::MAX {
                remap[v] = new_vertices.len();
                new_vertices.push(vertices[v]);
            }
            *slot = remap[v];
        }
        new_triangles.push(mapped);
    }
    TriMesh {
        shape,
        vertices: new_vertices,
        triangles: new_triangles,
        characteristic_length: h,
    }
}

/// Structured grid on [-lx/2, lx/2] x [-ly/2, ly/2] with quadrant-mirrored
/// cell diagonals, so the triangulation is invariant under the rectangle's
/// C2v group (and under C4v when lx = ly).
fn grid_mesh(shape: ShapeTag, lx: f64, ly: f64, h: f64) -> TriMesh {
    // Even cell counts keep the coordinate axes on mesh lines, which the
    // quadrant-dependent diagonal rule needs for exact symmetry. The small
    // slack keeps a decimally-truncated h (e.g. 0.08333...) from bumping the
    // cell count past the intended ratio.
    let nx = 2 * ((lx / (2.0 * h) - 1e-9).ceil() as usize).max(1);
    let ny = 2 * ((ly / (2.0 * h) - 1e-9).ceil() as usize).max(1);
    let dx = lx / nx as f64;
    let dy = ly / ny as f64;
    let cx = (nx / 2) as i64;
    let cy = (ny / 2) as i64;

    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            // (i - cx) is an exact integer, so mirrored vertices are exact
            // floating-point negations of each other.
            let x = (i as i64 - cx) as f64 * dx;
            let y = (j as i64 - cy) as f64 * dy;
            vertices.push([x, y, 0.0]);
        }
    }
    let vid = |i: usize, j: usize| j * (nx + 1) + i;

    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let v00 = vid(i, j);
            let v10 = vid(i + 1, j);
            let v01 = vid(i, j + 1);
            let v11 = vid(i + 1, j + 1);
            let sx = (i as i64) >= cx;
            let sy = (j as i64) >= cy;
            if sx == sy {
                // SW-NE diagonal
                triangles.push([v00, v10, v11]);
                triangles.push([v00, v11, v01]);
            } else {
                // SE-NW diagonal
                triangles.push([v00, v10, v01]);
                triangles.push([v10, v11, v01]);
            }
        }
    }
    TriMesh {
        shape,
        vertices,
        triangles,
        characteristic_length: h,
    }
}

/// Regular hexagon meshed on the triangular lattice spanned by the sector
/// edge subdivisions; invariant under the full C6v group.
fn hex_mesh(circumradius: f64, h: f64) -> TriMesh {
    let m = ((circumradius / h - 1e-9).ceil() as i64).max(1);
    let s = circumradius / m as f64;
    // Axial coordinates (p, q) on the lattice p*e1 + q*e2 with
    // e1 = (1, 0), e2 = (1/2, sqrt(3)/2); the hexagon is the lattice ball
    // |p| <= m, |q| <= m, |p+q| <= m.
    let inside = |p: i64, q: i64| p.abs() <= m && q.abs() <= m && (p + q).abs() <= m;
    let half_s = 0.5 * s;
    let row_s = s * 3.0_f64.sqrt() / 2.0;
    let coord = |p: i64, q: i64| [((2 * p + q) as f64) * half_s, q as f64 * row_s, 0.0];

    let mut index = std::collections::HashMap::new();
    let mut vertices = Vec::new();
    for q in -m..=m {
        for p in -m..=m {
            if inside(p, q) {
                index.insert((p, q), vertices.len());
                vertices.push(coord(p, q));
            }
        }
    }

    let mut triangles = Vec::new();
    for q in -m..=m {
        for p in -m..=m {
            // up triangle (p,q), (p+1,q), (p,q+1)
            if inside(p, q) && inside(p + 1, q) && inside(p, q + 1) {
                triangles.push([index[&(p, q)], index[&(p + 1, q)], index[&(p, q + 1)]]);
            }
            // down triangle (p+1,q), (p+1,q+1), (p,q+1)
            if inside(p + 1, q) && inside(p + 1, q + 1) && inside(p, q + 1) {
                triangles.push([
                    index[&(p + 1, q)],
                    index[&(p + 1, q + 1)],
                    index[&(p, q + 1)],
                ]);
            }
        }
    }
    TriMesh {
        shape: ShapeTag::Hexagon,
        vertices,
        triangles,
        characteristic_length: h,
    }
}
