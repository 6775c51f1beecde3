//! Point-group symmetry of plate meshes acting on the RWG basis.
//!
//! The supported groups are C2v (rectangle), C4v (square), and C6v (regular
//! hexagon). Each group operation is a 2D orthogonal transform that maps the
//! structured mesh onto itself, so its action on the RWG coefficient space is
//! a signed permutation: edges map to edges, and the sign flips where the
//! plus/minus triangle convention reverses under the map.
//!
//! Irreducible representations are tabulated per group; characteristic modes
//! sort into them, and the number of mutually orthogonal far-field channels
//! is the sum of irrep dimensions (4, 6, and 8 for the three groups).

use nalgebra::{DVector, Vector3};

use crate::error::{Error, Result};
use crate::mesh::ShapeTag;
use crate::rwg::RwgBasis;

/// One symmetry operation: a 2D orthogonal transform in the plate plane.
#[derive(Debug, Clone)]
pub struct SymOp {
    pub name: String,
    /// Row-major 2x2 orthogonal matrix.
    pub matrix: [[f64; 2]; 2],
}

impl SymOp {
    fn rotation(name: &str, degrees: f64) -> Self {
        let (s, c) = degrees.to_radians().sin_cos();
        SymOp {
            name: name.to_string(),
            matrix: [[c, -s], [s, c]],
        }
    }

    fn mirror(name: &str, axis_degrees: f64) -> Self {
        let (s, c) = (2.0 * axis_degrees.to_radians()).sin_cos();
        SymOp {
            name: name.to_string(),
            matrix: [[c, s], [s, -c]],
        }
    }

    pub fn apply(&self, p: &Vector3<f64>) -> Vector3<f64> {
        let m = &self.matrix;
        Vector3::new(
            m[0][0] * p.x + m[0][1] * p.y,
            m[1][0] * p.x + m[1][1] * p.y,
            p.z,
        )
    }

    fn compose(&self, other: &SymOp) -> [[f64; 2]; 2] {
        let (a, b) = (&self.matrix, &other.matrix);
        let mut out = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        out
    }
}

/// Signed permutation over RWG basis indices.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedPermutation {
    /// `image[k]` is the basis index edge `k` maps to.
    pub image: Vec<usize>,
    /// +1 when the plus/minus triangle assignment is preserved, -1 otherwise.
    pub sign: Vec<f64>,
}

impl SignedPermutation {
    pub fn identity(n: usize) -> Self {
        SignedPermutation {
            image: (0..n).collect(),
            sign: vec![1.0; n],
        }
    }

    pub fn is_identity(&self) -> bool {
        self.sign.iter().all(|&s| s == 1.0)
            && self.image.iter().enumerate().all(|(k, &i)| k == i)
    }

    /// Apply to a coefficient vector: out[image[k]] = sign[k] * x[k].
    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(x.len());
        for (k, (&img, &s)) in self.image.iter().zip(self.sign.iter()).enumerate() {
            out[img] = s * x[k];
        }
        out
    }

    /// Composition `self` after `other` (apply `other` first).
    pub fn compose(&self, other: &SignedPermutation) -> SignedPermutation {
        let n = self.image.len();
        let mut image = vec![0usize; n];
        let mut sign = vec![1.0; n];
        for k in 0..n {
            image[k] = self.image[other.image[k]];
            sign[k] = self.sign[other.image[k]] * other.sign[k];
        }
        SignedPermutation { image, sign }
    }
}

/// Irreducible representation: label, dimension, character per group element,
/// and (for 2D irreps) the representation matrix per element.
#[derive(Debug, Clone)]
pub struct Irrep {
    pub label: String,
    pub dim: usize,
    pub characters: Vec<f64>,
    pub matrices: Option<Vec<[[f64; 2]; 2]>>,
}

/// The point group of a plate, its action on the RWG basis, and its irreps.
#[derive(Debug, Clone)]
pub struct SymmetryGroup {
    pub shape: ShapeTag,
    pub ops: Vec<SymOp>,
    pub basis_actions: Vec<SignedPermutation>,
    pub irreps: Vec<Irrep>,
}

impl SymmetryGroup {
    pub fn order(&self) -> usize {
        self.ops.len()
    }

    /// Upper bound on uncorrelated antenna ports: one orthogonal far-field
    /// channel per irrep dimension.
    pub fn max_uncorrelated_ports(&self) -> usize {
        self.irreps.iter().map(|ir| ir.dim).sum()
    }

    /// Character projector onto irrep `w`: (d/|G|) sum_g chi(g) D(g) x.
    pub fn project(&self, w: usize, x: &DVector<f64>) -> DVector<f64> {
        let ir = &self.irreps[w];
        let scale = ir.dim as f64 / self.order() as f64;
        let mut acc = DVector::zeros(x.len());
        for (g, action) in self.basis_actions.iter().enumerate() {
            let chi = ir.characters[g];
            if chi != 0.0 {
                acc += action.apply(x) * chi;
            }
        }
        acc * scale
    }

    /// Matrix-element projector P^w_ij = (d/|G|) sum_g [M(g)]_ij D(g).
    ///
    /// With i = j this is the row projector; with i != j it transfers a
    /// row-j vector to its row-i partner within the same irrep copy.
    pub fn project_element(&self, w: usize, i: usize, j: usize, x: &DVector<f64>) -> DVector<f64> {
        let ir = &self.irreps[w];
        let mats = ir
            .matrices
            .as_ref()
            .expect("project_element requires a multi-dimensional irrep");
        let scale = ir.dim as f64 / self.order() as f64;
        let mut acc = DVector::zeros(x.len());
        for (g, action) in self.basis_actions.iter().enumerate() {
            let m = mats[g][i][j];
            if m != 0.0 {
                acc += action.apply(x) * m;
            }
        }
        acc * scale
    }

    /// Index of the group element equal to ops[g] ∘ ops[h], by matrix match.
    pub fn compose_index(&self, g: usize, h: usize) -> Option<usize> {
        let m = self.ops[g].compose(&self.ops[h]);
        self.ops.iter().position(|op| {
            op.matrix
                .iter()
                .flatten()
                .zip(m.iter().flatten())
                .all(|(a, b)| (a - b).abs() < 1e-9)
        })
    }
}

fn ops_for(shape: ShapeTag) -> Result<Vec<SymOp>> {
    Ok(match shape {
        ShapeTag::Rectangle => vec![
            SymOp::rotation("E", 0.0),
            SymOp::rotation("C2", 180.0),
            SymOp::mirror("sigma_x", 0.0),
            SymOp::mirror("sigma_y", 90.0),
        ],
        ShapeTag::Square => vec![
            SymOp::rotation("E", 0.0),
            SymOp::rotation("C4", 90.0),
            SymOp::rotation("C2", 180.0),
            SymOp::rotation("C4^3", 270.0),
            SymOp::mirror("sigma_x", 0.0),
            SymOp::mirror("sigma_y", 90.0),
            SymOp::mirror("sigma_d", 45.0),
            SymOp::mirror("sigma_d'", 135.0),
        ],
        ShapeTag::Hexagon => {
            let mut ops = vec![SymOp::rotation("E", 0.0)];
            for k in 1..6 {
                ops.push(SymOp::rotation(&format!("C6^{k}"), 60.0 * k as f64));
            }
            // Vertex mirrors (hexagon corners at 0, 60, ... degrees), then
            // edge-midpoint mirrors.
            for a in [0.0, 60.0, 120.0] {
                ops.push(SymOp::mirror(&format!("sigma_v{a}"), a));
            }
            for a in [30.0, 90.0, 150.0] {
                ops.push(SymOp::mirror(&format!("sigma_d{a}"), a));
            }
            ops
        }
        ShapeTag::Custom => {
            return Err(Error::UnsupportedShape(
                "custom shapes carry no built-in point group".into(),
            ))
        }
    })
}

fn irreps_for(shape: ShapeTag, ops: &[SymOp]) -> Vec<Irrep> {
    let one = |label: &str, characters: Vec<f64>| Irrep {
        label: label.to_string(),
        dim: 1,
        characters,
        matrices: None,
    };
    match shape {
        ShapeTag::Rectangle => vec![
            one("A1", vec![1.0, 1.0, 1.0, 1.0]),
            one("A2", vec![1.0, 1.0, -1.0, -1.0]),
            one("B1", vec![1.0, -1.0, 1.0, -1.0]),
            one("B2", vec![1.0, -1.0, -1.0, 1.0]),
        ],
        ShapeTag::Square => {
            let e_mats: Vec<[[f64; 2]; 2]> = ops.iter().map(|op| op.matrix).collect();
            let e_chars = e_mats.iter().map(|m| m[0][0] + m[1][1]).collect();
            vec![
                one("A1", vec![1.0; 8]),
                one("A2", vec![1.0, 1.0, 1.0, 1.0, -1.0, -1.0, -1.0, -1.0]),
                one("B1", vec![1.0, -1.0, 1.0, -1.0, 1.0, 1.0, -1.0, -1.0]),
                one("B2", vec![1.0, -1.0, 1.0, -1.0, -1.0, -1.0, 1.0, 1.0]),
                Irrep {
                    label: "E".to_string(),
                    dim: 2,
                    characters: e_chars,
                    matrices: Some(e_mats),
                },
            ]
        }
        ShapeTag::Hexagon => {
            // Rotation angles 0,60,..,300 then mirror axes 0,60,120,30,90,150.
            let rot = [0.0, 60.0, 120.0, 180.0, 240.0, 300.0];
            let vmir = [0.0, 60.0, 120.0];
            let dmir = [30.0, 90.0, 150.0];
            let rep = |angle_scale: f64| -> Vec<[[f64; 2]; 2]> {
                let mut mats = Vec::new();
                for b in rot {
                    mats.push(SymOp::rotation("", angle_scale * b).matrix);
                }
                for a in vmir.iter().chain(dmir.iter()) {
                    mats.push(SymOp::mirror("", angle_scale * a).matrix);
                }
                mats
            };
            let chars_of = |mats: &[[[f64; 2]; 2]]| -> Vec<f64> {
                mats.iter().map(|m| m[0][0] + m[1][1]).collect()
            };
            let e1 = rep(1.0);
            let e2 = rep(2.0);
            let b_rot = [1.0, -1.0, 1.0, -1.0, 1.0, -1.0];
            vec![
                one("A1", vec![1.0; 12]),
                one(
                    "A2",
                    [[1.0; 6].as_slice(), [-1.0; 6].as_slice()].concat(),
                ),
                one(
                    "B1",
                    [b_rot.as_slice(), &[1.0, 1.0, 1.0, -1.0, -1.0, -1.0]].concat(),
                ),
                one(
                    "B2",
                    [b_rot.as_slice(), &[-1.0, -1.0, -1.0, 1.0, 1.0, 1.0]].concat(),
                ),
                Irrep {
                    label: "E1".to_string(),
                    dim: 2,
                    characters: chars_of(&e1),
                    matrices: Some(e1),
                },
                Irrep {
                    label: "E2".to_string(),
                    dim: 2,
                    characters: chars_of(&e2),
                    matrices: Some(e2),
                },
            ]
        }
        ShapeTag::Custom => Vec::new(),
    }
}

/// Build the point group of the basis' plate shape and its signed-permutation
/// action on the RWG coefficients.
///
/// Fails with `UnsupportedShape` for custom plates and `AsymmetricMesh` when
/// the mesh is not invariant under one of the claimed operations.
pub fn symmetry_group_of(basis: &RwgBasis) -> Result<SymmetryGroup> {
    let mesh = &basis.mesh;
    let ops = ops_for(mesh.shape)?;
    let irreps = irreps_for(mesh.shape, &ops);

    // Character-theory identity: sum over irreps of dim^2 = group order.
    debug_assert_eq!(
        irreps.iter().map(|ir| ir.dim * ir.dim).sum::<usize>(),
        ops.len()
    );

    let tol = 1e-7 * mesh.characteristic_length;
    let find_vertex = |p: &Vector3<f64>| -> Option<usize> {
        let mut best = None;
        let mut best_d = tol;
        for (i, v) in mesh.vertices.iter().enumerate() {
            let d = (Vector3::from(*v) - p).norm();
            if d < best_d {
                best_d = d;
                best = Some(i);
            }
        }
        best
    };

    // Triangle lookup by sorted vertex triple.
    let mut tri_of: std::collections::HashMap<[usize; 3], usize> = std::collections::HashMap::new();
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let mut key = *tri;
        key.sort_unstable();
        tri_of.insert(key, t);
    }
    // Interior edge lookup by sorted vertex pair.
    let mut edge_of: std::collections::HashMap<(usize, usize), usize> =
        std::collections::HashMap::new();
    for (k, e) in basis.edges.iter().enumerate() {
        edge_of.insert(e.vertices, k);
    }

    let mut basis_actions = Vec::with_capacity(ops.len());
    for op in &ops {
        // Vertex permutation under the transform.
        let mut vperm = vec![usize::MAX; mesh.vertices.len()];
        for (i, v) in mesh.vertices.iter().enumerate() {
            let image = op.apply(&Vector3::from(*v));
            vperm[i] = find_vertex(&image).ok_or_else(|| {
                Error::AsymmetricMesh(format!(
                    "vertex {i} has no image under {} within tolerance",
                    op.name
                ))
            })?;
        }
        let mut seen = vec![false; vperm.len()];
        for &i in &vperm {
            if seen[i] {
                return Err(Error::AsymmetricMesh(format!(
                    "vertex map under {} is not a bijection",
                    op.name
                )));
            }
            seen[i] = true;
        }

        let map_tri = |t: usize| -> Result<usize> {
            let tri = mesh.triangles[t];
            let mut key = [vperm[tri[0]], vperm[tri[1]], vperm[tri[2]]];
            key.sort_unstable();
            tri_of.get(&key).copied().ok_or_else(|| {
                Error::AsymmetricMesh(format!(
                    "triangle {t} has no image under {}",
                    op.name
                ))
            })
        };

        let mut image = vec![0usize; basis.basis_count()];
        let mut sign = vec![1.0; basis.basis_count()];
        for (k, e) in basis.edges.iter().enumerate() {
            let (a, b) = (vperm[e.vertices.0], vperm[e.vertices.1]);
            let key = (a.min(b), a.max(b));
            let k_img = *edge_of.get(&key).ok_or_else(|| {
                Error::AsymmetricMesh(format!(
                    "edge {:?} has no interior image under {}",
                    e.vertices, op.name
                ))
            })?;
            if (basis.edges[k_img].length - e.length).abs() > tol {
                return Err(Error::AsymmetricMesh(format!(
                    "edge length not preserved by {} at edge {k}",
                    op.name
                )));
            }
            let plus_image = map_tri(e.tri_plus)?;
            image[k] = k_img;
            sign[k] = if plus_image == basis.edges[k_img].tri_plus {
                1.0
            } else {
                -1.0
            };
        }
        basis_actions.push(SignedPermutation { image, sign });
    }

    let group = SymmetryGroup {
        shape: mesh.shape,
        ops,
        basis_actions,
        irreps,
    };
    // Closure check: every pairwise composition is again a group element.
    for g in 0..group.order() {
        for h in 0..group.order() {
            if group.compose_index(g, h).is_none() {
                return Err(Error::AsymmetricMesh(format!(
                    "group not closed: {} o {}",
                    group.ops[g].name, group.ops[h].name
                )));
            }
        }
    }
    Ok(group)
}
