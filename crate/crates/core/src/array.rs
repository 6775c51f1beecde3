//! Multi-mode massive-MIMO array layouts and embedded port patterns.
//!
//! Elements are placed on a uniform grid (pitch = element side + edge-to-edge
//! gap) or a hexagonal tiling. All ports of one element share the element
//! position; the embedded pattern of port p on element m is the shared port
//! pattern times the position phase factor exp(j k r_m . u).

use nalgebra::Vector3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::farfield::{direction_frame, FarField, SphereGrid};
use crate::mom::WAVENUMBER;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tiling {
    Grid,
    Hex,
}

/// Element footprint measure: square side length or hexagon circumradius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementExtent {
    Side(f64),
    Circumradius(f64),
}

/// Physical arrangement of multi-mode elements.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArrayLayout {
    pub tiling: Tiling,
    /// Element centers in the array plane, wavelengths.
    #[serde(rename = "positions")]
    pub element_positions: Vec<[f64; 2]>,
    #[serde(rename = "side_or_radius")]
    pub extent: ElementExtent,
    /// Edge-to-edge spacing between neighboring element footprints.
    pub gap: f64,
    pub ports_per_element: usize,
    /// Grid dimensions when `tiling == Grid`.
    pub grid_dims: Option<(usize, usize)>,
}

impl ArrayLayout {
    pub fn element_count(&self) -> usize {
        self.element_positions.len()
    }

    /// N_Tx = N_Ant * N_p.
    pub fn total_ports(&self) -> usize {
        self.element_count() * self.ports_per_element
    }

    /// Center-to-center pitch between adjacent elements.
    pub fn pitch(&self) -> f64 {
        match self.extent {
            ElementExtent::Side(s) => s + self.gap,
            // Adjacent hexagons meet across their inradius: 2 * (sqrt(3)/2) a.
            ElementExtent::Circumradius(a) => 3f64.sqrt() * a + self.gap,
        }
    }

    /// Total occupied area: (n_x pitch)(n_y pitch) for grids; one hexagonal
    /// lattice cell (sqrt(3)/2 pitch^2) per element for hex tilings.
    pub fn footprint_area(&self) -> f64 {
        let pitch = self.pitch();
        match self.tiling {
            Tiling::Grid => {
                let (nx, ny) = self.grid_dims.expect("grid layout carries its dimensions");
                (nx as f64 * pitch) * (ny as f64 * pitch)
            }
            Tiling::Hex => self.element_count() as f64 * 3f64.sqrt() / 2.0 * pitch * pitch,
        }
    }
}

/// Uniform n_x x n_y grid of square multi-mode elements.
pub fn layout_grid(
    n_x: usize,
    n_y: usize,
    element_side: f64,
    gap: f64,
    ports_per_element: usize,
) -> Result<ArrayLayout> {
    if n_x < 1 || n_y < 1 || ports_per_element < 1 {
        return Err(Error::InvalidArgument(
            "grid layout needs n_x, n_y, ports_per_element >= 1".into(),
        ));
    }
    if !(element_side > 0.0) || !(gap > 0.0) {
        return Err(Error::InvalidArgument(
            "element side and gap must be positive".into(),
        ));
    }
    let pitch = element_side + gap;
    let mut element_positions = Vec::with_capacity(n_x * n_y);
    for j in 0..n_y {
        for i in 0..n_x {
            let x = (i as f64 - (n_x as f64 - 1.0) / 2.0) * pitch;
            let y = (j as f64 - (n_y as f64 - 1.0) / 2.0) * pitch;
            element_positions.push([x, y]);
        }
    }
    Ok(ArrayLayout {
        tiling: Tiling::Grid,
        element_positions,
        extent: ElementExtent::Side(element_side),
        gap,
        ports_per_element,
        grid_dims: Some((n_x, n_y)),
    })
}

/// Hexagonal tiling with `rings` rings around a center element:
/// 1 + 3 rings (rings + 1) elements.
pub fn layout_hex(
    rings: usize,
    circumradius: f64,
    gap: f64,
    ports_per_element: usize,
) -> Result<ArrayLayout> {
    if ports_per_element < 1 {
        return Err(Error::InvalidArgument("ports_per_element must be >= 1".into()));
    }
    if !(circumradius > 0.0) || !(gap > 0.0) {
        return Err(Error::InvalidArgument(
            "circumradius and gap must be positive".into(),
        ));
    }
    let pitch = 3f64.sqrt() * circumradius + gap;
    // Neighbors sit along the edge normals of the hexagon (30 + 60k degrees).
    let u = [
        pitch * (30f64.to_radians().cos()),
        pitch * (30f64.to_radians().sin()),
    ];
    let v = [0.0, pitch];
    let r = rings as i64;
    let mut element_positions = Vec::new();
    for p in -r..=r {
        for q in -r..=r {
            if (p + q).abs() <= r {
                element_positions.push([
                    p as f64 * u[0] + q as f64 * v[0],
                    p as f64 * u[1] + q as f64 * v[1],
                ]);
            }
        }
    }
    debug_assert_eq!(element_positions.len(), 1 + 3 * rings * (rings + 1));
    Ok(ArrayLayout {
        tiling: Tiling::Hex,
        element_positions,
        extent: ElementExtent::Circumradius(circumradius),
        gap,
        ports_per_element,
        grid_dims: None,
    })
}

/// Side-by-side comparison of a layout against a reference.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArrayComparison {
    pub area: f64,
    pub reference_area: f64,
    pub ports: usize,
    pub reference_ports: usize,
    /// 100 (1 - area/reference); present only when the port counts match.
    pub reduction_percent: Option<f64>,
    pub port_count_mismatch: bool,
}

/// Compare footprints; the reduction is only meaningful at equal port counts.
pub fn array_metrics(layout: &ArrayLayout, reference: &ArrayLayout) -> ArrayComparison {
    let area = layout.footprint_area();
    let reference_area = reference.footprint_area();
    let ports = layout.total_ports();
    let reference_ports = reference.total_ports();
    let mismatch = ports != reference_ports;
    ArrayComparison {
        area,
        reference_area,
        ports,
        reference_ports,
        reduction_percent: (!mismatch).then(|| 100.0 * (1.0 - area / reference_area)),
        port_count_mismatch: mismatch,
    }
}

/// Array factor sum_m w_m exp(j k r_m . u(theta, phi)) with k = 2 pi.
pub fn array_factor(
    layout: &ArrayLayout,
    weights: &[Complex64],
    theta: f64,
    phi: f64,
) -> Result<Complex64> {
    if weights.len() != layout.element_count() {
        return Err(Error::InvalidArgument(format!(
            "{} weights for {} elements",
            weights.len(),
            layout.element_count()
        )));
    }
    let (u, _, _) = direction_frame(theta, phi);
    let mut af = Complex64::default();
    for (w, pos) in weights.iter().zip(layout.element_positions.iter()) {
        let phase = WAVENUMBER * (pos[0] * u.x + pos[1] * u.y);
        af += w * Complex64::from_polar(1.0, phase);
    }
    Ok(af)
}

/// Steering phase of element m toward a direction (the embedded-pattern
/// position factor).
pub fn position_phase(layout: &ArrayLayout, element: usize, theta: f64, phi: f64) -> Complex64 {
    let (u, _, _) = direction_frame(theta, phi);
    let pos = layout.element_positions[element];
    Complex64::from_polar(1.0, WAVENUMBER * (pos[0] * u.x + pos[1] * u.y))
}

/// Far-field pattern of one element port, shared across the array.
#[derive(Debug, Clone)]
pub enum PortPattern {
    /// Unit theta-polarized response in every direction.
    Isotropic,
    /// Pattern sampled on a sphere grid; evaluated by bilinear interpolation
    /// in (cos theta, phi).
    Sampled(FarField),
}

impl PortPattern {
    /// Complex (e_theta, e_phi) response toward (theta, phi).
    pub fn eval(&self, theta: f64, phi: f64) -> (Complex64, Complex64) {
        match self {
            PortPattern::Isotropic => (Complex64::new(1.0, 0.0), Complex64::default()),
            PortPattern::Sampled(f) => sample_bilinear(f, theta, phi),
        }
    }
}

fn sample_bilinear(f: &FarField, theta: f64, phi: f64) -> (Complex64, Complex64) {
    let g = &f.grid;
    let u = theta.cos();
    // Rows are ordered by ascending Gauss-Legendre node in u = cos(theta).
    let us: Vec<f64> = g.theta.iter().map(|t| t.cos()).collect();
    let (i0, i1, tu) = bracket(&us, u);
    let tau = std::f64::consts::TAU;
    let pw = tau / g.n_phi as f64;
    let pf = (phi.rem_euclid(tau)) / pw - 0.5;
    let j0 = pf.floor();
    let tp = pf - j0;
    let j0i = (j0.rem_euclid(g.n_phi as f64)) as usize % g.n_phi;
    let j1i = (j0i + 1) % g.n_phi;

    let at = |i: usize, j: usize| -> (Complex64, Complex64) {
        let idx = i * g.n_phi + j;
        (f.e_theta[idx], f.e_phi[idx])
    };
    let mix = |a: (Complex64, Complex64), b: (Complex64, Complex64), t: f64| {
        (a.0 * (1.0 - t) + b.0 * t, a.1 * (1.0 - t) + b.1 * t)
    };
    let low = mix(at(i0, j0i), at(i0, j1i), tp);
    let high = mix(at(i1, j0i), at(i1, j1i), tp);
    mix(low, high, tu)
}

/// Bracketing indices and interpolation fraction in a sorted ascending list,
/// clamped at the ends.
fn bracket(xs: &[f64], x: f64) -> (usize, usize, f64) {
    let n = xs.len();
    if x <= xs[0] {
        return (0, 0, 0.0);
    }
    if x >= xs[n - 1] {
        return (n - 1, n - 1, 0.0);
    }
    let mut i = 0;
    while i + 1 < n && xs[i + 1] < x {
        i += 1;
    }
    let t = (x - xs[i]) / (xs[i + 1] - xs[i]);
    (i, i + 1, t)
}

/// Per-port element patterns shared across all array elements.
#[derive(Debug, Clone)]
pub struct PortPatternTable {
    pub patterns: Vec<PortPattern>,
}

impl PortPatternTable {
    pub fn isotropic(n_ports: usize) -> Self {
        PortPatternTable {
            patterns: (0..n_ports).map(|_| PortPattern::Isotropic).collect(),
        }
    }

    /// Port patterns taken from computed far fields (e.g. characteristic-mode
    /// patterns of the element).
    pub fn from_far_fields(fields: Vec<FarField>) -> Self {
        PortPatternTable {
            patterns: fields.into_iter().map(PortPattern::Sampled).collect(),
        }
    }

    /// Deterministic synthetic multi-mode family: sphere-orthogonal low-order
    /// patterns offering pattern diversity without a full modal analysis.
    pub fn synthetic(n_ports: usize, grid: &SphereGrid) -> Self {
        type Shape = fn(f64, f64) -> (f64, f64);
        let shapes: [Shape; 8] = [
            |_t, _p| (1.0, 0.0),
            |t, p| (t.sin() * p.cos(), 0.0),
            |t, p| (t.sin() * p.sin(), 0.0),
            |t, _p| (t.cos(), 0.0),
            |_t, _p| (0.0, 1.0),
            |t, p| (0.0, t.sin() * p.cos()),
            |t, p| (0.0, t.sin() * p.sin()),
            |t, _p| (0.0, t.cos()),
        ];
        let patterns = (0..n_ports)
            .map(|p| {
                let shape = shapes[p % shapes.len()];
                let mut e_theta = Vec::with_capacity(grid.len());
                let mut e_phi = Vec::with_capacity(grid.len());
                for i in 0..grid.len() {
                    let t = grid.theta[i / grid.n_phi];
                    let ph = grid.phi[i % grid.n_phi];
                    let (et, ep) = shape(t, ph);
                    e_theta.push(Complex64::new(et, 0.0));
                    e_phi.push(Complex64::new(ep, 0.0));
                }
                PortPattern::Sampled(FarField {
                    grid: grid.clone(),
                    e_theta,
                    e_phi,
                })
            })
            .collect();
        PortPatternTable { patterns }
    }

    pub fn ports_per_element(&self) -> usize {
        self.patterns.len()
    }

    /// Embedded response of (element, port) toward a direction: shared port
    /// pattern times the element position phase.
    pub fn embedded(
        &self,
        layout: &ArrayLayout,
        element: usize,
        port: usize,
        theta: f64,
        phi: f64,
    ) -> (Complex64, Complex64) {
        let (et, ep) = self.patterns[port].eval(theta, phi);
        let phase = position_phase(layout, element, theta, phi);
        (et * phase, ep * phase)
    }
}

/// Unit direction vector for (theta, phi); z is the array broadside.
pub fn unit_direction(theta: f64, phi: f64) -> Vector3<f64> {
    direction_frame(theta, phi).0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_multimode_layout() {
        let side = 0.72f64.sqrt();
        let layout = layout_grid(11, 11, side, 0.58, 4).unwrap();
        assert_eq!(layout.element_count(), 121);
        assert_eq!(layout.total_ports(), 484);
        let area = layout.footprint_area();
        assert!((area - 247.0).abs() < 1.0, "multi-mode array area {area}");
    }

    #[test]
    fn table_crossed_dipole_reference() {
        let layout = layout_grid(11, 22, 0.5, 1.0, 2).unwrap();
        assert_eq!(layout.element_count(), 242);
        assert_eq!(layout.total_ports(), 484);
        let area = layout.footprint_area();
        assert!((area - 544.5).abs() < 1e-9, "crossed-dipole area {area}");
    }

    #[test]
    fn table_size_reduction() {
        let mm = layout_grid(11, 11, 0.72f64.sqrt(), 0.58, 4).unwrap();
        let cd = layout_grid(11, 22, 0.5, 1.0, 2).unwrap();
        let cmp = array_metrics(&mm, &cd);
        let red = cmp.reduction_percent.unwrap();
        assert!((red - 54.0).abs() <= 1.0, "reduction {red}%");
        assert!(!cmp.port_count_mismatch);
    }

    #[test]
    fn layout_vs_itself_zero_reduction() {
        let mm = layout_grid(3, 3, 0.8, 0.5, 4).unwrap();
        let cmp = array_metrics(&mm, &mm);
        assert_eq!(cmp.reduction_percent, Some(0.0));
    }

    #[test]
    fn port_count_mismatch_flagged() {
        let a = layout_grid(2, 2, 0.8, 0.5, 4).unwrap();
        let b = layout_grid(2, 2, 0.8, 0.5, 2).unwrap();
        let cmp = array_metrics(&a, &b);
        assert!(cmp.port_count_mismatch);
        assert_eq!(cmp.reduction_percent, None);
    }

    #[test]
    fn single_element_footprint() {
        let layout = layout_grid(1, 1, 0.9, 0.3, 4).unwrap();
        assert_eq!(layout.element_count(), 1);
        assert!((layout.footprint_area() - 1.2 * 1.2).abs() < 1e-12);
    }

    #[test]
    fn hex_ring_counts() {
        assert_eq!(layout_hex(0, 0.7, 0.2, 8).unwrap().element_count(), 1);
        assert_eq!(layout_hex(1, 0.7, 0.2, 8).unwrap().element_count(), 7);
        assert_eq!(layout_hex(2, 0.7, 0.2, 8).unwrap().element_count(), 19);
        assert_eq!(layout_hex(2, 0.7, 0.2, 8).unwrap().total_ports(), 8 * 19);
    }

    #[test]
    fn hex_min_center_spacing_respects_pitch() {
        let layout = layout_hex(2, 0.7, 0.2, 8).unwrap();
        let pitch = layout.pitch();
        let mut min_d = f64::INFINITY;
        for i in 0..layout.element_count() {
            for j in (i + 1)..layout.element_count() {
                let a = layout.element_positions[i];
                let b = layout.element_positions[j];
                let d = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
                min_d = min_d.min(d);
            }
        }
        assert!((min_d - pitch).abs() < 1e-12);
    }

    #[test]
    fn invalid_geometry_rejected() {
        assert!(layout_grid(0, 3, 0.5, 0.5, 2).is_err());
        assert!(layout_grid(3, 3, -0.5, 0.5, 2).is_err());
        assert!(layout_grid(3, 3, 0.5, 0.0, 2).is_err());
        assert!(layout_hex(1, 0.7, -0.1, 4).is_err());
    }

    #[test]
    fn broadside_array_factor_is_coherent_sum() {
        let layout = layout_grid(4, 4, 0.5, 0.2, 1).unwrap();
        let w = vec![Complex64::new(1.0, 0.0); 16];
        let af = array_factor(&layout, &w, 0.0, 0.0).unwrap();
        assert!((af - Complex64::new(16.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn conjugate_steering_recovers_full_gain() {
        let layout = layout_grid(5, 3, 0.6, 0.3, 1).unwrap();
        let (theta0, phi0) = (0.5, 1.1);
        let w: Vec<Complex64> = (0..layout.element_count())
            .map(|m| position_phase(&layout, m, theta0, phi0).conj())
            .collect();
        let af = array_factor(&layout, &w, theta0, phi0).unwrap();
        assert!((af.norm() - 15.0).abs() < 1e-10);
    }

    #[test]
    fn two_element_endfire_null() {
        // 0.5 wavelength pitch = side 0.3 + gap 0.2; endfire along +x.
        let layout = layout_grid(2, 1, 0.3, 0.2, 1).unwrap();
        let w = vec![Complex64::new(1.0, 0.0); 2];
        let af = array_factor(&layout, &w, std::f64::consts::FRAC_PI_2, 0.0).unwrap();
        assert!(af.norm() < 1e-12, "endfire AF {af}");
    }

    #[test]
    fn array_factor_triangle_inequality() {
        let layout = layout_grid(3, 3, 0.4, 0.2, 1).unwrap();
        let w: Vec<Complex64> = (0..9)
            .map(|i| Complex64::new((i as f64 * 0.3).cos(), (i as f64 * 0.7).sin()))
            .collect();
        let bound: f64 = w.iter().map(|c| c.norm()).sum();
        for k in 0..40 {
            let theta = 0.077 * k as f64;
            let phi = 0.13 * k as f64;
            let af = array_factor(&layout, &w, theta, phi).unwrap();
            assert!(af.norm() <= bound + 1e-12);
        }
    }

    #[test]
    fn embedded_pattern_separates_into_pattern_times_phase() {
        let grid = SphereGrid::new(18, 36).unwrap();
        let table = PortPatternTable::synthetic(4, &grid);
        let layout = layout_grid(2, 2, 0.8, 0.5, 4).unwrap();
        let (theta, phi) = (0.7, 2.1);
        for m in 0..4 {
            for p in 0..4 {
                let (et, ep) = table.embedded(&layout, m, p, theta, phi);
                let (bt, bp) = table.patterns[p].eval(theta, phi);
                let phase = position_phase(&layout, m, theta, phi);
                assert!((et - bt * phase).norm() < 1e-12);
                assert!((ep - bp * phase).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn sampled_pattern_interpolates_near_exact_on_nodes() {
        let grid = SphereGrid::new(24, 48).unwrap();
        let table = PortPatternTable::synthetic(2, &grid);
        // at a grid node the interpolation must return the stored sample
        let PortPattern::Sampled(f) = &table.patterns[1] else {
            panic!()
        };
        let (i, j) = (5, 7);
        let (et, _) = table.patterns[1].eval(grid.theta[i], grid.phi[j]);
        assert!((et - f.e_theta[i * grid.n_phi + j]).norm() < 1e-12);
    }
}
