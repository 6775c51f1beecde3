//! Quadrature rules and analytic potential integrals.
//!
//! Regular triangle-pair interactions use a 7-point symmetric rule (degree 5).
//! Self and near terms extract the static 1/R kernel and integrate it
//! analytically over the source triangle; the smooth remainder goes through
//! the same 7-point rule. Sphere integrals use Gauss-Legendre in cos(theta)
//! crossed with a uniform azimuth grid, so the weights sum to 4*pi exactly.

use nalgebra::Vector3;

/// Barycentric 7-point rule, exact for polynomials up to degree 5.
/// Each entry is (w, b0, b1, b2) with weights summing to 1.
pub const TRI7: [(f64, f64, f64, f64); 7] = [
    (
        0.225,
        1.0 / 3.0,
        1.0 / 3.0,
        1.0 / 3.0,
    ),
    (
        0.132_394_152_788_506_2,
        0.059_715_871_789_769_82,
        0.470_142_064_105_115_1,
        0.470_142_064_105_115_1,
    ),
    (
        0.132_394_152_788_506_2,
        0.470_142_064_105_115_1,
        0.059_715_871_789_769_82,
        0.470_142_064_105_115_1,
    ),
    (
        0.132_394_152_788_506_2,
        0.470_142_064_105_115_1,
        0.470_142_064_105_115_1,
        0.059_715_871_789_769_82,
    ),
    (
        0.125_939_180_544_827_2,
        0.797_426_985_353_087_4,
        0.101_286_507_323_456_3,
        0.101_286_507_323_456_3,
    ),
    (
        0.125_939_180_544_827_2,
        0.101_286_507_323_456_3,
        0.797_426_985_353_087_4,
        0.101_286_507_323_456_3,
    ),
    (
        0.125_939_180_544_827_2,
        0.101_286_507_323_456_3,
        0.101_286_507_323_456_3,
        0.797_426_985_353_087_4,
    ),
];

/// Quadrature points and weights on a triangle; weights include the area.
pub fn triangle_points(
    v0: &Vector3<f64>,
    v1: &Vector3<f64>,
    v2: &Vector3<f64>,
    area: f64,
) -> [(Vector3<f64>, f64); 7] {
    TRI7.map(|(w, b0, b1, b2)| (v0 * b0 + v1 * b1 + v2 * b2, w * area))
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Evaluate P_n(x) and P_n'(x) by recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let pk = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = pk;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Analytic integrals of the static kernel over a CCW planar triangle with
/// the observation point in the same plane:
///
///   i_one = Int_T dS' / R
///   i_rho = Int_T (rho' - rho_obs) dS' / R
///
/// Standard edge-contribution formulas for polygonal domains, specialized to
/// zero observation height.
pub fn static_potential_integrals(
    v: &[Vector3<f64>; 3],
    obs: &Vector3<f64>,
) -> (f64, Vector3<f64>) {
    let normal = Vector3::new(0.0, 0.0, 1.0);
    let mut i_one = 0.0;
    let mut i_rho = Vector3::zeros();
    for k in 0..3 {
        let a = v[k];
        let b = v[(k + 1) % 3];
        let edge = b - a;
        let len = edge.norm();
        if len < 1e-300 {
            continue;
        }
        let lhat = edge / len;
        // Outward in-plane edge normal for a CCW triangle with +z normal.
        let mhat = lhat.cross(&normal);
        let p0 = (a - obs).dot(&mhat); // signed perpendicular distance
        let lm = (a - obs).dot(&lhat);
        let lp = (b - obs).dot(&lhat);
        let rm = (a - obs).norm();
        let rp = (b - obs).norm();

        // log term: guard the degenerate case where obs lies on the edge line
        // (p0 -> 0); both contributions vanish in that limit.
        let denom = rm + lm;
        let numer = rp + lp;
        let f2 = if denom.abs() < 1e-14 || numer.abs() < 1e-14 {
            0.0
        } else {
            (numer / denom).ln()
        };
        i_one += p0 * f2;
        i_rho += mhat * 0.5 * (p0 * p0 * f2 + lp * rp - lm * rm);
    }
    (i_one, i_rho)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri() -> [Vector3<f64>; 3] {
        [
            Vector3::new(0.0, 0.0, 0.0),
            Vector3::new(0.1, 0.0, 0.0),
            Vector3::new(0.0, 0.08, 0.0),
        ]
    }

    /// Brute-force 1/R integrals by uniform barycentric subdivision.
    fn brute_force(v: &[Vector3<f64>; 3], obs: &Vector3<f64>, n: usize) -> (f64, Vector3<f64>) {
        let area = 0.5 * (v[1] - v[0]).cross(&(v[2] - v[0])).norm();
        let mut one = 0.0;
        let mut rho = Vector3::zeros();
        let cells = n * n;
        let da = area / cells as f64;
        for i in 0..n {
            for j in 0..(n - i) {
                // two sub-triangles per lattice cell; integrate at centroids
                let b = |a: f64, c: f64| v[0] * (1.0 - a - c) + v[1] * a + v[2] * c;
                let s = 1.0 / n as f64;
                let p1 = b((i as f64 + 1.0 / 3.0) * s, (j as f64 + 1.0 / 3.0) * s);
                let r1 = (p1 - obs).norm();
                one += da / r1;
                rho += (p1 - obs) * (da / r1);
                if j + i + 1 < n {
                    let p2 = b((i as f64 + 2.0 / 3.0) * s, (j as f64 + 2.0 / 3.0) * s);
                    let r2 = (p2 - obs).norm();
                    one += da / r2;
                    rho += (p2 - obs) * (da / r2);
                }
            }
        }
        (one, rho)
    }

    #[test]
    fn static_integrals_match_brute_force_at_exterior_point() {
        let v = tri();
        let obs = Vector3::new(0.25, 0.1, 0.0);
        let (a_one, a_rho) = static_potential_integrals(&v, &obs);
        let (b_one, b_rho) = brute_force(&v, &obs, 400);
        assert!((a_one - b_one).abs() / b_one.abs() < 1e-4, "{a_one} vs {b_one}");
        assert!((a_rho - b_rho).norm() / b_rho.norm() < 1e-3);
    }

    #[test]
    fn static_integrals_match_brute_force_at_interior_point() {
        let v = tri();
        let obs = Vector3::new(0.03, 0.02, 0.0);
        let (a_one, _) = static_potential_integrals(&v, &obs);
        // Brute force converges slowly near the singularity; compare two
        // refinements to confirm the analytic value is their limit.
        let (b1, _) = brute_force(&v, &obs, 300);
        let (b2, _) = brute_force(&v, &obs, 600);
        assert!(
            (a_one - b2).abs() < 2.0 * (b2 - b1).abs() + 2e-4 * a_one.abs(),
            "analytic {a_one}, brute {b1} -> {b2}"
        );
    }

    #[test]
    fn static_integral_on_vertex_is_finite() {
        let v = tri();
        let (one, rho) = static_potential_integrals(&v, &v[0].clone());
        assert!(one.is_finite() && one > 0.0);
        assert!(rho.norm().is_finite());
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        // integral of x^6 over [-1,1] = 2/7
        let i6: f64 = x.iter().zip(&w).map(|(&x, &w)| w * x.powi(6)).sum();
        assert!((i6 - 2.0 / 7.0).abs() < 1e-13);
        // odd moments vanish
        let i3: f64 = x.iter().zip(&w).map(|(&x, &w)| w * x.powi(3)).sum();
        assert!(i3.abs() < 1e-14);
    }

    #[test]
    fn tri7_integrates_degree_five() {
        // Integrate f(x,y) = x^2 y^3 over the unit right triangle and compare
        // with the exact value 1/420 * Beta-type integral.
        let v0 = Vector3::new(0.0, 0.0, 0.0);
        let v1 = Vector3::new(1.0, 0.0, 0.0);
        let v2 = Vector3::new(0.0, 1.0, 0.0);
        let pts = triangle_points(&v0, &v1, &v2, 0.5);
        let quad: f64 = pts.iter().map(|(p, w)| w * p.x * p.x * p.y.powi(3)).sum();
        // exact: Int x^2 y^3 over {x,y>0, x+y<1} = 2!*3!/(2+3+2)! = 12/5040
        let exact = 12.0 / 5040.0;
        assert!((quad - exact).abs() < 1e-15, "{quad} vs {exact}");
    }
}
