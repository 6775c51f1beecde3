//! Property tests for the structural invariants.

use mma_core::beamforming::{build_digital_precoder, greedy_user_schedule, rate_of_set};
use mma_core::ports::{envelope_correlation, ModalWeights};
use mma_core::*;
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Every generated plate satisfies the mesh invariants (positive areas,
    /// manifold edges, Euler relation) and the edge-length bound.
    #[test]
    fn plate_meshes_are_valid(
        kind in 0..3usize,
        a in 0.3f64..1.2,
        b in 0.2f64..0.9,
        div in 3u32..9,
    ) {
        let h = a.min(b) / div as f64;
        let spec = match kind {
            0 => PlateSpec::Rectangle { width: a, height: b },
            1 => PlateSpec::Square { side: a },
            _ => PlateSpec::Hexagon { circumradius: a },
        };
        let mesh = make_plate_mesh(spec, h).unwrap();
        mesh.validate().unwrap();
        prop_assert!(mesh.max_edge_length() <= 1.5 * h + 1e-12);
        // basis_count = interior edges = (3F - boundary)/2
        let basis = build_rwg_basis(&mesh).unwrap();
        let boundary = mesh
            .edge_incidence()
            .iter()
            .filter(|(_, t)| t.len() == 1)
            .count();
        prop_assert_eq!(
            basis.basis_count(),
            (3 * mesh.triangles.len() - boundary) / 2
        );
    }

    /// ECC is symmetric, lies in [0, 1], equals 1 on the diagonal, and is
    /// invariant under global phase rotation and positive scaling.
    #[test]
    fn ecc_invariances(
        re1 in prop::collection::vec(-1.0f64..1.0, 5),
        im1 in prop::collection::vec(-1.0f64..1.0, 5),
        re2 in prop::collection::vec(-1.0f64..1.0, 5),
        im2 in prop::collection::vec(-1.0f64..1.0, 5),
        phase in 0.0f64..std::f64::consts::TAU,
        scale in 0.1f64..10.0,
    ) {
        let a = ModalWeights {
            alphas: re1.iter().zip(&im1).map(|(&r, &i)| Complex64::new(r, i)).collect(),
        };
        let b = ModalWeights {
            alphas: re2.iter().zip(&im2).map(|(&r, &i)| Complex64::new(r, i)).collect(),
        };
        prop_assume!(a.total_power() > 1e-9 && b.total_power() > 1e-9);
        let ab = envelope_correlation(&a, &b).unwrap();
        let ba = envelope_correlation(&b, &a).unwrap();
        prop_assert!((ab - ba).abs() < 1e-12);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&ab));
        let aa = envelope_correlation(&a, &a).unwrap();
        prop_assert!((aa - 1.0).abs() < 1e-12);
        let rotated = ModalWeights {
            alphas: a
                .alphas
                .iter()
                .map(|&v| v * Complex64::from_polar(scale, phase))
                .collect(),
        };
        let rot = envelope_correlation(&rotated, &b).unwrap();
        prop_assert!((rot - ab).abs() < 1e-12);
    }

    /// |AF| never exceeds the total weight magnitude, and conjugate steering
    /// attains it.
    #[test]
    fn array_factor_bounds(
        nx in 1usize..5,
        ny in 1usize..4,
        side in 0.3f64..1.0,
        gap in 0.05f64..0.8,
        theta in 0.0f64..1.5,
        phi in 0.0f64..std::f64::consts::TAU,
    ) {
        let layout = layout_grid(nx, ny, side, gap, 1).unwrap();
        let n = layout.element_count();
        let weights: Vec<Complex64> = (0..n)
            .map(|i| Complex64::from_polar(0.3 + (i % 4) as f64 * 0.4, 0.7 * i as f64))
            .collect();
        let bound: f64 = weights.iter().map(|w| w.norm()).sum();
        let af = array_factor(&layout, &weights, theta, phi).unwrap();
        prop_assert!(af.norm() <= bound + 1e-9);
        // conjugate steering attains the coherent bound
        let steered: Vec<Complex64> = (0..n)
            .map(|m| mma_core::array::position_phase(&layout, m, theta, phi).conj())
            .collect();
        let af_max = array_factor(&layout, &steered, theta, phi).unwrap();
        prop_assert!((af_max.norm() - n as f64).abs() < 1e-9);
    }

    /// Sphere grids cover 4 pi regardless of the resolution.
    #[test]
    fn sphere_grid_weight_closure(n_theta in 18usize..48, n_phi in 36usize..96) {
        let grid = SphereGrid::new(n_theta, n_phi).unwrap();
        prop_assert!((grid.total_weight() - 4.0 * std::f64::consts::PI).abs() < 1e-9);
    }

    /// ZF power normalization and interference nulling hold on random
    /// feasible instances; the greedy schedule never does worse than the
    /// best single user.
    #[test]
    fn zf_and_greedy_schedule_properties(seed in 0u64..500) {
        let users = 2 + (seed % 4) as usize;
        let n_tx = 5 + (seed % 5) as usize;
        let h = vec![DMatrix::from_fn(users, n_tx, |i, j| {
            let k = (seed as usize * 31 + i * 17 + j * 7) % 101;
            let l = (seed as usize * 13 + i * 29 + j * 11) % 97;
            Complex64::new(k as f64 / 101.0 - 0.5, l as f64 / 97.0 - 0.5)
        })];
        let a = DMatrix::<Complex64>::identity(n_tx, n_tx);
        let scheduled: Vec<usize> = (0..users).collect();
        let p_tx = 1.7;
        if let Ok(d) = build_digital_precoder(&h[0], &a, &scheduled, p_tx) {
            let fro = (&a * &d).norm();
            prop_assert!((fro * fro - p_tx).abs() <= 1e-9 * p_tx);
        }
        let schedule = greedy_user_schedule(&h, &a, p_tx, 0.05, None).unwrap();
        prop_assert!(!schedule.is_empty());
        let rate = rate_of_set(&h, &a, &schedule, p_tx, 0.05).unwrap();
        for u in 0..users {
            if let Ok(single) = rate_of_set(&h, &a, &[u], p_tx, 0.05) {
                prop_assert!(rate >= single - 1e-9);
            }
        }
    }
}
