//! Shared fixtures for the pipeline benchmarks.

use mma_core::*;

/// Rectangle plate pipeline inputs at a given resolution.
pub fn rectangle_fixture(h: f64) -> (RwgBasis, ImpedanceOperator) {
    let mesh = make_plate_mesh(
        PlateSpec::Rectangle {
            width: 1.0,
            height: 0.5,
        },
        h,
    )
    .expect("benchmark mesh");
    let basis = build_rwg_basis(&mesh).expect("benchmark basis");
    let zop = assemble_impedance(&basis).expect("benchmark operator");
    (basis, zop)
}
