//! Multi-mode antenna toolkit: characteristic-mode analysis of PEC plates,
//! symmetry-based synthesis of uncorrelated antenna ports, multi-mode massive
//! MIMO array construction, and a multicarrier hybrid-beamforming simulator.
//!
//! The pipeline mirrors the multi-mode antenna design workflow:
//!
//! 1. [`mesh`] / [`rwg`] - triangulate a canonical plate and build the RWG
//!    edge basis for its surface current.
//! 2. [`mom`] - assemble the EFIE Galerkin impedance operator Z = R + jX.
//! 3. [`cma`] - solve X J = lambda R J for characteristic modes, classify
//!    them by point-group irrep, and bound the uncorrelated port count.
//! 4. [`ports`] - place coupling elements, compute modal weighting
//!    coefficients and envelope correlation, and optimize port sets under a
//!    correlation ceiling.
//! 5. [`array`] - tile multi-mode elements into massive-MIMO layouts and
//!    compare footprints against a crossed-dipole reference.
//! 6. [`beamforming`] - simulate digital, fully-connected, spatial-filtering,
//!    and single-element architectures by multicarrier sum rate.
//!
//! All lengths are in wavelengths at the design frequency; the free-space
//! wavenumber is k = 2*pi.

pub mod array;
pub mod beamforming;
pub mod cma;
pub mod error;
pub mod farfield;
pub mod io;
pub mod mesh;
pub mod mom;
pub mod ports;
pub mod quadrature;
pub mod rwg;
pub mod symmetry;

pub use array::{array_factor, array_metrics, layout_grid, layout_hex, ArrayLayout, PortPatternTable};
pub use cma::{
    classify_symmetry, far_field_correlation, max_uncorrelated_ports, modal_significance,
    solve_characteristic_modes, CharacteristicBasis, SIGNIFICANCE_THRESHOLD,
};
pub use error::{Error, Result};
pub use farfield::{radiated_far_field, FarField, SphereGrid};
pub use mesh::{make_notched_plate_mesh, make_plate_mesh, PlateSpec, ShapeTag, TriMesh};
pub use mom::{assemble_impedance, ImpedanceOperator};
pub use ports::{
    envelope_correlation, modal_weighting, optimize_ports, CorrelationMatrix, CouplingElement,
    CouplingKind, ModalWeights, Port, PortSet,
};
pub use rwg::{build_rwg_basis, RwgBasis};
pub use symmetry::{symmetry_group_of, SymmetryGroup};
