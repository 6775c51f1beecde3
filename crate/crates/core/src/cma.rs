//! Characteristic-mode analysis.
//!
//! Solves the generalized eigenproblem X J = lambda R J built from the MoM
//! impedance operator Z = R + jX. R is positive semidefinite but numerically
//! rank-deficient (non-radiating currents), so the pencil is formed on the
//! subspace of R-eigendirections above a relative cutoff; retained eigenpairs
//! are then polished by blocked inverse iteration in the full space so the
//! unprojected residual ||X J - lambda R J|| stays small.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::farfield::{radiated_far_field, FarField, SphereGrid};
use crate::mom::ImpedanceOperator;
use crate::rwg::RwgBasis;
use crate::symmetry::SymmetryGroup;

/// Modal significance MS = 1/|1 + j lambda|.
pub fn modal_significance(eigenvalue: f64) -> f64 {
    1.0 / (1.0 + eigenvalue * eigenvalue).sqrt()
}

/// Half-power criterion: a mode is significant iff MS >= 1/sqrt(2).
pub const SIGNIFICANCE_THRESHOLD: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Characteristic modes of one plate at the design frequency.
///
/// Modes are sorted by significance descending (|lambda| ascending), currents
/// are R-normalized (J^T R J = 1), and eigenvector signs are fixed by making
/// the largest-magnitude entry positive.
#[derive(Debug, Clone)]
pub struct CharacteristicBasis {
    pub eigenvalues: Vec<f64>,
    pub currents: Vec<DVector<f64>>,
    pub significance: Vec<f64>,
    /// Irrep label per mode, filled by [`classify_symmetry`].
    pub sym_class: Vec<Option<String>>,
    /// Far field per mode, filled by [`CharacteristicBasis::attach_far_fields`].
    pub far_fields: Vec<FarField>,
    /// Dimension of the R-positive subspace the pencil was solved on.
    pub rank_kept: usize,
}

impl CharacteristicBasis {
    pub fn mode_count(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Indices of modes passing the half-power significance criterion.
    pub fn significant_modes(&self) -> Vec<usize> {
        (0..self.mode_count())
            .filter(|&i| self.significance[i] >= SIGNIFICANCE_THRESHOLD)
            .collect()
    }

    /// Compute and store the far field of every retained mode.
    pub fn attach_far_fields(&mut self, basis: &RwgBasis, grid: &SphereGrid) -> Result<()> {
        let mut fields = Vec::with_capacity(self.mode_count());
        for current in &self.currents {
            let c: Vec<Complex64> = current.iter().map(|&x| Complex64::new(x, 0.0)).collect();
            fields.push(radiated_far_field(basis, &c, grid)?);
        }
        self.far_fields = fields;
        Ok(())
    }
}

/// Options for [`solve_characteristic_modes_with`].
#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Discard R-eigendirections below this fraction of the largest.
    pub deflation_cutoff: f64,
    /// Polish retained eigenpairs by inverse iteration in the full space.
    pub refine: bool,
    /// Relative residual each retained pair must satisfy.
    pub residual_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            deflation_cutoff: 1e-10,
            refine: true,
            residual_tol: 1e-8,
        }
    }
}

/// Solve X J = lambda R J with default options.
pub fn solve_characteristic_modes(
    zop: &ImpedanceOperator,
    n_modes: usize,
) -> Result<CharacteristicBasis> {
    solve_characteristic_modes_with(zop, n_modes, &SolveOptions::default())
}

fn symmetric_eigen(m: DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let n = m.nrows();
    let eig = m
        .try_symmetric_eigen(1e-14, 100_000)
        .ok_or_else(|| Error::NumericalFailure(format!("symmetric eigensolver stalled (n={n})")))?;
    Ok((eig.eigenvalues, eig.eigenvectors))
}

/// Fix the sign of an eigenvector: largest-magnitude entry positive.
fn fix_sign(v: &mut DVector<f64>) {
    let mut idx = 0;
    let mut best = 0.0;
    for (i, &x) in v.iter().enumerate() {
        if x.abs() > best {
            best = x.abs();
            idx = i;
        }
    }
    if v[idx] < 0.0 {
        *v = -&*v;
    }
}

pub fn solve_characteristic_modes_with(
    zop: &ImpedanceOperator,
    n_modes: usize,
    opts: &SolveOptions,
) -> Result<CharacteristicBasis> {
    let n = zop.n();
    if n_modes == 0 || n_modes > n {
        return Err(Error::InvalidArgument(format!(
            "n_modes must be in 1..={n}, got {n_modes}"
        )));
    }
    let r = zop.real_part();
    let x = zop.imag_part();

    let (sigma, u) = symmetric_eigen(r.clone())?;
    let sigma_max = sigma.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(sigma_max > 0.0) {
        return Err(Error::DegenerateOperator(
            "radiation operator has no positive eigenvalues".into(),
        ));
    }
    let cutoff = opts.deflation_cutoff * sigma_max;
    let kept: Vec<usize> = (0..n).filter(|&i| sigma[i] >= cutoff).collect();
    let rank_kept = kept.len();
    if rank_kept == 0 {
        return Err(Error::DegenerateOperator(
            "radiation operator is numerically zero".into(),
        ));
    }

    // Whitening basis W = U_kept * diag(sigma^{-1/2}); the projected pencil
    // becomes the ordinary symmetric problem M y = lambda y.
    let mut w = DMatrix::<f64>::zeros(n, rank_kept);
    for (col, &i) in kept.iter().enumerate() {
        let s = sigma[i].sqrt();
        for row in 0..n {
            w[(row, col)] = u[(row, i)] / s;
        }
    }
    let mut m = w.transpose() * &x * &w;
    // enforce symmetry lost to rounding
    for i in 0..rank_kept {
        for j in (i + 1)..rank_kept {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
    let (lambda, y) = symmetric_eigen(m)?;

    // Sort by significance descending = |lambda| ascending.
    let mut order: Vec<usize> = (0..rank_kept).collect();
    order.sort_by(|&a, &b| {
        lambda[a]
            .abs()
            .partial_cmp(&lambda[b].abs())
            .unwrap()
            .then(a.cmp(&b))
    });

    // The deflated pencil only estimates the spectrum: the reactance couples
    // radiating and non-radiating currents strongly, so eigenvalues are
    // polished against the full matrices before the final mode selection.
    // Refine more candidates than requested, then dedupe and truncate.
    let seed_count = if opts.refine {
        rank_kept.min(2 * n_modes + 8)
    } else {
        n_modes.min(rank_kept)
    };
    let order = &order[..seed_count];

    let mut eigenvalues: Vec<f64> = order.iter().map(|&i| lambda[i]).collect();
    let mut currents: Vec<DVector<f64>> = order
        .iter()
        .map(|&i| &w * y.column(i).clone_owned())
        .collect();

    if opts.refine {
        for (lam, v) in eigenvalues.iter_mut().zip(currents.iter_mut()) {
            refine_eigenpair(&r, &x, lam, v);
        }
        // Spare candidates that failed to converge are dropped; only pairs
        // certified by the residual gate may be retained.
        let x_scale = x.norm();
        let converged: Vec<usize> = (0..eigenvalues.len())
            .filter(|&i| {
                let xv = &x * &currents[i];
                let res = (&xv - &(&r * &currents[i]) * eigenvalues[i]).norm();
                res <= opts.residual_tol * xv.norm()
                    || res <= 1e-11 * x_scale * currents[i].norm()
            })
            .collect();
        eigenvalues = converged.iter().map(|&i| eigenvalues[i]).collect();
        currents = converged.iter().map(|&i| currents[i].clone()).collect();
        if eigenvalues.is_empty() {
            return Err(Error::NumericalFailure(
                "no eigenpair converged in full-pencil refinement".into(),
            ));
        }
        deduplicate_modes(&r, &mut eigenvalues, &mut currents);
        let mut order: Vec<usize> = (0..eigenvalues.len()).collect();
        order.sort_by(|&a, &b| {
            eigenvalues[a]
                .abs()
                .partial_cmp(&eigenvalues[b].abs())
                .unwrap()
                .then(a.cmp(&b))
        });
        order.truncate(n_modes);
        eigenvalues = order.iter().map(|&i| eigenvalues[i]).collect();
        currents = order.iter().map(|&i| currents[i].clone()).collect();
    }

    // R-normalize and fix signs.
    for (j, lam) in currents.iter_mut().zip(eigenvalues.iter()) {
        let norm = (j.transpose() * &r * &*j)[(0, 0)];
        if !(norm > 0.0) {
            return Err(Error::NumericalFailure(format!(
                "mode at lambda={lam} has non-positive radiated power {norm}"
            )));
        }
        *j /= norm.sqrt();
        fix_sign(j);
    }

    // Residual gate. The relative-to-||XJ|| criterion degenerates when the
    // pencil has an exact lambda = 0 eigenpair (XJ is then machine noise), so
    // residuals at the operator noise floor also pass.
    let x_scale = x.norm();
    let mut report = String::new();
    for (i, (j, &lam)) in currents.iter().zip(eigenvalues.iter()).enumerate() {
        let xj = &x * j;
        let rj = &r * j;
        let res_abs = (&xj - &rj * lam).norm();
        let ok = res_abs <= opts.residual_tol * xj.norm()
            || res_abs <= 1e-11 * x_scale * j.norm();
        if !ok {
            let res = res_abs / xj.norm();
            report.push_str(&format!("mode {i}: lambda={lam:.6e} residual={res:.3e}; "));
        }
    }
    if !report.is_empty() {
        return Err(Error::NumericalFailure(format!(
            "eigenpairs exceed residual tolerance {}: {report}",
            opts.residual_tol
        )));
    }

    let significance = eigenvalues.iter().map(|&l| modal_significance(l)).collect();
    let count = eigenvalues.len();
    Ok(CharacteristicBasis {
        eigenvalues,
        currents,
        significance,
        sym_class: vec![None; count],
        far_fields: Vec::new(),
        rank_kept,
    })
}

fn residual_of(r: &DMatrix<f64>, x: &DMatrix<f64>, lam: f64, v: &DVector<f64>) -> f64 {
    let xv = x * v;
    let rv = r * v;
    (&xv - &rv * lam).norm() / xv.norm().max(f64::MIN_POSITIVE)
}

/// Polish one eigenpair of the full pencil by shift-inverted Rayleigh
/// quotient iteration: z = (X - sigma R)^{-1} R v with sigma tracking the
/// Rayleigh quotient. Converges to a true eigenpair of the assembled
/// matrices; the update is kept only where it lowers the residual.
fn refine_eigenpair(r: &DMatrix<f64>, x: &DMatrix<f64>, lam: &mut f64, v: &mut DVector<f64>) {
    let mut best_lam = *lam;
    let mut best_v = v.clone();
    let mut best_res = residual_of(r, x, *lam, v);
    let mut cur_lam = *lam;
    let mut cur_v = v.clone();
    let mut offset = 1e-7;
    let mut it = 0;
    let mut stall = 0;
    while best_res > 1e-12 && it < 25 {
        it += 1;
        let shift = cur_lam + offset * (1.0 + cur_lam.abs());
        let a = x - r * shift;
        let rv = r * &cur_v;
        let Some(z) = a.lu().solve(&rv) else {
            // singular shift: back off and retry
            offset *= 10.0;
            if offset > 1e-3 {
                break;
            }
            continue;
        };
        let rz = (z.transpose() * r * &z)[(0, 0)];
        if !(rz > 0.0) {
            break;
        }
        cur_v = &z / rz.sqrt();
        cur_lam = (cur_v.transpose() * x * &cur_v)[(0, 0)];
        let res = residual_of(r, x, cur_lam, &cur_v);
        if res < best_res {
            best_res = res;
            best_lam = cur_lam;
            best_v = cur_v.clone();
            stall = 0;
        } else {
            stall += 1;
            if stall >= 3 {
                break;
            }
        }
    }
    *lam = best_lam;
    *v = best_v;
}

/// Drop refined candidates that converged onto an already-kept eigenpair;
/// members of a degenerate cluster are R-orthogonalized against each other
/// instead of being dropped.
fn deduplicate_modes(
    r: &DMatrix<f64>,
    eigenvalues: &mut Vec<f64>,
    currents: &mut Vec<DVector<f64>>,
) {
    let mut order: Vec<usize> = (0..eigenvalues.len()).collect();
    order.sort_by(|&a, &b| {
        eigenvalues[a]
            .partial_cmp(&eigenvalues[b])
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut kept_lam: Vec<f64> = Vec::new();
    let mut kept_v: Vec<DVector<f64>> = Vec::new();
    for &i in &order {
        let lam = eigenvalues[i];
        let mut v = currents[i].clone();
        for (kl, kv) in kept_lam.iter().zip(kept_v.iter()) {
            if (lam - kl).abs() <= 1e-6 * (1.0 + lam.abs()) {
                let overlap = (kv.transpose() * r * &v)[(0, 0)];
                v -= kv * overlap;
            }
        }
        // A duplicate collapses under R-orthogonalization; a genuine
        // degenerate partner keeps most of its norm.
        let norm_sq = (v.transpose() * r * &v)[(0, 0)];
        if norm_sq > 1e-6 {
            kept_lam.push(lam);
            kept_v.push(v / norm_sq.sqrt());
        }
    }
    *eigenvalues = kept_lam;
    *currents = kept_v;
}

/// Maximum number of uncorrelated ports the plate symmetry supports: one
/// orthogonal far-field channel per irrep dimension.
pub fn max_uncorrelated_ports(group: &SymmetryGroup) -> usize {
    group.max_uncorrelated_ports()
}

/// Per-mode outcome of [`classify_symmetry`].
#[derive(Debug, Clone)]
pub struct ClassificationNote {
    pub mode: usize,
    /// R-norm fraction captured per irrep, aligned with `group.irreps`.
    pub fractions: Vec<f64>,
    /// Set when no irrep captured at least 99% of the mode's R-norm.
    pub ambiguous: bool,
}

/// Assign every retained mode to the irrep whose projector captures at least
/// 99% of its R-norm; degenerate pairs of a 2D irrep are re-expressed in the
/// canonical row basis of that irrep.
///
/// Ambiguous modes are reported, not fatal: their `sym_class` stays `None`.
pub fn classify_symmetry(
    basis: &CharacteristicBasis,
    group: &SymmetryGroup,
    zop: &ImpedanceOperator,
) -> Result<(CharacteristicBasis, Vec<ClassificationNote>)> {
    let n = zop.n();
    if basis.currents.iter().any(|c| c.len() != n) {
        return Err(Error::InvalidArgument(
            "mode currents and impedance operator have mismatched dimensions".into(),
        ));
    }
    let r = zop.real_part();
    let mut out = basis.clone();
    let mut notes = Vec::new();

    let r_norm_sq = |v: &DVector<f64>| -> f64 { (v.transpose() * &r * v)[(0, 0)] };

    for (m, current) in basis.currents.iter().enumerate() {
        let total = r_norm_sq(current);
        let fractions: Vec<f64> = (0..group.irreps.len())
            .map(|w| r_norm_sq(&group.project(w, current)) / total)
            .collect();
        let (best, &frac) = fractions
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap();
        let ambiguous = frac < 0.99;
        out.sym_class[m] = if ambiguous {
            None
        } else {
            Some(group.irreps[best].label.clone())
        };
        notes.push(ClassificationNote {
            mode: m,
            fractions,
            ambiguous,
        });
    }

    canonicalize_degenerate_pairs(&mut out, group, &r);
    Ok((out, notes))
}

/// Replace each degenerate pair assigned to a 2D irrep with the canonical
/// row-projector basis, so degenerate eigenspaces are reproducible run to run.
fn canonicalize_degenerate_pairs(
    basis: &mut CharacteristicBasis,
    group: &SymmetryGroup,
    r: &DMatrix<f64>,
) {
    let m = basis.mode_count();
    let r_norm = |v: &DVector<f64>| -> f64 { (v.transpose() * r * v)[(0, 0)].sqrt() };
    let mut i = 0;
    while i < m {
        let Some(label) = basis.sym_class[i].clone() else {
            i += 1;
            continue;
        };
        let w = group.irreps.iter().position(|ir| ir.label == label).unwrap();
        if group.irreps[w].dim != 2 {
            i += 1;
            continue;
        }
        // Find the degenerate partner with the same label.
        let mut j = i + 1;
        let degenerate = j < m
            && basis.sym_class[j].as_deref() == Some(label.as_str())
            && (basis.eigenvalues[j] - basis.eigenvalues[i]).abs()
                < 1e-6 * (1.0 + basis.eigenvalues[i].abs());
        if !degenerate {
            i += 1;
            continue;
        }
        // Seed row 0 from whichever pair member has the larger row-0 part.
        let p0a = group.project_element(w, 0, 0, &basis.currents[i]);
        let p0b = group.project_element(w, 0, 0, &basis.currents[j]);
        let mut row0 = if r_norm(&p0a) >= r_norm(&p0b) { p0a } else { p0b };
        let n0 = r_norm(&row0);
        if n0 > 1e-8 {
            row0 /= n0;
            let mut row1 = group.project_element(w, 1, 0, &row0);
            let n1 = r_norm(&row1);
            if n1 > 1e-8 {
                row1 /= n1;
                fix_sign(&mut row0);
                fix_sign(&mut row1);
                let lam = 0.5 * (basis.eigenvalues[i] + basis.eigenvalues[j]);
                basis.currents[i] = row0;
                basis.currents[j] = row1;
                basis.eigenvalues[i] = lam;
                basis.eigenvalues[j] = lam;
                basis.significance[i] = modal_significance(lam);
                basis.significance[j] = modal_significance(lam);
            }
        }
        j += 1;
        i = j;
    }
}

/// Normalized sphere inner product of two far fields: integral of E1 . E2*
/// over the sphere divided by sqrt(P1 P2). Lies in the closed unit disk.
pub fn far_field_correlation(f1: &FarField, f2: &FarField) -> Result<Complex64> {
    if f1.grid != f2.grid {
        return Err(Error::InvalidArgument(
            "far fields sampled on different grids".into(),
        ));
    }
    let p1 = f1.total_power();
    let p2 = f2.total_power();
    if p1 <= 0.0 || p2 <= 0.0 {
        return Err(Error::DegenerateField(
            "zero-power field in correlation".into(),
        ));
    }
    let mut acc = Complex64::default();
    for i in 0..f1.grid.len() {
        let w = f1.grid.weight(i);
        acc += (f1.e_theta[i] * f2.e_theta[i].conj() + f1.e_phi[i] * f2.e_phi[i].conj()) * w;
    }
    Ok(acc / (p1 * p2).sqrt())
}
