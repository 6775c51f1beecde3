//! Shared test oracles, independent of the library's solver path.
//!
//! The characteristic-mode oracle uses a hand-rolled cyclic Jacobi
//! eigensolver and Gaussian elimination, so agreement with the production
//! solver checks the algorithm, not the linear-algebra backend. The port
//! oracle enumerates every element-subset assignment exhaustively.

#![allow(dead_code)]

use mma_core::cma::CharacteristicBasis;
use mma_core::ports::{CouplingElement, CouplingKind, Port};
use mma_core::rwg::RwgBasis;
use mma_core::symmetry::SymmetryGroup;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
/// Returns (eigenvalues, eigenvectors as columns), unsorted.
pub fn jacobi_symmetric_eigen(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let mut m = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    let off = |m: &DMatrix<f64>| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += m[(i, j)] * m[(i, j)];
            }
        }
        s.sqrt()
    };
    let scale = a.norm().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        if off(&m) <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq.abs() <= 1e-18 * scale {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| m[(i, i)]).collect(), v)
}

/// Gaussian elimination with partial pivoting; None if singular to working
/// precision.
pub fn gauss_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    let n = a.nrows();
    let mut aug = a.clone();
    let mut rhs = b.clone();
    for col in 0..n {
        let mut piv = col;
        let mut best = aug[(col, col)].abs();
        for row in (col + 1)..n {
            if aug[(row, col)].abs() > best {
                best = aug[(row, col)].abs();
                piv = row;
            }
        }
        if best < 1e-300 {
            return None;
        }
        if piv != col {
            aug.swap_rows(piv, col);
            rhs.swap_rows(piv, col);
        }
        let d = aug[(col, col)];
        for row in (col + 1)..n {
            let f = aug[(row, col)] / d;
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                aug[(row, k)] -= f * aug[(col, k)];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = DVector::zeros(n);
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for k in (row + 1)..n {
            acc -= aug[(row, k)] * x[k];
        }
        x[row] = acc / aug[(row, row)];
    }
    Some(x)
}

/// Brute-force characteristic-mode solve: Jacobi eigensolver for the
/// deflated-pencil estimates, then shift-inverted Rayleigh iteration with
/// Gaussian elimination against the full matrices, deduplication, and
/// |lambda|-ascending selection. Returns (eigenvalue, R-normalized current).
pub fn oracle_characteristic_modes(
    r: &DMatrix<f64>,
    x: &DMatrix<f64>,
    cutoff: f64,
    n_modes: usize,
) -> Vec<(f64, DVector<f64>)> {
    let n = r.nrows();
    let (sigma, u) = jacobi_symmetric_eigen(r);
    let smax = sigma.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let kept: Vec<usize> = (0..n).filter(|&i| sigma[i] >= cutoff * smax).collect();
    let mut w = DMatrix::<f64>::zeros(n, kept.len());
    for (c, &i) in kept.iter().enumerate() {
        let s = sigma[i].sqrt();
        for row in 0..n {
            w[(row, c)] = u[(row, i)] / s;
        }
    }
    let m = {
        let m = w.transpose() * x * &w;
        (&m + &m.transpose()) * 0.5
    };
    let (lam, y) = jacobi_symmetric_eigen(&m);
    let mut order: Vec<usize> = (0..lam.len()).collect();
    order.sort_by(|&a, &b| lam[a].abs().partial_cmp(&lam[b].abs()).unwrap());
    order.truncate((2 * n_modes + 8).min(lam.len()));

    // Refine each candidate on the full pencil.
    let mut pairs: Vec<(f64, DVector<f64>)> = Vec::new();
    for &i in &order {
        let mut v = &w * y.column(i).clone_owned();
        let mut l = lam[i];
        for _ in 0..20 {
            let res = {
                let xv = x * &v;
                (&xv - &(r * &v) * l).norm() / xv.norm().max(f64::MIN_POSITIVE)
            };
            if res <= 1e-12 {
                break;
            }
            let shift = l + 1e-7 * (1.0 + l.abs());
            let a = x - r * shift;
            let Some(z) = gauss_solve(&a, &(r * &v)) else {
                break;
            };
            let rz = (z.transpose() * r * &z)[(0, 0)];
            if !(rz > 0.0) {
                break;
            }
            v = &z / rz.sqrt();
            l = (v.transpose() * x * &v)[(0, 0)];
        }
        pairs.push((l, v));
    }

    // Dedupe by R-orthogonalization within eigenvalue clusters.
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut kept_pairs: Vec<(f64, DVector<f64>)> = Vec::new();
    for (l, mut v) in pairs {
        for (kl, kv) in &kept_pairs {
            if (l - kl).abs() <= 1e-6 * (1.0 + l.abs()) {
                let overlap = (kv.transpose() * r * &v)[(0, 0)];
                v -= kv * overlap;
            }
        }
        let nsq = (v.transpose() * r * &v)[(0, 0)];
        if nsq > 1e-6 {
            kept_pairs.push((l, v / nsq.sqrt()));
        }
    }
    kept_pairs.sort_by(|a, b| a.0.abs().partial_cmp(&b.0.abs()).unwrap());
    kept_pairs.truncate(n_modes);
    kept_pairs
}

/// Exhaustive two-port placement oracle: enumerate all disjoint candidate
/// subsets up to `max_elements` per port, apply the deterministic weight rule
/// (matched filter for port 1; matched-then-projected for port 2), and
/// return the smallest achievable max pairwise ECC.
pub fn exhaustive_two_port_best_ecc(
    cma: &CharacteristicBasis,
    candidates: &[CouplingElement],
    max_elements: usize,
) -> f64 {
    let n_modes = cma.mode_count();
    let beta = |mode: usize, e: usize| -> Complex64 {
        let overlap: Complex64 = cma.currents[mode]
            .iter()
            .zip(candidates[e].excitation.iter())
            .map(|(&j, &v)| v * j)
            .sum();
        overlap / Complex64::new(1.0, cma.eigenvalues[mode])
    };
    let alphas = |set: &[usize], w: &[Complex64]| -> Vec<Complex64> {
        (0..n_modes)
            .map(|m| set.iter().zip(w.iter()).map(|(&e, &wi)| beta(m, e) * wi).sum())
            .collect()
    };
    let ecc = |a: &[Complex64], b: &[Complex64]| -> f64 {
        let pa: f64 = a.iter().map(|x| x.norm_sqr()).sum();
        let pb: f64 = b.iter().map(|x| x.norm_sqr()).sum();
        let cr: Complex64 = a.iter().zip(b.iter()).map(|(&x, &y)| x * y.conj()).sum();
        cr.norm_sqr() / (pa * pb)
    };
    // All subsets of 1..=max_elements elements.
    let n = candidates.len();
    let mut subsets: Vec<Vec<usize>> = Vec::new();
    let mut stack: Vec<Vec<usize>> = (0..n).map(|e| vec![e]).collect();
    while let Some(s) = stack.pop() {
        if s.len() < max_elements {
            for e in (s[s.len() - 1] + 1)..n {
                let mut bigger = s.clone();
                bigger.push(e);
                stack.push(bigger);
            }
        }
        subsets.push(s);
    }

    let mut best = f64::INFINITY;
    for s1 in &subsets {
        for s2 in &subsets {
            if s1.iter().any(|e| s2.contains(e)) {
                continue;
            }
            let mut w1: Vec<Complex64> = s1.iter().map(|&e| beta(0, e).conj()).collect();
            let n1: f64 = w1.iter().map(|w| w.norm_sqr()).sum::<f64>().sqrt();
            if n1 < 1e-12 {
                continue;
            }
            w1.iter_mut().for_each(|w| *w /= n1);
            let a1 = alphas(s1, &w1);
            let mut w2: Vec<Complex64> = s2.iter().map(|&e| beta(1, e).conj()).collect();
            // project out the constraint c = B^H alpha_1
            let c: Vec<Complex64> = s2
                .iter()
                .map(|&e| (0..n_modes).map(|m| beta(m, e).conj() * a1[m]).sum())
                .collect();
            let cn: f64 = c.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            if cn > 1e-12 {
                let dot: Complex64 = c
                    .iter()
                    .zip(w2.iter())
                    .map(|(&ci, &wi)| (ci / cn).conj() * wi)
                    .sum();
                for (wi, ci) in w2.iter_mut().zip(c.iter()) {
                    *wi -= dot * (ci / cn);
                }
            }
            let n2: f64 = w2.iter().map(|w| w.norm_sqr()).sum::<f64>().sqrt();
            if n2 < 1e-12 {
                continue;
            }
            w2.iter_mut().for_each(|w| *w /= n2);
            let a2 = alphas(s2, &w2);
            if a2[1].norm_sqr() < 1e-18 {
                continue;
            }
            best = best.min(ecc(&a1, &a2));
        }
    }
    best
}

/// Port whose elements are the orbit of a seed edge under the group, with
/// weights from an irrep's characters (or a 2D irrep's row projector), i.e. a
/// symmetric multi-element excitation that lives in one irrep only.
pub fn orbit_port(
    group: &SymmetryGroup,
    basis: &RwgBasis,
    seed_edge: usize,
    irrep: usize,
    row: Option<usize>,
) -> Option<(Vec<CouplingElement>, Port)> {
    let mut coeff: std::collections::BTreeMap<usize, f64> = std::collections::BTreeMap::new();
    let order = group.order() as f64;
    let ir = &group.irreps[irrep];
    for (g, action) in group.basis_actions.iter().enumerate() {
        let weight = match row {
            None => ir.characters[g],
            Some(rr) => ir.matrices.as_ref().unwrap()[g][rr][rr],
        };
        if weight == 0.0 {
            continue;
        }
        let image = action.image[seed_edge];
        let sign = action.sign[seed_edge];
        *coeff.entry(image).or_insert(0.0) += ir.dim as f64 / order * weight * sign;
    }
    coeff.retain(|_, v| v.abs() > 1e-12);
    if coeff.is_empty() {
        return None;
    }
    let sites: Vec<usize> = coeff.keys().copied().collect();
    let weights: Vec<Complex64> = coeff
        .values()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    let candidates: Vec<CouplingElement> = sites
        .iter()
        .map(|&s| CouplingElement::at_site(basis, s, CouplingKind::Inductive).unwrap())
        .collect();
    let port = Port::new(
        format!("{}-{:?}", ir.label, row),
        (0..sites.len()).collect(),
        weights,
    )
    .ok()?;
    Some((candidates, port))
}

