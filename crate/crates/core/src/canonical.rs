//! GGM of arbitrary pure Fock states: one minus the largest Schmidt
//! coefficient over all bipartitions of the modes.
//!
//! The production path takes the top eigenvalue of each reduced density
//! matrix by power iteration. [`schmidt_spectrum`] reshapes the amplitude
//! tensor and takes singular values instead; it serves as the independent
//! check.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::{max_basis_from_env, reduced_density_blocks, FockState, ReducedDensityMatrix};
use crate::partition::{Candidate, GgmResult, ModeBipartition};

/// Convergence threshold on successive Rayleigh quotients.
pub const POWER_TOL: f64 = 1e-12;
/// Iteration ceiling for power iteration.
pub const POWER_MAX_ITER: usize = 100_000;
/// Matrices up to this dimension go straight to the dense eigensolver.
pub const DENSE_DIM: usize = 64;
// Schmidt coefficients below this are roundoff from rank-deficient blocks.
const SCHMIDT_ZERO: f64 = 1e-24;
// Power iteration hands over to the dense solver after this many steps.
const SLOW_ITER: usize = 5_000;

fn dense_max_eigenvalue(m: &DMatrix<Complex64>) -> Result<f64> {
    let n = m.nrows();
    let eig = SymmetricEigen::try_new(m.clone(), 1e-15, 100_000).ok_or_else(|| {
        Error::Numerical(format!("dense Hermitian eigensolver did not converge (n = {n})"))
    })?;
    Ok(eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max))
}

/// Outcome of power iteration on a Hermitian PSD matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerIteration {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Power iteration from a start vector with positive weight on every basis
/// state, stopping when the Rayleigh quotient moves by less than `tol`.
pub fn power_iteration(m: &DMatrix<Complex64>, tol: f64, max_iter: usize) -> PowerIteration {
    let n = m.nrows();
    let mut v = DVector::from_iterator(n, m.diagonal().iter().map(|d| Complex64::new(d.re.max(0.0).sqrt() + 1e-3, 0.0)));
    v /= Complex64::new(v.norm(), 0.0);
    let mut lambda = f64::NEG_INFINITY;
    for it in 1..=max_iter {
        let w = m * &v;
        let next = v.dotc(&w).re;
        let norm = w.norm();
        if norm == 0.0 {
            return PowerIteration {
                value: 0.0,
                iterations: it,
                converged: true,
            };
        }
        v = w / Complex64::new(norm, 0.0);
        if (next - lambda).abs() < tol {
            return PowerIteration {
                value: next,
                iterations: it,
                converged: true,
            };
        }
        lambda = next;
    }
    PowerIteration {
        value: lambda,
        iterations: max_iter,
        converged: false,
    }
}

/// Largest eigenvalue of a reduced density matrix.
pub fn max_eigenvalue_rdm(rdm: &ReducedDensityMatrix) -> Result<f64> {
    let m = &rdm.matrix;
    if m.nrows() == 0 {
        return Err(Error::Dimension("empty density matrix".into()));
    }
    if m.nrows() <= DENSE_DIM {
        return dense_max_eigenvalue(m);
    }
    let run = power_iteration(m, POWER_TOL, SLOW_ITER.min(POWER_MAX_ITER));
    if run.converged {
        return Ok(run.value);
    }
    log::debug!(
        "power iteration slow after {} steps (dim {}); using dense solver",
        run.iterations,
        m.nrows()
    );
    dense_max_eigenvalue(m)
}

/// Reshapes the amplitudes into a `side_a × side_b` matrix.
fn schmidt_matrix(state: &FockState, split: &ModeBipartition, max_basis: usize) -> Result<DMatrix<Complex64>> {
    if split.n_total() != state.n_modes() {
        return Err(Error::ModeSelection(format!(
            "bipartition of {} modes applied to a {}-mode state",
            split.n_total(),
            state.n_modes()
        )));
    }
    let a = split.side_a();
    let b = split.side_b();
    let mut rows: HashMap<Vec<u32>, usize> = HashMap::new();
    let mut cols: HashMap<Vec<u32>, usize> = HashMap::new();
    let mut triples = Vec::with_capacity(state.len());
    for (occ, amp) in state.iter() {
        let ka: Vec<u32> = a.iter().map(|&k| occ[k]).collect();
        let kb: Vec<u32> = b.iter().map(|&k| occ[k]).collect();
        let nr = rows.len();
        let i = *rows.entry(ka).or_insert(nr);
        let nc = cols.len();
        let j = *cols.entry(kb).or_insert(nc);
        triples.push((i, j, amp));
    }
    for size in [rows.len(), cols.len()] {
        if size > max_basis {
            return Err(Error::Capacity { size, cap: max_basis });
        }
    }
    let mut m = DMatrix::zeros(rows.len(), cols.len());
    for (i, j, amp) in triples {
        m[(i, j)] += amp;
    }
    Ok(m)
}

/// Schmidt coefficients across `split`, descending; the squared singular
/// values of the reshaped amplitude matrix.
pub fn schmidt_spectrum(state: &FockState, split: &ModeBipartition) -> Result<Vec<f64>> {
    let m = schmidt_matrix(state, split, max_basis_from_env())?;
    let svd = m.svd(false, false);
    let mut out: Vec<f64> = svd
        .singular_values
        .iter()
        .map(|s| s * s)
        .filter(|&l| l > SCHMIDT_ZERO)
        .collect();
    out.sort_by(|x, y| y.total_cmp(x));
    Ok(out)
}

/// GGM via reduced density matrices, with the basis cap taken from
/// `GGMLAB_MAX_BASIS`.
pub fn ggm_fock(state: &FockState) -> Result<GgmResult> {
    ggm_fock_with(state, max_basis_from_env())
}

/// Largest eigenvalue of the reduced state on `keep`, taken block by block.
/// Blocks whose trace cannot beat the running maximum are skipped.
pub fn max_reduced_eigenvalue(state: &FockState, keep: &[usize], max_basis: usize) -> Result<f64> {
    let mut blocks = reduced_density_blocks(state, keep, max_basis)?;
    blocks.sort_by(|a, b| b.trace().total_cmp(&a.trace()));
    let mut best = 0.0f64;
    for block in &blocks {
        if block.trace() <= best {
            break;
        }
        best = best.max(max_eigenvalue_rdm(block)?);
    }
    Ok(best)
}

/// As [`ggm_fock`] with an explicit cap on the reduced block dimension.
pub fn ggm_fock_with(state: &FockState, max_basis: usize) -> Result<GgmResult> {
    let candidates = ModeBipartition::enumerate(state.n_modes())
        .into_par_iter()
        .map(|partition| {
            Ok(Candidate {
                max_eigenvalue: max_reduced_eigenvalue(state, partition.side_a(), max_basis)?,
                partition,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    GgmResult::from_candidates(candidates)
}

/// GGM via singular values of the reshaped amplitude tensor.
pub fn ggm_fock_schmidt(state: &FockState) -> Result<GgmResult> {
    let candidates = ModeBipartition::enumerate(state.n_modes())
        .into_par_iter()
        .map(|partition| {
            let top = schmidt_spectrum(state, &partition)?.first().copied().unwrap_or(0.0);
            Ok(Candidate {
                max_eigenvalue: top,
                partition,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    GgmResult::from_candidates(candidates)
}
