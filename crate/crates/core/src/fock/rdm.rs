use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::FockState;
use crate::error::{Error, Result};
use crate::symplectic::normalize_selection;

/// Default cap on the reduced basis size.
pub const DEFAULT_MAX_BASIS: usize = 4096;

/// Reads `GGMLAB_MAX_BASIS`, falling back to [`DEFAULT_MAX_BASIS`].
pub fn max_basis_from_env() -> usize {
    std::env::var("GGMLAB_MAX_BASIS")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&n: &usize| n > 0)
        .unwrap_or(DEFAULT_MAX_BASIS)
}

/// Density matrix of a subset of modes.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedDensityMatrix {
    pub kept_modes: Vec<usize>,
    /// Occupation tuples over the kept modes, in lexicographic order.
    pub basis: Vec<Vec<u32>>,
    pub matrix: DMatrix<Complex64>,
}

impl ReducedDensityMatrix {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|z| z.re).sum()
    }

    /// Largest `|ρ_ij − conj(ρ_ji)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }
}

/// `ρ_keep = Tr_rest |ψ⟩⟨ψ|`, Hermitized as `(ρ + ρ†)/2`.
///
/// `max_basis` caps the number of distinct kept-mode tuples.
pub fn reduced_density_matrix(
    state: &FockState,
    keep: &[usize],
    max_basis: usize,
) -> Result<ReducedDensityMatrix> {
    let split = Split::new(state, keep)?;
    let all: Vec<usize> = (0..split.kept_keys.len()).collect();
    let groups: Vec<u64> = split.groups.keys().copied().collect();
    split.block(state, &all, &groups, max_basis)
}

/// The reduced density matrix as its diagonal blocks.
///
/// Two kept-mode tuples share a block when they are linked through a common
/// traced-mode tuple in the support of the state; off-block entries vanish
/// identically. Blocks come in order of their first basis tuple, and
/// `max_basis` caps each block's dimension.
pub fn reduced_density_blocks(
    state: &FockState,
    keep: &[usize],
    max_basis: usize,
) -> Result<Vec<ReducedDensityMatrix>> {
    let split = Split::new(state, keep)?;
    let dim = split.kept_keys.len();
    let mut parent: Vec<usize> = (0..dim).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for col in split.groups.values() {
        for &(a, _) in &col[1..] {
            let (x, y) = (find(&mut parent, col[0].0), find(&mut parent, a));
            parent[x.max(y)] = x.min(y);
        }
    }
    // kept indices and traced groups per root
    let mut members: HashMap<usize, (Vec<usize>, Vec<u64>)> = HashMap::new();
    for i in 0..dim {
        let root = find(&mut parent, i);
        members.entry(root).or_default().0.push(i);
    }
    for (&gk, col) in &split.groups {
        let root = find(&mut parent, col[0].0);
        members.get_mut(&root).expect("root of a kept index").1.push(gk);
    }
    let mut blocks: Vec<(Vec<usize>, Vec<u64>)> = members.into_values().collect();
    blocks.sort_unstable_by_key(|b| b.0[0]);
    blocks.iter().map(|(m, g)| split.block(state, m, g, max_basis)).collect()
}

struct Split {
    kept: Vec<usize>,
    kept_keys: Vec<u64>,
    // traced-mode key -> (kept index, amplitude)
    groups: HashMap<u64, Vec<(usize, Complex64)>>,
}

impl Split {
    fn new(state: &FockState, keep: &[usize]) -> Result<Self> {
        let n = state.n_modes();
        let kept = normalize_selection(keep, n)?;
        if kept.len() == n {
            return Err(Error::ModeSelection("kept set must be a proper subset".into()));
        }
        let traced: Vec<usize> = (0..n).filter(|k| !kept.contains(k)).collect();
        let layout = state.layout();
        let mut kept_keys: Vec<u64> = state.entries().iter().map(|&(k, _)| layout.project(k, &kept)).collect();
        kept_keys.sort_unstable();
        kept_keys.dedup();
        let index: HashMap<u64, usize> = kept_keys.iter().enumerate().map(|(i, &k)| (k, i)).collect();
        let mut groups: HashMap<u64, Vec<(usize, Complex64)>> = HashMap::new();
        for &(key, amp) in state.entries() {
            groups
                .entry(layout.project(key, &traced))
                .or_default()
                .push((index[&layout.project(key, &kept)], amp));
        }
        Ok(Self {
            kept,
            kept_keys,
            groups,
        })
    }

    /// Dense block on the kept indices `members` (ascending), summing the
    /// traced groups `group_keys`.
    fn block(
        &self,
        state: &FockState,
        members: &[usize],
        group_keys: &[u64],
        max_basis: usize,
    ) -> Result<ReducedDensityMatrix> {
        let dim = members.len();
        if dim > max_basis {
            return Err(Error::Capacity {
                size: dim,
                cap: max_basis,
            });
        }
        let local: HashMap<usize, usize> = members.iter().enumerate().map(|(l, &g)| (g, l)).collect();
        let mut group_keys = group_keys.to_vec();
        group_keys.sort_unstable();
        let mut rho = DMatrix::<Complex64>::zeros(dim, dim);
        for gk in group_keys {
            let col = &self.groups[&gk];
            for &(a, x) in col {
                for &(b, y) in col {
                    rho[(local[&a], local[&b])] += x * y.conj();
                }
            }
        }
        let rho = (&rho + rho.adjoint()) * Complex64::new(0.5, 0.0);

        let layout = state.layout();
        let mut basis = vec![Vec::new(); dim];
        for &g in members {
            let key = self.kept_keys[g];
            // unpack the compacted key, last kept mode in the low bits
            let mut rest = key;
            let mut occ = vec![0u32; self.kept.len()];
            for (slot, &m) in self.kept.iter().enumerate().rev() {
                let bits = layout.bits(m);
                occ[slot] = (rest & ((1u64 << bits) - 1)) as u32;
                rest >>= bits;
            }
            basis[local[&g]] = occ;
        }
        Ok(ReducedDensityMatrix {
            kept_modes: self.kept.clone(),
            basis,
            matrix: rho,
        })
    }
}
