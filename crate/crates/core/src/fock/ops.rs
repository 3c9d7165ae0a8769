use num_complex::Complex64;

use super::{ln_ladder_weight, FockState, KeyLayout};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpKind {
    Add,
    Subtract,
}

/// `∏ (a_i†)^{m_i}` or `∏ a_i^{m_i}` followed by renormalization.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PhotonOpSpec {
    pub kind: OpKind,
    pub counts: Vec<u32>,
}

impl PhotonOpSpec {
    pub fn add(counts: &[u32]) -> Self {
        Self {
            kind: OpKind::Add,
            counts: counts.to_vec(),
        }
    }

    pub fn subtract(counts: &[u32]) -> Self {
        Self {
            kind: OpKind::Subtract,
            counts: counts.to_vec(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.counts.iter().all(|&m| m == 0)
    }

    /// Counts padded with zeros to a fixed width.
    pub fn counts_array<const N: usize>(&self) -> Result<[u32; N]> {
        if self.counts.len() > N {
            return Err(Error::InvalidArgument(format!(
                "{} photon counts for a {N}-mode state",
                self.counts.len()
            )));
        }
        let mut out = [0; N];
        out[..self.counts.len()].copy_from_slice(&self.counts);
        Ok(out)
    }
}

/// Applies the ladder powers in `spec` to `state` and renormalizes.
///
/// For additions the cutoffs grow by `m_i`. The discarded tail is scaled by
/// the ladder weight at the first occupation beyond each cutoff, and the
/// result is rejected when that estimate exceeds `eps_tail`.
pub fn apply_photon_op(state: &FockState, spec: &PhotonOpSpec, eps_tail: f64) -> Result<FockState> {
    let n = state.n_modes();
    if spec.counts.len() != n {
        return Err(Error::InvalidArgument(format!(
            "{} photon counts for a {n}-mode state",
            spec.counts.len()
        )));
    }
    if spec.is_identity() {
        return Ok(state.clone());
    }
    let raise = spec.kind == OpKind::Add;
    let cutoffs: Vec<u32> = match spec.kind {
        OpKind::Add => state.cutoffs().iter().zip(&spec.counts).map(|(c, m)| c + m).collect(),
        OpKind::Subtract => state.cutoffs().to_vec(),
    };
    let layout = KeyLayout::for_cutoffs(&cutoffs)?;
    let mut occ = vec![0u32; n];
    let mut entries: Vec<(u64, Complex64)> = Vec::with_capacity(state.len());
    for &(key, amp) in state.entries() {
        state.layout().unpack_into(key, &mut occ);
        if !raise && occ.iter().zip(&spec.counts).any(|(o, m)| o < m) {
            continue;
        }
        let mut ln_w = 0.0;
        for (o, &m) in occ.iter_mut().zip(&spec.counts) {
            ln_w += ln_ladder_weight(*o, m, raise);
            if raise {
                *o += m;
            } else {
                *o -= m;
            }
        }
        entries.push((layout.pack(&occ), amp * ln_w.exp()));
    }
    if entries.is_empty() {
        return Err(Error::EmptyResult);
    }
    let norm_sqr: f64 = entries.iter().map(|(_, a)| a.norm_sqr()).sum();
    if !(norm_sqr > 0.0) || !norm_sqr.is_finite() {
        return Err(Error::EmptyResult);
    }
    // squared ladder weight at the first discarded level of each mode
    let edge_growth: f64 = state
        .cutoffs()
        .iter()
        .zip(&spec.counts)
        .map(|(&c, &m)| (2.0 * ln_ladder_weight(c + 1, m, raise).max(0.0)).exp())
        .product();
    let tail = state.tail_bound() * edge_growth / norm_sqr;
    if tail > eps_tail {
        return Err(Error::Truncation {
            achieved: tail,
            requested: eps_tail,
        });
    }
    let entries = super::merge_entries(&mut entries);
    FockState::from_sorted_parts(cutoffs, layout, entries, tail).normalized()
}
