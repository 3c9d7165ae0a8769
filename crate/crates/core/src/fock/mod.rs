//! Truncated Fock-space representation of multimode pure states.
//!
//! Amplitudes are stored sparsely, keyed by a packed occupation tuple. Each
//! mode gets a fixed bit budget derived from its cutoff, with mode 0 in the
//! most significant bits, so key order is the lexicographic order of the
//! occupation tuples.

mod build;
mod io;
mod moments;
mod ops;
mod rdm;

pub use build::{
    build_added_crystal, build_added_fmsv, build_crystal_fock, build_fmsv_fock,
    build_subtracted_crystal, build_subtracted_fmsv, Truncation,
};
pub use io::{read_state, write_state};
pub use moments::{covariance_from_fock, Moments, PRECISION_WARN_TAIL};
pub use ops::{apply_photon_op, OpKind, PhotonOpSpec};
pub use rdm::{
    max_basis_from_env, reduced_density_blocks, reduced_density_matrix, ReducedDensityMatrix, DEFAULT_MAX_BASIS,
};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Amplitudes with modulus below this are dropped.
pub const ZERO_AMPLITUDE: f64 = 1e-16;

/// Per-mode bit budget for packing occupation tuples into a `u64`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct KeyLayout {
    bits: Vec<u32>,
    shifts: Vec<u32>,
}

impl KeyLayout {
    pub(crate) fn for_cutoffs(cutoffs: &[u32]) -> Result<Self> {
        let bits: Vec<u32> = cutoffs.iter().map(|&c| (32 - c.leading_zeros()).max(1)).collect();
        let total: u32 = bits.iter().sum();
        if total > 64 {
            return Err(Error::Capacity {
                size: total as usize,
                cap: 64,
            });
        }
        let mut shifts = vec![0; bits.len()];
        let mut acc = total;
        for (k, b) in bits.iter().enumerate() {
            acc -= b;
            shifts[k] = acc;
        }
        Ok(Self { bits, shifts })
    }

    pub(crate) fn pack(&self, occ: &[u32]) -> u64 {
        occ.iter()
            .zip(&self.shifts)
            .fold(0u64, |key, (&n, &s)| key | (u64::from(n) << s))
    }

    pub(crate) fn bits(&self, mode: usize) -> u32 {
        self.bits[mode]
    }

    pub(crate) fn get(&self, key: u64, mode: usize) -> u32 {
        ((key >> self.shifts[mode]) & ((1u64 << self.bits[mode]) - 1)) as u32
    }

    pub(crate) fn unpack_into(&self, key: u64, out: &mut [u32]) {
        for (k, o) in out.iter_mut().enumerate() {
            *o = self.get(key, k);
        }
    }

    /// Packs the occupations of `modes` only (same widths, compacted).
    pub(crate) fn project(&self, key: u64, modes: &[usize]) -> u64 {
        modes.iter().fold(0u64, |acc, &m| (acc << self.bits[m]) | u64::from(self.get(key, m)))
    }
}

/// Sparse pure state on `n_modes` bosonic modes.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    cutoffs: Vec<u32>,
    layout: KeyLayout,
    // sorted by key, no duplicates, no entries below ZERO_AMPLITUDE
    entries: Vec<(u64, Complex64)>,
    tail_bound: f64,
}

impl FockState {
    /// Builds a state from `(occupations, amplitude)` pairs. Repeated tuples
    /// are summed. Cutoffs default to the largest occupation seen per mode;
    /// pass `cutoffs` to reserve more room. The result is not normalized.
    pub fn from_amplitudes<I>(
        n_modes: usize,
        amplitudes: I,
        cutoffs: Option<Vec<u32>>,
        tail_bound: f64,
    ) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, Complex64)>,
    {
        if n_modes == 0 {
            return Err(Error::Dimension("state needs at least one mode".into()));
        }
        let raw: Vec<(Vec<u32>, Complex64)> = amplitudes.into_iter().collect();
        let mut maxima = vec![0u32; n_modes];
        for (occ, _) in &raw {
            if occ.len() != n_modes {
                return Err(Error::Dimension(format!(
                    "occupation tuple of length {} for {n_modes} modes",
                    occ.len()
                )));
            }
            for (m, &n) in maxima.iter_mut().zip(occ) {
                *m = (*m).max(n);
            }
        }
        let cutoffs = match cutoffs {
            Some(c) => {
                if c.len() != n_modes || c.iter().zip(&maxima).any(|(c, m)| c < m) {
                    return Err(Error::Dimension(format!(
                        "cutoffs {c:?} do not cover occupations up to {maxima:?}"
                    )));
                }
                c
            }
            None => maxima,
        };
        let layout = KeyLayout::for_cutoffs(&cutoffs)?;
        let mut entries: Vec<(u64, Complex64)> =
            raw.iter().map(|(occ, a)| (layout.pack(occ), *a)).collect();
        Ok(Self::from_sorted_parts(cutoffs, layout, merge_entries(&mut entries), tail_bound))
    }

    pub(crate) fn from_sorted_parts(
        cutoffs: Vec<u32>,
        layout: KeyLayout,
        entries: Vec<(u64, Complex64)>,
        tail_bound: f64,
    ) -> Self {
        Self {
            cutoffs,
            layout,
            entries,
            tail_bound,
        }
    }

    /// `|0…0⟩` on `n_modes` modes.
    pub fn vacuum(n_modes: usize) -> Self {
        Self::from_amplitudes(n_modes, [(vec![0; n_modes], Complex64::new(1.0, 0.0))], None, 0.0)
            .expect("vacuum is representable")
    }

    pub fn n_modes(&self) -> usize {
        self.cutoffs.len()
    }

    /// Per-mode maximal occupation (inclusive).
    pub fn cutoffs(&self) -> &[u32] {
        &self.cutoffs
    }

    /// Upper estimate of the squared-amplitude mass discarded by truncation.
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub(crate) fn layout(&self) -> &KeyLayout {
        &self.layout
    }

    pub(crate) fn entries(&self) -> &[(u64, Complex64)] {
        &self.entries
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries.iter().map(|(_, a)| a.norm_sqr()).sum()
    }

    /// Scales to unit norm and drops amplitudes that fall below
    /// [`ZERO_AMPLITUDE`].
    pub fn normalize(&mut self) -> Result<()> {
        let norm = self.norm_sqr().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::EmptyResult);
        }
        for (_, a) in &mut self.entries {
            *a /= norm;
        }
        self.entries.retain(|(_, a)| a.norm() >= ZERO_AMPLITUDE);
        Ok(())
    }

    pub fn normalized(mut self) -> Result<Self> {
        self.normalize()?;
        Ok(self)
    }

    /// Amplitude of an occupation tuple (zero when absent or out of range).
    pub fn amplitude(&self, occ: &[u32]) -> Complex64 {
        if occ.len() != self.n_modes() || occ.iter().zip(&self.cutoffs).any(|(n, c)| n > c) {
            return Complex64::new(0.0, 0.0);
        }
        self.lookup(self.layout.pack(occ))
    }

    pub(crate) fn lookup(&self, key: u64) -> Complex64 {
        self.entries
            .binary_search_by_key(&key, |(k, _)| *k)
            .map(|i| self.entries[i].1)
            .unwrap_or_default()
    }

    /// Iterates `(occupations, amplitude)` in lexicographic tuple order.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<u32>, Complex64)> + '_ {
        self.entries.iter().map(move |&(key, a)| {
            let mut occ = vec![0; self.n_modes()];
            self.layout.unpack_into(key, &mut occ);
            (occ, a)
        })
    }

    /// Largest amplitude difference against `other` over the union of
    /// supports.
    pub fn max_amplitude_diff(&self, other: &FockState) -> f64 {
        if self.n_modes() != other.n_modes() {
            return f64::INFINITY;
        }
        let a = self.iter().map(|(occ, x)| (x - other.amplitude(&occ)).norm());
        let b = other.iter().map(|(occ, y)| (y - self.amplitude(&occ)).norm());
        a.chain(b).fold(0.0, f64::max)
    }
}

fn merge_entries(entries: &mut [(u64, Complex64)]) -> Vec<(u64, Complex64)> {
    entries.sort_by_key(|(k, _)| *k);
    let mut out: Vec<(u64, Complex64)> = Vec::with_capacity(entries.len());
    for &(k, a) in entries.iter() {
        match out.last_mut() {
            Some((lk, la)) if *lk == k => *la += a,
            _ => out.push((k, a)),
        }
    }
    out.retain(|(_, a)| a.norm() >= ZERO_AMPLITUDE);
    out
}

/// `ln n!` from a lazily built table.
pub(crate) fn ln_factorial(n: u32) -> f64 {
    use std::sync::OnceLock;
    const TABLE: usize = 4096;
    static LN_FACT: OnceLock<Vec<f64>> = OnceLock::new();
    let table = LN_FACT.get_or_init(|| {
        let mut t = Vec::with_capacity(TABLE);
        let mut acc = 0.0f64;
        t.push(0.0);
        for k in 1..TABLE {
            acc += (k as f64).ln();
            t.push(acc);
        }
        t
    });
    let n = n as usize;
    if n < TABLE {
        return table[n];
    }
    (TABLE..=n).fold(table[TABLE - 1], |acc, k| acc + (k as f64).ln())
}

/// `ln √(n!/(n−m)!)` for a lowering power, `ln √((n+m)!/n!)` for raising.
pub(crate) fn ln_ladder_weight(n: u32, m: u32, raise: bool) -> f64 {
    if raise {
        0.5 * (ln_factorial(n + m) - ln_factorial(n))
    } else {
        debug_assert!(n >= m);
        0.5 * (ln_factorial(n) - ln_factorial(n - m))
    }
}
