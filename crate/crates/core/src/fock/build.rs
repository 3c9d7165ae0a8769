//! Closed-form constructors for the crystal and four-mode squeezed vacuum
//! states and their photon-added or photon-subtracted descendants.
//!
//! Every family is a sum over a principal index (`r + s` for the crystal,
//! `n` for the four-mode state). Shells are generated in log space and
//! accumulated until the next shell carries a negligible share of the norm.

use num_complex::Complex64;

use super::{ln_factorial, ln_ladder_weight, FockState, KeyLayout};
use crate::error::{Error, Result};
use crate::gaussian::{crystal_occupations, CrystalParams};

/// Truncation policy for the principal summation index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncation {
    /// Target bound on the discarded squared-amplitude mass.
    pub eps_tail: f64,
    /// Hard cap on the principal index.
    pub max_principal: usize,
    /// Build exactly the shells `0..=n`, ignoring `eps_tail`.
    pub fixed_principal: Option<usize>,
}

impl Default for Truncation {
    fn default() -> Self {
        Self {
            eps_tail: 1e-10,
            max_principal: 120,
            fixed_principal: None,
        }
    }
}

impl Truncation {
    pub fn with_eps(eps_tail: f64) -> Self {
        Self {
            eps_tail,
            ..Self::default()
        }
    }

    pub fn fixed(principal: usize) -> Self {
        Self {
            fixed_principal: Some(principal),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Term {
    occ: [u32; 4],
    ln_mag: f64,
    phase: f64,
}

// k·ln(base)/2 with 0^0 = 1.
fn ln_sqrt_pow(base: f64, k: u32) -> f64 {
    if k == 0 {
        0.0
    } else if base == 0.0 {
        f64::NEG_INFINITY
    } else {
        0.5 * f64::from(k) * base.ln()
    }
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

fn build_by_shells<F>(n_modes: usize, first_shell: usize, trunc: &Truncation, mut shell: F) -> Result<FockState>
where
    F: FnMut(usize, &mut Vec<Term>),
{
    let last = trunc.fixed_principal.unwrap_or(trunc.max_principal);
    let mut terms: Vec<Term> = Vec::new();
    let mut buf = Vec::new();
    let mut total = f64::NEG_INFINITY;
    let mut prev: Option<f64> = None;
    let mut tail = f64::INFINITY;
    let mut converged = false;

    for k in first_shell..=last {
        buf.clear();
        shell(k, &mut buf);
        buf.retain(|t| t.ln_mag > f64::NEG_INFINITY);
        if buf.is_empty() {
            if !terms.is_empty() {
                // finite support: nothing left beyond this shell
                tail = 0.0;
                converged = true;
                break;
            }
            continue;
        }
        let weight = buf.iter().fold(f64::NEG_INFINITY, |acc, t| log_add_exp(acc, 2.0 * t.ln_mag));
        total = log_add_exp(total, weight);
        terms.extend_from_slice(&buf);
        if let Some(p) = prev {
            let ratio = (weight - p).exp();
            let rel = (weight - total).exp();
            tail = if ratio < 1.0 { rel * ratio / (1.0 - ratio) } else { f64::INFINITY };
            if trunc.fixed_principal.is_none() && rel < trunc.eps_tail * 1e-2 && tail < trunc.eps_tail {
                converged = true;
                break;
            }
        }
        prev = Some(weight);
    }
    if terms.is_empty() {
        return Err(Error::EmptyResult);
    }
    if !converged && trunc.fixed_principal.is_none() && !(tail < trunc.eps_tail) {
        return Err(Error::Truncation {
            achieved: tail,
            requested: trunc.eps_tail,
        });
    }
    if trunc.fixed_principal.is_some() && !tail.is_finite() {
        tail = 1.0;
    }

    let max_ln = terms.iter().map(|t| t.ln_mag).fold(f64::NEG_INFINITY, f64::max);
    let mut cutoffs = vec![0u32; n_modes];
    for t in &terms {
        for (c, &n) in cutoffs.iter_mut().zip(&t.occ[..n_modes]) {
            *c = (*c).max(n);
        }
    }
    let layout = KeyLayout::for_cutoffs(&cutoffs)?;
    let mut entries: Vec<(u64, Complex64)> = terms
        .iter()
        .map(|t| (layout.pack(&t.occ[..n_modes]), Complex64::from_polar((t.ln_mag - max_ln).exp(), t.phase)))
        .collect();
    let entries = super::merge_entries(&mut entries);
    FockState::from_sorted_parts(cutoffs, layout, entries, tail).normalized()
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Ladder {
    Add,
    Subtract,
}

fn crystal_family(p: &CrystalParams, counts: [u32; 3], op: Option<Ladder>, trunc: &Truncation) -> Result<FockState> {
    let occ = crystal_occupations(p)?;
    let x = occ.n2 / (1.0 + occ.n1);
    let y = occ.n3 / (1.0 + occ.n1);
    let [m1, m2, m3] = counts;
    let first = match op {
        Some(Ladder::Subtract) => (m1 as usize).max((m2 + m3) as usize),
        _ => 0,
    };
    build_by_shells(3, first, trunc, |shell, out| {
        let total = shell as u32;
        for r in 0..=total {
            let s = total - r;
            let mut ln_mag = ln_sqrt_pow(x, r)
                + ln_sqrt_pow(y, s)
                + 0.5 * (ln_factorial(total) - ln_factorial(r) - ln_factorial(s));
            let phase = -(f64::from(r) * p.phi2 + f64::from(s) * p.phi3);
            let occ = match op {
                None => [total, r, s, 0],
                Some(Ladder::Add) => {
                    ln_mag += ln_ladder_weight(total, m1, true)
                        + ln_ladder_weight(r, m2, true)
                        + ln_ladder_weight(s, m3, true);
                    [total + m1, r + m2, s + m3, 0]
                }
                Some(Ladder::Subtract) => {
                    if total < m1 || r < m2 || s < m3 {
                        continue;
                    }
                    ln_mag += ln_ladder_weight(total, m1, false)
                        + ln_ladder_weight(r, m2, false)
                        + ln_ladder_weight(s, m3, false);
                    [total - m1, r - m2, s - m3, 0]
                }
            };
            out.push(Term { occ, ln_mag, phase });
        }
    })
}

fn fmsv_family(r: f64, counts: [u32; 4], op: Option<Ladder>, trunc: &Truncation) -> Result<FockState> {
    if !r.is_finite() {
        return Err(Error::InvalidArgument(format!("r must be finite, got {r}")));
    }
    let t = 0.5 * r.tanh();
    let [m1, m2, m3, m4] = counts;
    let first = match op {
        Some(Ladder::Subtract) => (m1 + m3).max(m2 + m4) as usize,
        _ => 0,
    };
    build_by_shells(4, first, trunc, |shell, out| {
        let n = shell as u32;
        let ln_t = ln_sqrt_pow(t.abs(), 2 * n);
        let phase = if t < 0.0 && n % 2 == 1 { std::f64::consts::PI } else { 0.0 };
        for r1 in 0..=n {
            for r2 in 0..=n {
                let base = [n - r1, n - r2, r1, r2];
                let mut ln_mag = ln_t
                    + 0.5 * (2.0 * ln_factorial(n) - ln_factorial(r1) - ln_factorial(n - r1) - ln_factorial(r2) - ln_factorial(n - r2));
                let mut occ = base;
                match op {
                    None => {}
                    Some(Ladder::Add) => {
                        for (k, m) in counts.iter().enumerate() {
                            ln_mag += ln_ladder_weight(base[k], *m, true);
                            occ[k] = base[k] + m;
                        }
                    }
                    Some(Ladder::Subtract) => {
                        if base.iter().zip(&counts).any(|(b, m)| b < m) {
                            continue;
                        }
                        for (k, m) in counts.iter().enumerate() {
                            ln_mag += ln_ladder_weight(base[k], *m, false);
                            occ[k] = base[k] - m;
                        }
                    }
                }
                out.push(Term { occ, ln_mag, phase });
            }
        }
    })
}

/// Crystal state `e^{−iHt}|000⟩` in Fock form.
pub fn build_crystal_fock(p: &CrystalParams, trunc: &Truncation) -> Result<FockState> {
    crystal_family(p, [0; 3], None, trunc)
}

/// Crystal state with `m_i` photons added to mode `i`.
pub fn build_added_crystal(p: &CrystalParams, counts: [u32; 3], trunc: &Truncation) -> Result<FockState> {
    crystal_family(p, counts, Some(Ladder::Add), trunc)
}

/// Crystal state with `m_i` photons subtracted from mode `i`. Only terms
/// with `r + s ≥ m1`, `r ≥ m2`, `s ≥ m3` survive the annihilators.
pub fn build_subtracted_crystal(p: &CrystalParams, counts: [u32; 3], trunc: &Truncation) -> Result<FockState> {
    crystal_family(p, counts, Some(Ladder::Subtract), trunc)
}

/// Four-mode squeezed vacuum in Fock form.
pub fn build_fmsv_fock(r: f64, trunc: &Truncation) -> Result<FockState> {
    fmsv_family(r, [0; 4], None, trunc)
}

/// Four-mode squeezed vacuum with `m_i` photons added to mode `i`.
pub fn build_added_fmsv(r: f64, counts: [u32; 4], trunc: &Truncation) -> Result<FockState> {
    fmsv_family(r, counts, Some(Ladder::Add), trunc)
}

/// Four-mode squeezed vacuum with `m_i` photons subtracted from mode `i`;
/// the principal sum starts at `max(m1 + m3, m2 + m4)`.
pub fn build_subtracted_fmsv(r: f64, counts: [u32; 4], trunc: &Truncation) -> Result<FockState> {
    fmsv_family(r, counts, Some(Ladder::Subtract), trunc)
}
