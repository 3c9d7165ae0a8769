use nalgebra::DMatrix;
use num_complex::Complex64;

use super::FockState;
use crate::error::Result;
use crate::symplectic::CovarianceMatrix;

/// Tail bounds above this are reported as a precision warning.
pub const PRECISION_WARN_TAIL: f64 = 1e-8;

/// First and second moments of a Fock state.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    /// `(⟨q1⟩, ⟨p1⟩, …, ⟨qm⟩, ⟨pm⟩)`.
    pub displacement: Vec<f64>,
    pub covariance: CovarianceMatrix,
    /// Tail bound of the source state; second moments are only as good as
    /// the truncation.
    pub tail_bound: f64,
}

impl Moments {
    pub fn precision_warning(&self) -> bool {
        self.tail_bound > PRECISION_WARN_TAIL
    }
}

#[derive(Clone, Copy)]
enum Ladder {
    Lower(usize),
    Raise(usize),
}

// ⟨ψ| O |ψ⟩ where O is the product of `ops`, applied right to left.
fn expect(state: &FockState, ops: &[Ladder]) -> Complex64 {
    let layout = state.layout();
    let cutoffs = state.cutoffs();
    let mut occ = vec![0u32; state.n_modes()];
    let mut acc = Complex64::new(0.0, 0.0);
    'entries: for &(key, amp) in state.entries() {
        layout.unpack_into(key, &mut occ);
        let mut coef = 1.0f64;
        for op in ops.iter().rev() {
            match *op {
                Ladder::Lower(k) => {
                    if occ[k] == 0 {
                        continue 'entries;
                    }
                    coef *= f64::from(occ[k]).sqrt();
                    occ[k] -= 1;
                }
                Ladder::Raise(k) => {
                    if occ[k] >= cutoffs[k] {
                        continue 'entries;
                    }
                    occ[k] += 1;
                    coef *= f64::from(occ[k]).sqrt();
                }
            }
        }
        acc += state.lookup(layout.pack(&occ)).conj() * amp * coef;
    }
    acc
}

/// Displacement and covariance matrix from ladder moments `⟨a_i⟩`,
/// `⟨a_i†a_j⟩`, `⟨a_i a_j⟩`.
pub fn covariance_from_fock(state: &FockState) -> Result<Moments> {
    let m = state.n_modes();
    let mean: Vec<Complex64> = (0..m).map(|i| expect(state, &[Ladder::Lower(i)])).collect();
    let mut number = vec![vec![Complex64::default(); m]; m];
    let mut pair = vec![vec![Complex64::default(); m]; m];
    for i in 0..m {
        for j in i..m {
            number[i][j] = expect(state, &[Ladder::Raise(i), Ladder::Lower(j)]);
            number[j][i] = number[i][j].conj();
            pair[i][j] = expect(state, &[Ladder::Lower(i), Ladder::Lower(j)]);
            pair[j][i] = pair[i][j];
        }
    }
    let sqrt2 = std::f64::consts::SQRT_2;
    let displacement: Vec<f64> = mean.iter().flat_map(|a| [sqrt2 * a.re, sqrt2 * a.im]).collect();

    let mut cov = DMatrix::zeros(2 * m, 2 * m);
    for i in 0..m {
        for j in 0..m {
            let a = pair[i][j];
            let n = number[i][j];
            let delta = if i == j { 0.5 } else { 0.0 };
            cov[(2 * i, 2 * j)] = a.re + n.re + delta;
            cov[(2 * i + 1, 2 * j + 1)] = -a.re + n.re + delta;
            cov[(2 * i, 2 * j + 1)] = a.im + n.im;
            cov[(2 * i + 1, 2 * j)] = a.im - n.im;
        }
    }
    for a in 0..2 * m {
        for b in 0..2 * m {
            cov[(a, b)] -= displacement[a] * displacement[b];
        }
    }
    // remove roundoff asymmetry
    let cov = (&cov + cov.transpose()) * 0.5;
    let tail = state.tail_bound();
    if tail > PRECISION_WARN_TAIL {
        log::warn!("truncation tail {tail:e} limits covariance precision");
    }
    Ok(Moments {
        displacement,
        covariance: CovarianceMatrix::new(cov)?,
        tail_bound: tail,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vacuum_moments() {
        let m = covariance_from_fock(&FockState::vacuum(3)).unwrap();
        assert!(m.displacement.iter().all(|&d| d == 0.0));
        assert_eq!(m.covariance, CovarianceMatrix::vacuum(3));
    }

    #[test]
    fn coherent_like_superposition() {
        // (|0⟩ + |1⟩)/√2: ⟨a⟩ = ½, ⟨a†a⟩ = ½, ⟨a²⟩ = 0
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let s = FockState::from_amplitudes(
            1,
            [(vec![0], Complex64::new(h, 0.0)), (vec![1], Complex64::new(h, 0.0))],
            None,
            0.0,
        )
        .unwrap();
        let m = covariance_from_fock(&s).unwrap();
        let q = std::f64::consts::SQRT_2 * 0.5;
        assert!((m.displacement[0] - q).abs() < 1e-15);
        assert!(m.displacement[1].abs() < 1e-15);
        // ⟨q²⟩ = ⟨a†a⟩ + ½ = 1 ; var = 1 − ½
        assert!((m.covariance.matrix()[(0, 0)] - 0.5).abs() < 1e-15);
        assert!((m.covariance.matrix()[(1, 1)] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn single_photon_is_isotropic() {
        let s = FockState::from_amplitudes(1, [(vec![1], Complex64::new(1.0, 0.0))], None, 0.0).unwrap();
        let m = covariance_from_fock(&s).unwrap();
        assert!((m.covariance.matrix()[(0, 0)] - 1.5).abs() < 1e-15);
        assert!((m.covariance.matrix()[(1, 1)] - 1.5).abs() < 1e-15);
        assert_eq!(m.covariance.matrix()[(0, 1)], 0.0);
    }
}
