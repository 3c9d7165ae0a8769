//! Covariance-matrix algebra for Gaussian states.
//!
//! Quadratures are ordered `(q1, p1, q2, p2, ..., qm, pm)` with
//! `q = (a + a†)/√2` and `p = (a − a†)/(i√2)`, so the vacuum covariance
//! matrix is `½·I`. This is the only supported convention.
//!
//! Every Gaussian state is symplectically equivalent to a product of
//! thermal states, one per mode, each fixed by its symplectic eigenvalue
//! `ν ≥ ½`. The thermal state with eigenvalue `ν` has Fock-basis spectrum
//! `λ_n = e^{−βn}(1 − e^{−β})` with `β = ln((ν+½)/(ν−½))`, which gives the
//! maximal eigenvalue `2/(1+2ν)` and the entropy `g(ν)` used below.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Symmetry tolerance on `max |Λ_ij − Λ_ji|`.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Eigenvalues in `[½ − SPECTRUM_TOL, ½)` are clamped to `½`; the band widens
/// to [`SymplecticSpectrum::noise_floor`] for ill-conditioned matrices.
pub const SPECTRUM_TOL: f64 = 1e-9;
/// Relative tolerance on the `±ν` pairing of the eigenvalues of `iJΛ`.
pub const PAIRING_TOL: f64 = 1e-9;

const EIGEN_EPS: f64 = 1e-15;
const EIGEN_MAX_ITER: usize = 10_000;

/// Real symmetric `2m × 2m` second-moment matrix of an `m`-mode state.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    matrix: DMatrix<f64>,
}

impl CovarianceMatrix {
    /// Wraps `matrix`, checking that it is square, even-dimensional and
    /// symmetric within [`SYMMETRY_TOL`].
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = matrix.shape();
        if rows != cols {
            return Err(Error::Dimension(format!("non-square {rows}x{cols} matrix")));
        }
        if rows == 0 || rows % 2 != 0 {
            return Err(Error::Dimension(format!("odd or empty dimension {rows}")));
        }
        let mut asym = 0.0f64;
        for i in 0..rows {
            for j in (i + 1)..rows {
                asym = asym.max((matrix[(i, j)] - matrix[(j, i)]).abs());
            }
        }
        if !(asym <= SYMMETRY_TOL) {
            return Err(Error::NotSymmetric(asym));
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("non-finite covariance entry".into()));
        }
        Ok(Self { matrix })
    }

    /// `½·I` on `n_modes` modes.
    pub fn vacuum(n_modes: usize) -> Self {
        Self {
            matrix: DMatrix::identity(2 * n_modes, 2 * n_modes) * 0.5,
        }
    }

    pub fn n_modes(&self) -> usize {
        self.matrix.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    /// 2×2 block coupling modes `i` and `j` (0-based).
    pub fn block(&self, i: usize, j: usize) -> [[f64; 2]; 2] {
        let m = &self.matrix;
        [
            [m[(2 * i, 2 * j)], m[(2 * i, 2 * j + 1)]],
            [m[(2 * i + 1, 2 * j)], m[(2 * i + 1, 2 * j + 1)]],
        ]
    }

    /// Relabels modes: mode `k` of the result is mode `order[k]` of `self`.
    pub fn permute_modes(&self, order: &[usize]) -> Result<Self> {
        let m = self.n_modes();
        let mut seen = vec![false; m];
        if order.len() != m {
            return Err(Error::ModeSelection(format!(
                "permutation of length {} for {m} modes",
                order.len()
            )));
        }
        for &k in order {
            if k >= m || std::mem::replace(&mut seen[k], true) {
                return Err(Error::ModeSelection(format!("{order:?} is not a permutation")));
            }
        }
        let idx: Vec<usize> = order.iter().flat_map(|&k| [2 * k, 2 * k + 1]).collect();
        let matrix = DMatrix::from_fn(2 * m, 2 * m, |a, b| self.matrix[(idx[a], idx[b])]);
        Ok(Self { matrix })
    }
}

/// The symplectic form `J = ⊕ [[0, 1], [−1, 0]]` on `n_modes` modes.
pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        j[(2 * k, 2 * k + 1)] = 1.0;
        j[(2 * k + 1, 2 * k)] = -1.0;
    }
    j
}

/// Outcome of the uncertainty-principle check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidityReport {
    pub valid: bool,
    /// Smallest eigenvalue of the Hermitian matrix `Λ + (i/2)J`.
    pub margin: f64,
}

/// Checks `Λ + (i/2)J ⪰ 0`, the bona fide condition in the vacuum-½
/// convention. Passes iff the margin is at least `−1e-9`.
pub fn validate_cm(cm: &CovarianceMatrix) -> Result<ValidityReport> {
    let n = cm.matrix.nrows();
    let j = symplectic_form(cm.n_modes());
    let h = DMatrix::from_fn(n, n, |a, b| {
        Complex64::new(cm.matrix[(a, b)], 0.5 * j[(a, b)])
    });
    let eig = SymmetricEigen::try_new(h, EIGEN_EPS, EIGEN_MAX_ITER).ok_or_else(|| {
        Error::Numerical(format!(
            "Hermitian eigensolver did not converge within {EIGEN_MAX_ITER} iterations (n = {n})"
        ))
    })?;
    let margin = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(ValidityReport {
        valid: margin >= -SPECTRUM_TOL,
        margin,
    })
}

/// Principal submatrix on the `(q, p)` rows and columns of `keep`
/// (0-based mode indices), in ascending mode order.
pub fn partial_trace_cm(cm: &CovarianceMatrix, keep: &[usize]) -> Result<CovarianceMatrix> {
    let modes = normalize_selection(keep, cm.n_modes())?;
    let idx: Vec<usize> = modes.iter().flat_map(|&k| [2 * k, 2 * k + 1]).collect();
    let d = idx.len();
    let matrix = DMatrix::from_fn(d, d, |a, b| cm.matrix[(idx[a], idx[b])]);
    Ok(CovarianceMatrix { matrix })
}

pub(crate) fn normalize_selection(keep: &[usize], n_modes: usize) -> Result<Vec<usize>> {
    if keep.is_empty() {
        return Err(Error::ModeSelection("empty mode set".into()));
    }
    let mut modes = keep.to_vec();
    modes.sort_unstable();
    modes.dedup();
    if modes.len() != keep.len() {
        return Err(Error::ModeSelection(format!("duplicate modes in {keep:?}")));
    }
    if let Some(&bad) = modes.iter().find(|&&k| k >= n_modes) {
        return Err(Error::ModeSelection(format!(
            "mode {bad} out of range for {n_modes} modes"
        )));
    }
    Ok(modes)
}

/// Williamson spectrum `{ν_i}` of a covariance matrix, sorted descending.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticSpectrum {
    values: Vec<f64>,
    // condition number of the covariance matrix the values came from
    condition: f64,
}

impl SymplecticSpectrum {
    pub fn new(mut values: Vec<f64>) -> Self {
        values.sort_by(|a, b| b.total_cmp(a));
        Self {
            values,
            condition: 1.0,
        }
    }

    /// Roundoff scale of the values. A covariance matrix with condition
    /// number `κ` stored in double precision fixes its symplectic
    /// eigenvalues only to about `κ·ε·ν_max`.
    pub fn noise_floor(&self) -> f64 {
        let top = self.values.first().copied().unwrap_or(0.5).max(0.5);
        16.0 * f64::EPSILON * self.condition * top
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Largest `|ν_i − ½|`, the distance from a pure spectrum.
    pub fn purity_defect(&self) -> f64 {
        self.values.iter().map(|v| (v - 0.5).abs()).fold(0.0, f64::max)
    }

    /// Values clamped to `½` inside the roundoff band; errors below it.
    fn clamped(&self) -> Result<Vec<f64>> {
        self.values
            .iter()
            .map(|&v| {
                if v >= 0.5 {
                    Ok(v)
                } else if v >= 0.5 - SPECTRUM_TOL.max(self.noise_floor()) {
                    Ok(0.5)
                } else {
                    Err(Error::InvalidSpectrum(v))
                }
            })
            .collect()
    }
}

/// Symplectic eigenvalues of `cm`.
///
/// The eigenvalues of `iJΛ` are computed through the similar Hermitian
/// matrix `i·Λ^{½} J Λ^{½}`, whose spectrum is `{±ν_i}`. The two halves are
/// checked against each other before being collapsed.
pub fn symplectic_eigenvalues(cm: &CovarianceMatrix) -> Result<SymplecticSpectrum> {
    let n = cm.matrix.nrows();
    let m = cm.n_modes();
    let sym = SymmetricEigen::try_new(cm.matrix.clone(), EIGEN_EPS, EIGEN_MAX_ITER).ok_or_else(
        || {
            Error::Numerical(format!(
                "symmetric eigensolver did not converge within {EIGEN_MAX_ITER} iterations (n = {n})"
            ))
        },
    )?;
    let min_eig = sym.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min_eig <= 0.0 {
        return Err(Error::Numerical(format!(
            "covariance matrix is not positive definite (min eigenvalue {min_eig:e})"
        )));
    }
    let sqrt_diag = sym.eigenvalues.map(f64::sqrt);
    let root = &sym.eigenvectors * DMatrix::from_diagonal(&sqrt_diag) * sym.eigenvectors.transpose();
    let a = &root * symplectic_form(m) * &root;
    // i·A with A real antisymmetric is Hermitian.
    let h = DMatrix::from_fn(n, n, |r, c| Complex64::new(0.0, a[(r, c)]));
    let eig = SymmetricEigen::try_new(h, EIGEN_EPS, EIGEN_MAX_ITER).ok_or_else(|| {
        Error::Numerical(format!(
            "Hermitian eigensolver on iJΛ did not converge within {EIGEN_MAX_ITER} iterations (n = {n})"
        ))
    })?;
    let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    let (pos, neg) = ev.split_at(m);
    for (k, (&p, &q)) in pos.iter().zip(neg.iter().rev()).enumerate() {
        let scale = p.abs().max(q.abs()).max(f64::MIN_POSITIVE);
        if (p + q).abs() / scale > PAIRING_TOL {
            return Err(Error::Numerical(format!(
                "symplectic pair {k} mismatch: {p} vs {}",
                -q
            )));
        }
    }
    let values = pos
        .iter()
        .zip(neg.iter().rev())
        .map(|(p, q)| 0.5 * (p - q))
        .collect();
    let max_eig = sym.eigenvalues.iter().copied().fold(0.0, f64::max);
    Ok(SymplecticSpectrum {
        condition: max_eig / min_eig,
        ..SymplecticSpectrum::new(values)
    })
}

/// Inverse temperature `β = ln((ν+½)/(ν−½))` of the thermal state with
/// symplectic eigenvalue `ν`; infinite for `ν = ½`.
pub fn inverse_temperature(nu: f64) -> f64 {
    ((nu + 0.5) / (nu - 0.5)).ln()
}

/// Largest eigenvalue of the Gaussian state with the given spectrum,
/// `∏ 2/(1+2ν_i)`.
pub fn max_eigenvalue_from_spectrum(spec: &SymplecticSpectrum) -> Result<f64> {
    Ok(spec
        .clamped()?
        .into_iter()
        .map(|nu| 2.0 / (1.0 + 2.0 * nu))
        .product())
}

/// Entropy in bits of a single thermal mode with symplectic eigenvalue `nu`.
pub fn thermal_entropy_bits(nu: f64) -> f64 {
    if nu <= 0.5 {
        return 0.0;
    }
    let up = nu + 0.5;
    let down = nu - 0.5;
    up * up.log2() - down * down.log2()
}

/// Von Neumann entropy (bits) of the Gaussian state with this spectrum.
pub fn gaussian_entropy(spec: &SymplecticSpectrum) -> Result<f64> {
    Ok(spec.clamped()?.into_iter().map(thermal_entropy_bits).sum())
}
