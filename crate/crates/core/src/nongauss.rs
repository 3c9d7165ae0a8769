//! Relative-entropy non-Gaussianity and fractional GGM enhancement.
//!
//! For a pure state `ρ` the closest Gaussian state in relative entropy is the
//! Gaussian `ρ_G` with the same first and second moments, and
//! `δ_NG = S(ρ_G) − S(ρ) = S(ρ_G)`, measured in bits.

use crate::canonical::ggm_fock;
use crate::error::{Error, Result};
use crate::fock::{
    build_added_fmsv, build_subtracted_fmsv, covariance_from_fock, FockState, OpKind, PhotonOpSpec,
    Truncation,
};
use crate::gaussian::{fmsv_cm, ggm_gaussian};
use crate::symplectic::{gaussian_entropy, symplectic_eigenvalues};

/// `(m1, m2)` rows of the reference comparison table.
pub const TABLE_ROWS: [(u32, u32); 6] = [(2, 0), (5, 0), (10, 0), (2, 1), (5, 1), (10, 1)];

/// Non-Gaussianity of a pure state, in bits.
pub fn delta_ng(state: &FockState) -> Result<f64> {
    let moments = covariance_from_fock(state)?;
    if moments.precision_warning() {
        log::warn!(
            "delta_NG precision limited by truncation tail {:e}",
            moments.tail_bound
        );
    }
    gaussian_entropy(&symplectic_eigenvalues(&moments.covariance)?)
}

/// `(ggm − baseline)/baseline`.
pub fn fractional_enhancement(state_ggm: f64, baseline_ggm: f64) -> Result<f64> {
    if !(baseline_ggm > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "fractional enhancement needs a positive baseline GGM, got {baseline_ggm}"
        )));
    }
    Ok((state_ggm - baseline_ggm) / baseline_ggm)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonGaussReport {
    pub delta_ng: f64,
    pub ggm: f64,
    /// `NaN` when the baseline GGM vanishes (`r = 0`).
    pub f_g: f64,
    pub reference_ggm: f64,
    pub spec: PhotonOpSpec,
    pub r: f64,
    pub tail_bound: f64,
}

/// GGM of the Gaussian four-mode squeezed vacuum at `r`.
pub fn fmsv_baseline_ggm(r: f64) -> Result<f64> {
    Ok(ggm_gaussian(&fmsv_cm(r)?)?.value)
}

/// Builds the photon-varied four-mode squeezed vacuum for `spec`.
pub fn photon_varied_fmsv(r: f64, spec: &PhotonOpSpec, trunc: &Truncation) -> Result<FockState> {
    let counts = spec.counts_array::<4>()?;
    match spec.kind {
        OpKind::Add => build_added_fmsv(r, counts, trunc),
        OpKind::Subtract => build_subtracted_fmsv(r, counts, trunc),
    }
}

/// `δ_NG`, GGM and `f_G` of the photon-varied four-mode squeezed vacuum.
pub fn fmsv_report(r: f64, spec: &PhotonOpSpec, trunc: &Truncation) -> Result<NonGaussReport> {
    let state = photon_varied_fmsv(r, spec, trunc)?;
    let ggm = ggm_fock(&state)?.value;
    let reference_ggm = fmsv_baseline_ggm(r)?;
    let f_g = match fractional_enhancement(ggm, reference_ggm) {
        Ok(f) => f,
        Err(_) => {
            log::warn!("baseline GGM is zero at r = {r}; f_G undefined");
            f64::NAN
        }
    };
    Ok(NonGaussReport {
        delta_ng: delta_ng(&state)?,
        ggm,
        f_g,
        reference_ggm,
        spec: spec.clone(),
        r,
        tail_bound: state.tail_bound(),
    })
}
