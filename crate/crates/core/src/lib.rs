//! Genuine multimode entanglement of continuous-variable pure states.
//!
//! The generalized geometric measure (GGM) of a pure `N`-mode state is one
//! minus the largest Schmidt coefficient over every bipartition of its
//! modes. Two engines compute it:
//!
//! - [`gaussian::ggm_gaussian`] works on covariance matrices. Each reduction
//!   of a pure Gaussian state is a product of thermal modes up to a
//!   symplectic change of frame, so its top eigenvalue is `∏ 2/(1+2ν_i)` over
//!   the symplectic spectrum.
//! - [`canonical::ggm_fock`] works on truncated Fock-space amplitudes and
//!   extracts the top eigenvalue of every reduced density matrix. It handles
//!   the non-Gaussian photon-added and photon-subtracted states built in
//!   [`fock`].
//!
//! [`nongauss`] adds the relative-entropy non-Gaussianity of those states.

#![forbid(unsafe_code)]

pub mod canonical;
pub mod error;
pub mod fock;
pub mod gaussian;
pub mod nongauss;
pub mod partition;
pub mod symplectic;

pub use error::{Error, Result};
pub use partition::{Candidate, GgmResult, ModeBipartition};
