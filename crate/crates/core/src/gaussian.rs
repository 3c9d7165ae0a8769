//! GGM of pure Gaussian states from the symplectic spectra of their
//! reductions, and the benchmark Gaussian states.
//!
//! For a pure `N`-mode Gaussian state every reduction to `m ≤ ⌊N/2⌋` modes
//! is a Gaussian mixed state whose largest eigenvalue is `∏ 2/(1+2ν_i)`
//! over its symplectic spectrum, so the GGM is one minus the largest such
//! product over all canonical bipartitions.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::partition::{Candidate, GgmResult, ModeBipartition};
use crate::symplectic::{
    max_eigenvalue_from_spectrum, partial_trace_cm, symplectic_eigenvalues, CovarianceMatrix,
};

/// Purity defects above this (or above the spectrum's roundoff floor) are
/// logged.
pub const PURITY_WARN_TOL: f64 = 1e-6;
/// Purity defects above this (or above the roundoff floor) are rejected.
pub const PURITY_FAIL_TOL: f64 = 1e-4;

/// GGM of a pure Gaussian state given by its covariance matrix.
pub fn ggm_gaussian(cm: &CovarianceMatrix) -> Result<GgmResult> {
    let spectrum = symplectic_eigenvalues(cm)?;
    let defect = spectrum.purity_defect();
    // strongly squeezed inputs cannot be resolved below their roundoff floor
    let floor = spectrum.noise_floor();
    if defect > PURITY_FAIL_TOL.max(floor) {
        return Err(Error::Impure(defect));
    }
    if defect > PURITY_WARN_TOL.max(floor) {
        log::warn!("covariance matrix is only approximately pure (defect {defect:e})");
    }
    let candidates = ModeBipartition::enumerate(cm.n_modes())
        .into_par_iter()
        .map(|partition| {
            let reduced = partial_trace_cm(cm, partition.side_a())?;
            let spectrum = symplectic_eigenvalues(&reduced)?;
            Ok(Candidate {
                max_eigenvalue: max_eigenvalue_from_spectrum(&spectrum)?,
                partition,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    GgmResult::from_candidates(candidates)
}

fn check_finite(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be finite, got {x}")))
    }
}

/// Three single-mode squeezed vacua of strength `r` mixed on a tritter.
pub fn tritter_cm(r: f64) -> Result<CovarianceMatrix> {
    check_finite("r", r)?;
    let (c, s) = ((2.0 * r).cosh(), (2.0 * r).sinh());
    let r_plus = c + s / 3.0;
    let r_minus = c - s / 3.0;
    let off = -2.0 / 3.0 * s;
    let mut m = DMatrix::zeros(6, 6);
    for i in 0..3 {
        m[(2 * i, 2 * i)] = r_plus;
        m[(2 * i + 1, 2 * i + 1)] = r_minus;
        for j in 0..3 {
            if i != j {
                m[(2 * i, 2 * j)] = off;
                m[(2 * i + 1, 2 * j + 1)] = -off;
            }
        }
    }
    CovarianceMatrix::new(m * 0.5)
}

/// Four-mode squeezed vacuum with translationally invariant couplings:
/// adjacent modes are two-mode squeezed, alternate modes share photons.
pub fn fmsv_cm(r: f64) -> Result<CovarianceMatrix> {
    check_finite("r", r)?;
    let diag = r.cosh().powi(2);
    let adjacent = 0.5 * (2.0 * r).sinh();
    let alternate = r.sinh().powi(2);
    let mut m = DMatrix::zeros(8, 8);
    for i in 0..4 {
        for j in 0..4 {
            let (qq, pp) = match (i + 4 - j) % 4 {
                0 => (diag, diag),
                2 => (alternate, alternate),
                _ => (adjacent, -adjacent),
            };
            m[(2 * i, 2 * j)] = qq;
            m[(2 * i + 1, 2 * j + 1)] = pp;
        }
    }
    CovarianceMatrix::new(m * 0.5)
}

/// Parameters of the three-mode state generated from vacuum by
/// `H = γ1 a1†a3† + γ2 a2†a3 + h.c.` Couplings enter only through their
/// magnitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrystalParams {
    pub gamma1: f64,
    pub gamma2: f64,
    pub t: f64,
    pub phi2: f64,
    pub phi3: f64,
}

impl CrystalParams {
    pub fn new(gamma1: f64, gamma2: f64, t: f64) -> Self {
        Self {
            gamma1,
            gamma2,
            t,
            phi2: 0.0,
            phi3: 0.0,
        }
    }

    pub fn with_phases(mut self, phi2: f64, phi3: f64) -> Self {
        self.phi2 = phi2;
        self.phi3 = phi3;
        self
    }

    pub fn at(mut self, t: f64) -> Self {
        self.t = t;
        self
    }

    fn check(&self) -> Result<()> {
        for (name, v) in [
            ("gamma1", self.gamma1),
            ("gamma2", self.gamma2),
            ("t", self.t),
            ("phi2", self.phi2),
            ("phi3", self.phi3),
        ] {
            check_finite(name, v)?;
        }
        if self.t < 0.0 {
            return Err(Error::InvalidArgument(format!("t must be >= 0, got {}", self.t)));
        }
        Ok(())
    }
}

/// Mean photon numbers `(n1, n2, n3)` of the crystal state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Occupations {
    pub n1: f64,
    pub n2: f64,
    pub n3: f64,
}

impl Occupations {
    pub fn as_array(&self) -> [f64; 3] {
        [self.n1, self.n2, self.n3]
    }
}

// sin²(√x)/x, continued to x < 0 as sinh²(√−x)/(−x).
fn sin_sq_ratio(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x / 3.0 + 2.0 * x * x / 45.0 - x * x * x / 315.0
    } else if x > 0.0 {
        let u = x.sqrt();
        u.sin().powi(2) / x
    } else {
        let u = (-x).sqrt();
        u.sinh().powi(2) / -x
    }
}

// (1 − cos√x)²/x², continued to x < 0 with cosh.
fn one_minus_cos_sq_ratio(x: f64) -> f64 {
    let half = if x.abs() < 1e-4 {
        0.5 - x / 24.0 + x * x / 720.0 - x * x * x / 40_320.0
    } else if x > 0.0 {
        (1.0 - x.sqrt().cos()) / x
    } else {
        ((-x).sqrt().cosh() - 1.0) / -x
    };
    half * half
}

/// Closed-form occupations with `Ω² = |γ2|² − |γ1|²`. The oscillating
/// (`Ω² > 0`), hyperbolic (`Ω² < 0`) and critical (`Ω = 0`) regimes are
/// all evaluated as real functions of `x = Ω²t²`.
pub fn crystal_occupations(p: &CrystalParams) -> Result<Occupations> {
    p.check()?;
    let g1 = p.gamma1 * p.gamma1;
    let g2 = p.gamma2 * p.gamma2;
    let t2 = p.t * p.t;
    let x = (g2 - g1) * t2;
    let n3 = g1 * t2 * sin_sq_ratio(x);
    let n2 = g1 * g2 * t2 * t2 * one_minus_cos_sq_ratio(x);
    Ok(Occupations {
        n1: n2 + n3,
        n2,
        n3,
    })
}

/// Covariance matrix of the crystal state.
pub fn crystal_cm(p: &CrystalParams) -> Result<CovarianceMatrix> {
    let occ = crystal_occupations(p)?;
    let [n1, n2, n3] = occ.as_array();
    let f = [n1 + 0.5, n2 + 0.5, n3 + 0.5];
    let amp = |n: f64| (n * (1.0 + n1)).sqrt();
    let (a2, b2) = (amp(n2) * p.phi2.cos(), amp(n2) * p.phi2.sin());
    let (a3, b3) = (amp(n3) * p.phi3.cos(), amp(n3) * p.phi3.sin());
    let c = (n2 * n3).sqrt() * (p.phi2 - p.phi3).cos();
    let d = (n2 * n3).sqrt() * (p.phi2 - p.phi3).sin();
    #[rustfmt::skip]
    let rows = [
        f[0], 0.0,  a2,   -b2,  a3,   -b3,
        0.0,  f[0], -b2,  -a2,  -b3,  -a3,
        a2,   -b2,  f[1], 0.0,  c,    d,
        -b2,  -a2,  0.0,  f[1], -d,   c,
        a3,   -b3,  c,    -d,   f[2], 0.0,
        -b3,  -a3,  d,    c,    0.0,  f[2],
    ];
    CovarianceMatrix::new(DMatrix::from_row_slice(6, 6, &rows))
}

/// Sampling interval in which the maximizing reduction changes.
#[derive(Debug, Clone, PartialEq)]
pub struct KinkInterval {
    pub t_lo: f64,
    pub t_hi: f64,
    pub before: ModeBipartition,
    pub after: ModeBipartition,
}

/// Intervals between consecutive samples where the argmax reduction
/// switches. `series` must be sorted by `t`.
pub fn detect_kinks(series: &[(f64, GgmResult)]) -> Result<Vec<KinkInterval>> {
    if series.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "kink detection needs at least 2 samples, got {}",
            series.len()
        )));
    }
    if series.windows(2).any(|w| !(w[0].0 < w[1].0)) {
        return Err(Error::InvalidArgument("series must be strictly increasing in t".into()));
    }
    Ok(series
        .windows(2)
        .filter(|w| w[0].1.argmax_partition != w[1].1.argmax_partition)
        .map(|w| KinkInterval {
            t_lo: w[0].0,
            t_hi: w[1].0,
            before: w[0].1.argmax_partition.clone(),
            after: w[1].1.argmax_partition.clone(),
        })
        .collect())
}

/// A kink located by bisection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefinedKink {
    pub t: f64,
    /// `λ_before − λ_after` at `t`.
    pub gap: f64,
}

/// Bisects `λ_before(t) − λ_after(t)` on the interval until `|gap| < tol`
/// (or the interval collapses). `eval` recomputes the GGM at a given `t`.
pub fn refine_kink<F>(kink: &KinkInterval, tol: f64, mut eval: F) -> Result<RefinedKink>
where
    F: FnMut(f64) -> Result<GgmResult>,
{
    let mut gap_at = |t: f64| -> Result<f64> {
        let r = eval(t)?;
        let lam = |p: &ModeBipartition| {
            r.candidate(p.side_a())
                .map(|c| c.max_eigenvalue)
                .ok_or_else(|| Error::ModeSelection(format!("no candidate {p}")))
        };
        Ok(lam(&kink.before)? - lam(&kink.after)?)
    };
    let (mut lo, mut hi) = (kink.t_lo, kink.t_hi);
    let (g_lo, g_hi) = (gap_at(lo)?, gap_at(hi)?);
    if g_lo.abs() < tol {
        return Ok(RefinedKink { t: lo, gap: g_lo });
    }
    if g_hi.abs() < tol {
        return Ok(RefinedKink { t: hi, gap: g_hi });
    }
    if g_lo.signum() == g_hi.signum() {
        return Err(Error::Numerical(format!(
            "no sign change of the candidate gap on [{lo}, {hi}] ({g_lo:e}, {g_hi:e})"
        )));
    }
    let lo_sign = g_lo.signum();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let g = gap_at(mid)?;
        if g.abs() < tol || mid <= lo || mid >= hi {
            return Ok(RefinedKink { t: mid, gap: g });
        }
        if g.signum() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Numerical("kink bisection did not converge".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::validate_cm;

    fn tritter_closed_form(r: f64) -> f64 {
        let x = (5.0 + 4.0 * (4.0 * r).cosh()).sqrt() / 3.0;
        (x - 1.0) / (x + 1.0)
    }

    fn fmsv_closed_form(r: f64) -> f64 {
        let c = r.cosh();
        let cands = [
            2.0 / (1.0 + c * c),
            2.0 / (1.0 + (2.0 * r).cosh()),
            (2.0 / (1.0 + c)).powi(2),
        ];
        1.0 - cands.iter().copied().fold(f64::MIN, f64::max)
    }

    #[test]
    fn vacuum_has_zero_ggm() {
        for n in 2..6 {
            let g = ggm_gaussian(&CovarianceMatrix::vacuum(n)).unwrap();
            assert!(g.value.abs() < 1e-14);
        }
    }

    #[test]
    fn tritter_zero_squeezing_is_vacuum() {
        assert_eq!(tritter_cm(0.0).unwrap(), CovarianceMatrix::vacuum(3));
    }

    #[test]
    fn tritter_single_mode_nu() {
        let r = 0.5;
        let cm = tritter_cm(r).unwrap();
        let expected = (5.0 + 4.0 * (4.0 * r).cosh()).sqrt() / 6.0;
        for k in 0..3 {
            let nu = symplectic_eigenvalues(&partial_trace_cm(&cm, &[k]).unwrap()).unwrap();
            assert!((nu.values()[0] - expected).abs() < 1e-12);
        }
        assert!((expected - 0.746_264_452).abs() < 1e-9);
        assert_eq!(cm.block(0, 0), cm.block(1, 1));
        assert_eq!(cm.block(1, 1), cm.block(2, 2));
    }

    #[test]
    fn tritter_and_fmsv_closed_forms() {
        for k in 1..=40 {
            let r = 0.05 * k as f64;
            let g = ggm_gaussian(&tritter_cm(r).unwrap()).unwrap();
            assert!((g.value - tritter_closed_form(r)).abs() < 1e-10);
            let g = ggm_gaussian(&fmsv_cm(r).unwrap()).unwrap();
            assert!((g.value - fmsv_closed_form(r)).abs() < 1e-10, "r={r}");
        }
    }

    #[test]
    fn ggm_monotone_in_squeezing() {
        let mut prev = (0.0, 0.0);
        for k in 1..=40 {
            let r = 0.05 * k as f64;
            let a = ggm_gaussian(&tritter_cm(r).unwrap()).unwrap().value;
            let b = ggm_gaussian(&fmsv_cm(r).unwrap()).unwrap().value;
            assert!(a > prev.0 && b > prev.1, "r={r}");
            prev = (a, b);
        }
        assert!(ggm_gaussian(&fmsv_cm(5.0).unwrap()).unwrap().value > 0.99);
        assert!(ggm_gaussian(&fmsv_cm(1e-4).unwrap()).unwrap().value < 1e-7);
    }

    #[test]
    fn strongly_amplified_crystal_stays_within_roundoff() {
        // n1 ≈ 8e5 here; the matrix only fixes ν to about 1e-4
        let p = CrystalParams::new(0.8, 0.5, 12.0);
        let cm = crystal_cm(&p).unwrap();
        let spec = symplectic_eigenvalues(&cm).unwrap();
        assert!(spec.noise_floor() > PURITY_FAIL_TOL);
        assert!(spec.purity_defect() < spec.noise_floor());
        let f = crystal_occupations(&p).unwrap().as_array().map(|n| n + 0.5);
        let want = 1.0 - f.iter().map(|fi| 2.0 / (1.0 + 2.0 * fi)).fold(f64::NEG_INFINITY, f64::max);
        let got = ggm_gaussian(&cm).unwrap().value;
        assert!((got - want).abs() < 1e-9, "{got} vs {want}");
    }

    #[test]
    fn fmsv_reductions_match_closed_blocks() {
        let r = 0.4;
        let cm = fmsv_cm(r).unwrap();
        assert!(validate_cm(&cm).unwrap().valid);
        let single = partial_trace_cm(&cm, &[0]).unwrap();
        let c2 = 0.5 * r.cosh().powi(2);
        assert_eq!(single.block(0, 0), [[c2, 0.0], [0.0, c2]]);
        let adjacent = symplectic_eigenvalues(&partial_trace_cm(&cm, &[0, 1]).unwrap()).unwrap();
        for v in adjacent.values() {
            assert!((v - 0.5 * r.cosh()).abs() < 1e-12);
        }
        let alternate = symplectic_eigenvalues(&partial_trace_cm(&cm, &[0, 2]).unwrap()).unwrap();
        assert!((alternate.values()[0] - 0.5 * (2.0 * r).cosh()).abs() < 1e-12);
        assert!((alternate.values()[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn fmsv_permutation_invariance() {
        let cm = fmsv_cm(0.7).unwrap();
        let base = ggm_gaussian(&cm).unwrap().value;
        for order in [[2, 1, 0, 3], [0, 3, 2, 1], [1, 2, 3, 0], [3, 0, 1, 2]] {
            let g = ggm_gaussian(&cm.permute_modes(&order).unwrap()).unwrap().value;
            assert!((g - base).abs() < 1e-12);
        }
    }

    #[test]
    fn decoupled_vacuum_mode_gives_zero() {
        let inner = fmsv_cm(0.6).unwrap();
        let mut m = DMatrix::identity(10, 10) * 0.5;
        m.view_mut((2, 2), (8, 8)).copy_from(inner.matrix());
        let g = ggm_gaussian(&CovarianceMatrix::new(m).unwrap()).unwrap();
        assert!(g.value.abs() < 1e-12);
        assert_eq!(g.argmax_partition.side_a(), &[0]);
    }

    #[test]
    fn impure_input_rejected() {
        let thermal = CovarianceMatrix::new(DMatrix::identity(4, 4)).unwrap();
        assert!(matches!(ggm_gaussian(&thermal), Err(Error::Impure(_))));
    }

    #[test]
    fn occupations_regimes() {
        let z = crystal_occupations(&CrystalParams::new(0.5, 0.8, 0.0)).unwrap();
        assert_eq!(z.as_array(), [0.0, 0.0, 0.0]);
        // oscillating branch at t = π/Ω
        let (g1, g2) = (0.5f64, 0.8f64);
        let w = (g2 * g2 - g1 * g1).sqrt();
        let o = crystal_occupations(&CrystalParams::new(g1, g2, std::f64::consts::PI / w)).unwrap();
        assert!((o.n2 - 4.0 * g1 * g1 * g2 * g2 / w.powi(4)).abs() < 1e-12);
        assert!(o.n3.abs() < 1e-12);
        // the critical point is continuous from both sides
        let crit = crystal_occupations(&CrystalParams::new(0.6, 0.6, 1.3)).unwrap();
        assert!((crit.n3 - 0.36 * 1.69).abs() < 1e-12);
        assert!((crit.n2 - 0.36 * 0.36 * 1.3f64.powi(4) / 4.0).abs() < 1e-12);
        for eps in [1e-3, 1e-5] {
            let a = crystal_occupations(&CrystalParams::new(0.6, 0.6 + eps, 1.3)).unwrap();
            let b = crystal_occupations(&CrystalParams::new(0.6 + eps, 0.6, 1.3)).unwrap();
            assert!((a.n3 - crit.n3).abs() < 10.0 * eps);
            assert!((b.n2 - crit.n2).abs() < 10.0 * eps);
        }
        for p in [CrystalParams::new(0.8, 0.5, 1.7), CrystalParams::new(0.3, 0.9, 4.0)] {
            let o = crystal_occupations(&p).unwrap();
            assert!((o.n1 - o.n2 - o.n3).abs() < 1e-10);
        }
        assert!(crystal_occupations(&CrystalParams::new(0.5, 0.8, -1.0)).is_err());
    }

    #[test]
    fn crystal_cm_pure_and_matches_single_mode_formula() {
        let p = CrystalParams::new(0.8, 0.5, 1.0).with_phases(0.3, -1.1);
        let cm = crystal_cm(&p).unwrap();
        assert!(validate_cm(&cm).unwrap().valid);
        assert!(symplectic_eigenvalues(&cm).unwrap().purity_defect() < 1e-8);
        let occ = crystal_occupations(&p).unwrap();
        let g = ggm_gaussian(&cm).unwrap();
        let expected = 1.0
            - occ
                .as_array()
                .iter()
                .map(|n| 2.0 / (1.0 + 2.0 * (n + 0.5)))
                .fold(f64::MIN, f64::max);
        assert!((g.value - expected).abs() < 1e-10);
        assert_eq!(crystal_cm(&p.at(0.0)).unwrap(), CovarianceMatrix::vacuum(3));
    }

    #[test]
    fn kinks_empty_for_constant_argmax() {
        let series: Vec<_> = (1..20)
            .map(|k| {
                let r = 0.1 * k as f64;
                (r, ggm_gaussian(&tritter_cm(r).unwrap()).unwrap())
            })
            .collect();
        assert!(detect_kinks(&series).unwrap().is_empty());
        assert!(detect_kinks(&series[..1]).is_err());
    }

    #[test]
    fn crystal_kinks_are_candidate_crossings() {
        let base = CrystalParams::new(0.5, 0.8, 0.0);
        let w = (0.64f64 - 0.25).sqrt();
        let eval = |t: f64| ggm_gaussian(&crystal_cm(&base.at(t))?);
        let series: Vec<_> = (1..200)
            .map(|k| {
                let t = k as f64 * 2.0 * std::f64::consts::PI / w / 200.0;
                (t, eval(t).unwrap())
            })
            .collect();
        let kinks = detect_kinks(&series).unwrap();
        assert!(!kinks.is_empty());
        for k in &kinks {
            let refined = refine_kink(k, 1e-8, eval).unwrap();
            assert!(refined.gap.abs() < 1e-8);
            assert!(refined.t >= k.t_lo && refined.t <= k.t_hi);
        }
    }
}
