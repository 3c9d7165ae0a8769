use ggmlab_core::canonical::{ggm_fock, ggm_fock_schmidt, schmidt_spectrum};
use ggmlab_core::fock::{read_state, write_state, FockState};
use ggmlab_core::symplectic::{
    partial_trace_cm, symplectic_eigenvalues, symplectic_form, validate_cm, CovarianceMatrix,
};
use ggmlab_core::ModeBipartition;
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

#[derive(Debug, Clone)]
enum Gate {
    Rotate(usize, f64),
    Squeeze(usize, f64),
    Split(usize, usize, f64),
}

fn gate_matrix(g: &Gate, m: usize) -> DMatrix<f64> {
    let mut s = DMatrix::identity(2 * m, 2 * m);
    match *g {
        Gate::Rotate(k, th) => {
            let (c, sn) = (th.cos(), th.sin());
            s[(2 * k, 2 * k)] = c;
            s[(2 * k, 2 * k + 1)] = sn;
            s[(2 * k + 1, 2 * k)] = -sn;
            s[(2 * k + 1, 2 * k + 1)] = c;
        }
        Gate::Squeeze(k, r) => {
            s[(2 * k, 2 * k)] = (-r).exp();
            s[(2 * k + 1, 2 * k + 1)] = r.exp();
        }
        Gate::Split(a, b, th) => {
            let (c, sn) = (th.cos(), th.sin());
            for q in 0..2 {
                let (i, j) = (2 * a + q, 2 * b + q);
                s[(i, i)] = c;
                s[(j, j)] = c;
                s[(i, j)] = sn;
                s[(j, i)] = -sn;
            }
        }
    }
    s
}

fn gate(m: usize) -> impl Strategy<Value = Gate> {
    prop_oneof![
        (0..m, -3.2..3.2f64).prop_map(|(k, t)| Gate::Rotate(k, t)),
        (0..m, -0.8..0.8f64).prop_map(|(k, r)| Gate::Squeeze(k, r)),
        (0..m, 0..m, -3.2..3.2f64).prop_map(|(a, b, t)| if a == b {
            Gate::Rotate(a, t)
        } else {
            Gate::Split(a, b, t)
        }),
    ]
}

#[derive(Debug, Clone)]
struct RandomCm {
    nu: Vec<f64>,
    symplectic: DMatrix<f64>,
    cm: CovarianceMatrix,
}

fn congruence(s: &DMatrix<f64>, m: &DMatrix<f64>) -> CovarianceMatrix {
    let out = s * m * s.transpose();
    CovarianceMatrix::new((&out + out.transpose()) * 0.5).unwrap()
}

fn random_cm() -> impl Strategy<Value = RandomCm> {
    (1usize..=4)
        .prop_flat_map(|m| (prop::collection::vec(0.5..3.0f64, m), prop::collection::vec(gate(m), 0..12)))
        .prop_map(|(nu, gates)| {
            let m = nu.len();
            let s = gates.iter().fold(DMatrix::identity(2 * m, 2 * m), |acc, g| gate_matrix(g, m) * acc);
            let thermal = DMatrix::from_fn(2 * m, 2 * m, |i, j| if i == j { nu[i / 2] } else { 0.0 });
            let cm = congruence(&s, &thermal);
            RandomCm { nu, symplectic: s, cm }
        })
}

fn random_state(n_modes: usize) -> impl Strategy<Value = FockState> {
    prop::collection::vec(
        (prop::collection::vec(0u32..6, n_modes), -1.0..1.0f64, -1.0..1.0f64),
        1..40,
    )
    .prop_filter_map("zero state", move |terms| {
        let amps = terms.into_iter().map(|(occ, re, im)| (occ, Complex64::new(re, im)));
        FockState::from_amplitudes(n_modes, amps, None, 0.0).ok()?.normalized().ok()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn spectrum_recovers_thermal_values(c in random_cm()) {
        let got = symplectic_eigenvalues(&c.cm).unwrap();
        let mut want = c.nu.clone();
        want.sort_by(|a, b| b.total_cmp(a));
        for (g, w) in got.values().iter().zip(&want) {
            prop_assert!((g - w).abs() < 1e-8 * w.max(1.0), "{g} vs {w}");
        }
        prop_assert!(validate_cm(&c.cm).unwrap().valid);
    }

    #[test]
    fn gates_are_symplectic_and_preserve_the_spectrum(c in random_cm(), extra in prop::collection::vec(gate(4), 1..6)) {
        let m = c.cm.n_modes();
        let j = symplectic_form(m);
        let s = &c.symplectic;
        prop_assert!((s * &j * s.transpose() - &j).abs().max() < 1e-9);
        let t = extra
            .iter()
            .filter(|g| match g {
                Gate::Rotate(k, _) | Gate::Squeeze(k, _) => *k < m,
                Gate::Split(a, b, _) => *a < m && *b < m,
            })
            .fold(DMatrix::identity(2 * m, 2 * m), |acc, g| gate_matrix(g, m) * acc);
        let moved = congruence(&t, c.cm.matrix());
        let a = symplectic_eigenvalues(&c.cm).unwrap();
        let b = symplectic_eigenvalues(&moved).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            prop_assert!((x - y).abs() < 1e-8 * x.max(1.0));
        }
    }

    #[test]
    fn determinant_is_product_of_squared_eigenvalues(c in random_cm()) {
        let det = c.cm.matrix().determinant();
        let prod: f64 = c.nu.iter().map(|v| v * v).product();
        prop_assert!((det - prod).abs() < 1e-8 * prod, "{det} vs {prod}");
    }

    #[test]
    fn partial_traces_compose(c in random_cm(), mask in 1u32..16) {
        let m = c.cm.n_modes();
        let keep: Vec<usize> = (0..m).filter(|k| mask & (1 << k) != 0).collect();
        prop_assume!(!keep.is_empty());
        let direct = partial_trace_cm(&c.cm, &keep).unwrap();
        for (a, &i) in keep.iter().enumerate() {
            for (b, &j) in keep.iter().enumerate() {
                prop_assert_eq!(direct.block(a, b), c.cm.block(i, j));
            }
        }
        let inner: Vec<usize> = (0..keep.len()).step_by(2).collect();
        let nested = partial_trace_cm(&direct, &inner).unwrap();
        let outer: Vec<usize> = inner.iter().map(|&k| keep[k]).collect();
        prop_assert_eq!(nested, partial_trace_cm(&c.cm, &outer).unwrap());
        prop_assert!(validate_cm(&direct).unwrap().valid);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn schmidt_and_rdm_engines_agree(s3 in random_state(3), s4 in random_state(4)) {
        for s in [&s3, &s4] {
            let a = ggm_fock(s).unwrap();
            let b = ggm_fock_schmidt(s).unwrap();
            prop_assert!((a.value - b.value).abs() < 1e-8, "{} vs {}", a.value, b.value);
            for split in ModeBipartition::enumerate(s.n_modes()) {
                let sp = schmidt_spectrum(s, &split).unwrap();
                let sum: f64 = sp.iter().sum();
                prop_assert!((sum - 1.0).abs() < 1e-10, "sum {sum}");
                let rdm_top = a.candidate(split.side_a()).unwrap().max_eigenvalue;
                prop_assert!((rdm_top - sp[0]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn state_files_round_trip(s in random_state(3)) {
        let mut buf = Vec::new();
        write_state(&s, &mut buf).unwrap();
        let back = read_state(&buf[..]).unwrap();
        prop_assert_eq!(back.cutoffs(), s.cutoffs());
        prop_assert_eq!(back.tail_bound(), s.tail_bound());
        prop_assert_eq!(back.max_amplitude_diff(&s), 0.0);
        prop_assert_eq!(back.len(), s.len());
    }
}
