use cvtele::linalg::{det_two_mode, direct_sum, rotation, squeeze, Mat2, Mat4};
use cvtele::optimizer::fidelity_bounds;
use cvtele::state::{random_physical_cm, to_standard_form_i, TwoModeCm, PHYSICALITY_TOL};
use cvtele::teleport::{
    apply_local_tgcp, attenuation_map, decompose_minimal_noise, fidelity_coherent, isotropize_noise, noise_matrix,
    swap_pt_spectrum, Mode, TgcpMap,
};
use proptest::prelude::*;

fn euler(phi: f64, s: f64, psi: f64) -> Mat2 {
    rotation(phi) * squeeze(s).unwrap() * rotation(psi)
}

fn local_symplectic() -> impl Strategy<Value = Mat4> {
    let one = (0.0..6.3f64, 0.4..2.5f64, 0.0..6.3f64).prop_map(|(a, s, b)| euler(a, s, b));
    (one.clone(), one).prop_map(|(a, b)| direct_sum(&a, &b))
}

fn rel_close(x: f64, y: f64, tol: f64) -> bool {
    (x - y).abs() <= tol * (1.0 + x.abs().max(y.abs()))
}

/// Random minimal-noise single-mode channel `σ₂ τ σ₁` with noise `σ₂σ₂ᵀ(1 − τ²)`.
fn minimal_noise_channel() -> impl Strategy<Value = (Mat2, Mat2)> {
    let one = (0.0..6.3f64, 0.3..3.0f64, 0.0..6.3f64).prop_map(|(a, s, b)| euler(a, s, b));
    (one.clone(), 0.05..1.0f64, one).prop_map(|(s1, tau, s2)| (s2 * s1 * tau, s2 * s2.transpose() * (1.0 - tau * tau)))
}

fn random_cp_local() -> impl Strategy<Value = TgcpMap> {
    (minimal_noise_channel(), minimal_noise_channel(), 0.0..0.5f64, 0.0..0.5f64).prop_map(
        |((sa, ga), (sb, gb), extra_a, extra_b)| {
            TgcpMap::new(sa, ga + Mat2::identity() * extra_a, sb, gb + Mat2::identity() * extra_b).unwrap()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn invariants_survive_local_symplectics(seed in any::<u64>(), s in local_symplectic()) {
        let v = random_physical_cm(seed, 0.6, 1.5).unwrap();
        let w = v.congruence(&s).unwrap();
        let (i, j) = (v.invariants(), w.invariants());
        prop_assert!(rel_close(i.a, j.a, 1e-9) && rel_close(i.b, j.b, 1e-9));
        prop_assert!(rel_close(i.c, j.c, 1e-9) && rel_close(i.v, j.v, 1e-9));
        prop_assert!(rel_close(v.pt_spectrum().unwrap().nu, w.pt_spectrum().unwrap().nu, 1e-9));
    }

    #[test]
    fn pt_eigenvalues_multiply_to_root_det(seed in any::<u64>()) {
        let v = random_physical_cm(seed, 0.8, 1.5).unwrap();
        let pt = v.pt_spectrum().unwrap();
        let det = det_two_mode(v.matrix());
        prop_assert!(rel_close(pt.nu * pt.mu, det.sqrt(), 1e-9));
        prop_assert!(pt.sigma_pt * pt.sigma_pt >= 4.0 * det * (1.0 - 1e-12));
    }

    #[test]
    fn standard_form_i_is_diagonal(seed in any::<u64>()) {
        let v = random_physical_cm(seed, 0.6, 1.5).unwrap();
        let f = to_standard_form_i(&v).unwrap();
        let m = f.v_n.matrix();
        let scale = 1.0 + f.a.max(f.b);
        for (r, c) in [(0, 1), (2, 3), (0, 3), (1, 2)] {
            prop_assert!(m[(r, c)].abs() < 1e-9 * scale, "entry ({r},{c}) = {}", m[(r, c)]);
        }
        prop_assert!(f.c1 >= f.c2.abs() - 1e-12);
    }

    #[test]
    fn local_channels_never_lower_nu(seed in any::<u64>(), map in random_cp_local()) {
        let v = random_physical_cm(seed, 0.6, 1.2).unwrap();
        let w = apply_local_tgcp(&v, &map).unwrap();
        // only min(ν, 1) is monotone: separable inputs may move toward ν = 1
        let (before, after) = (v.pt_spectrum().unwrap().nu.min(1.0), w.pt_spectrum().unwrap().nu.min(1.0));
        prop_assert!(after >= before * (1.0 - 1e-9), "{before} -> {after}");
    }

    #[test]
    fn isotropization_equalizes_noise(seed in any::<u64>()) {
        let v = random_physical_cm(seed, 0.6, 1.5).unwrap();
        let before = noise_matrix(&v);
        let iso = isotropize_noise(&v).unwrap();
        let after = noise_matrix(&iso.output);
        prop_assert!((after.trace() - 2.0 * after.det().sqrt()).abs() <= 1e-9 * (1.0 + after.trace()));
        prop_assert!(rel_close(after.det(), before.det(), 1e-9));
        prop_assert!(fidelity_coherent(&iso.output).unwrap() >= fidelity_coherent(&v).unwrap() - 1e-12);
    }

    #[test]
    fn minimal_noise_decomposition_round_trip((s, g) in minimal_noise_channel()) {
        let d = decompose_minimal_noise(&s, &g).unwrap();
        let (s2, g2) = d.recompose();
        let scale = 1.0 + s.abs().max() + g.abs().max();
        prop_assert!((s2 - s).abs().max() < 1e-9 * scale);
        prop_assert!((g2 - g).abs().max() < 1e-9 * scale);
        prop_assert!((d.sigma1.determinant() - 1.0).abs() < 1e-9);
        prop_assert!((d.sigma2.determinant() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn attenuations_need_no_outer_symplectic(tau in 0.01..0.999f64) {
        let map = attenuation_map(tau, Mode::A).unwrap();
        let d = decompose_minimal_noise(&map.s_a, &map.g_a).unwrap();
        prop_assert!((d.sigma2 - Mat2::identity()).abs().max() < 1e-12);
        prop_assert!((d.tau - tau).abs() < 1e-12);
    }
}

#[test]
fn thousand_random_states_are_physical() {
    for seed in 0..1000 {
        let v = random_physical_cm(seed, 0.6, 1.5).unwrap();
        let (nu_minus, _) = v.williamson_eigenvalues();
        assert!(nu_minus >= 1.0 - PHYSICALITY_TOL, "seed {seed}: {nu_minus}");
        assert!(TwoModeCm::new(*v.matrix(), 1e-9).is_ok());
    }
}

#[test]
fn swap_approaches_isotropic_noise_from_above() {
    for n_opt in [0.1, 0.3, 0.7] {
        let gaps: Vec<f64> =
            [5.0, 10.0, 15.0].iter().map(|&r| swap_pt_spectrum(n_opt, r).unwrap().nu - n_opt).collect();
        assert!(gaps.iter().all(|&g| g >= 0.0), "{gaps:?}");
        assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
        assert!(gaps[2] < 1e-3);
    }
}

#[test]
fn bounds_strictly_decrease() {
    let grid: Vec<_> = (1..=400).map(|i| fidelity_bounds(i as f64 / 400.0).unwrap()).collect();
    for w in grid.windows(2) {
        assert!(w[1].lower < w[0].lower && w[1].upper < w[0].upper);
    }
}
