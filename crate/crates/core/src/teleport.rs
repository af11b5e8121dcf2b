//! Coherent-state teleportation with a shared two-mode Gaussian resource:
//! noise matrix, fidelities and local trace-preserving Gaussian channels.

use crate::error::{Error, Result};
use crate::linalg::{direct_sum, from_blocks, max_abs, sqrt_spd2, z2, Mat2, Mat4};
use crate::state::{pt_spectrum_from_invariants, PtSpectrum, TwoModeCm, SYMMETRY_TOL};

/// Relative tolerance of the complete-positivity and minimal-noise checks.
pub const CP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    A,
    B,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::A => "a",
            Mode::B => "b",
        }
    }

    pub fn other(self) -> Mode {
        match self {
            Mode::A => Mode::B,
            Mode::B => Mode::A,
        }
    }
}

/// Product of single-mode Gaussian channels `V ↦ S V Sᵀ + G`, one per mode.
#[derive(Debug, Clone, PartialEq)]
pub struct TgcpMap {
    pub s_a: Mat2,
    pub g_a: Mat2,
    pub s_b: Mat2,
    pub g_b: Mat2,
}

/// Single-mode complete positivity: `G ≥ 0` and `det G ≥ (1 − det S)²`.
fn single_mode_cp_violation(s: &Mat2, g: &Mat2) -> Option<String> {
    if !(s.iter().chain(g.iter()).all(|x| x.is_finite())) {
        return Some("non-finite entries".into());
    }
    let scale = 1.0 + max_abs(g) + max_abs(s).powi(2);
    if (g[(0, 1)] - g[(1, 0)]).abs() > CP_TOL * scale {
        return Some("noise matrix G is not symmetric".into());
    }
    let min_eig = g.symmetric_eigenvalues().min();
    if min_eig < -CP_TOL * scale {
        return Some(format!("noise matrix G has negative eigenvalue {min_eig:.3e}"));
    }
    let need = (1.0 - s.determinant()).powi(2);
    let have = g.determinant();
    if have < need - CP_TOL * scale * scale {
        return Some(format!("det G = {have:.6e} is below (1 - det S)^2 = {need:.6e}"));
    }
    None
}

impl TgcpMap {
    pub fn identity() -> Self {
        Self::symplectic(Mat2::identity(), Mat2::identity())
    }

    /// Noiseless local map `S_a ⊕ S_b`.
    pub fn symplectic(s_a: Mat2, s_b: Mat2) -> Self {
        Self { s_a, g_a: Mat2::zeros(), s_b, g_b: Mat2::zeros() }
    }

    /// Validating constructor.
    pub fn new(s_a: Mat2, g_a: Mat2, s_b: Mat2, g_b: Mat2) -> Result<Self> {
        let map = Self { s_a, g_a, s_b, g_b };
        map.check_cp()?;
        Ok(map)
    }

    pub fn check_cp(&self) -> Result<()> {
        for (name, s, g) in [("a", &self.s_a, &self.g_a), ("b", &self.s_b, &self.g_b)] {
            if let Some(why) = single_mode_cp_violation(s, g) {
                return Err(Error::InvalidInput(format!("map on mode {name} is not completely positive: {why}")));
            }
        }
        Ok(())
    }

    pub fn is_cp(&self) -> bool {
        self.check_cp().is_ok()
    }

    pub fn s(&self) -> Mat4 {
        direct_sum(&self.s_a, &self.s_b)
    }

    pub fn g(&self) -> Mat4 {
        direct_sum(&self.g_a, &self.g_b)
    }

    /// The map with the two modes relabeled.
    pub fn swapped(&self) -> Self {
        Self { s_a: self.s_b, g_a: self.g_b, s_b: self.s_a, g_b: self.g_a }
    }

    /// Sequential composition: `self` first, then `next`.
    pub fn then(&self, next: &TgcpMap) -> Self {
        Self {
            s_a: next.s_a * self.s_a,
            g_a: next.s_a * self.g_a * next.s_a.transpose() + next.g_a,
            s_b: next.s_b * self.s_b,
            g_b: next.s_b * self.g_b * next.s_b.transpose() + next.g_b,
        }
    }

    pub fn local(&self, mode: Mode) -> (Mat2, Mat2) {
        match mode {
            Mode::A => (self.s_a, self.g_a),
            Mode::B => (self.s_b, self.g_b),
        }
    }
}

/// Excess noise `N = Z A Z + Z C + Cᵀ Z + B` of the teleported coherent state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseMatrix {
    pub n: Mat2,
}

impl NoiseMatrix {
    pub fn trace(&self) -> f64 {
        self.n.trace()
    }

    pub fn det(&self) -> f64 {
        self.n.determinant()
    }

    /// `Tr N − 2√det N ≥ 0`, zero iff `N ∝ I`.
    pub fn anisotropy(&self) -> f64 {
        self.trace() - 2.0 * self.det().max(0.0).sqrt()
    }

    /// Coherent-input fidelity `2/√(4 + 2 Tr N + det N)`.
    pub fn fidelity(&self) -> Result<f64> {
        clamp_fidelity(2.0 / (4.0 + 2.0 * self.trace() + self.det()).sqrt())
    }
}

fn clamp_fidelity(f: f64) -> Result<f64> {
    if !f.is_finite() || f > 1.0 + 1e-9 {
        return Err(Error::NumericalFailure(format!("fidelity {f} outside [0, 1]")));
    }
    Ok(f.clamp(0.0, 1.0))
}

pub fn noise_matrix(v: &TwoModeCm) -> NoiseMatrix {
    let z = z2();
    let c = v.c();
    let n = z * v.a() * z + z * c + c.transpose() * z + v.b();
    NoiseMatrix { n: 0.5 * (n + n.transpose()) }
}

pub fn fidelity_coherent(v: &TwoModeCm) -> Result<f64> {
    noise_matrix(v).fidelity()
}

/// Fidelity for a zero-mean Gaussian input with single-mode covariance `v_in`.
pub fn fidelity_gaussian_input(v: &TwoModeCm, v_in: &Mat2) -> Result<f64> {
    if v_in.iter().any(|x| !x.is_finite()) || (v_in[(0, 1)] - v_in[(1, 0)]).abs() >= SYMMETRY_TOL {
        return Err(Error::InvalidInput("input covariance must be finite and symmetric".into()));
    }
    if v_in[(0, 0)] <= 0.0 || v_in.determinant() < 1.0 - 1e-9 {
        return Err(Error::InvalidInput(format!("input covariance is unphysical (det = {})", v_in.determinant())));
    }
    let m = 2.0 * v_in + noise_matrix(v).n;
    clamp_fidelity(2.0 / m.determinant().sqrt())
}

/// `(S_a ⊕ S_b) V (S_a ⊕ S_b)ᵀ + G_a ⊕ G_b`.
pub fn apply_local_tgcp(v: &TwoModeCm, map: &TgcpMap) -> Result<TwoModeCm> {
    map.check_cp()?;
    let s = map.s();
    let w = s * v.matrix() * s.transpose() + map.g();
    TwoModeCm::new(0.5 * (w + w.transpose()), f64::INFINITY)
}

/// Beam-splitter loss with amplitude transmissivity `tau` on one mode.
pub fn attenuation_map(tau: f64, mode: Mode) -> Result<TgcpMap> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::InvalidInput(format!("transmissivity must lie in [0, 1], got {tau}")));
    }
    let s = Mat2::identity() * tau;
    let g = Mat2::identity() * (1.0 - tau * tau);
    let id = Mat2::identity();
    Ok(match mode {
        Mode::A => TgcpMap { s_a: s, g_a: g, s_b: id, g_b: Mat2::zeros() },
        Mode::B => TgcpMap { s_a: id, g_a: Mat2::zeros(), s_b: s, g_b: g },
    })
}

/// `|det G_k − (1 − det S_k)²| ≤ tol` on both modes.
pub fn is_minimal_noise(map: &TgcpMap, tol: f64) -> bool {
    [(&map.s_a, &map.g_a), (&map.s_b, &map.g_b)]
        .iter()
        .all(|(s, g)| (g.determinant() - (1.0 - s.determinant()).powi(2)).abs() <= tol)
}

/// `S = σ₂ · τ · σ₁`, `G = σ₂ σ₂ᵀ (1 − τ²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimalNoiseDecomposition {
    pub sigma1: Mat2,
    pub tau: f64,
    pub sigma2: Mat2,
}

impl MinimalNoiseDecomposition {
    pub fn recompose(&self) -> (Mat2, Mat2) {
        (self.sigma2 * self.sigma1 * self.tau, self.sigma2 * self.sigma2.transpose() * (1.0 - self.tau * self.tau))
    }
}

/// Splits a minimal-noise single-mode channel into symplectic, attenuation, symplectic.
pub fn decompose_minimal_noise(s: &Mat2, g: &Mat2) -> Result<MinimalNoiseDecomposition> {
    let det_s = s.determinant();
    if !(det_s > 0.0) || det_s > 1.0 + 1e-12 {
        return Err(Error::OutOfDomain(format!("det S must lie in (0, 1], got {det_s}")));
    }
    if let Some(why) = single_mode_cp_violation(s, g) {
        return Err(Error::InvalidInput(why));
    }
    let scale = 1.0 + max_abs(g);
    let excess = g.determinant() - (1.0 - det_s).powi(2);
    if excess.abs() > CP_TOL * scale * scale {
        return Err(Error::InvalidInput(format!(
            "channel is not minimal noise (det G exceeds (1 - det S)^2 by {excess:.3e})"
        )));
    }
    if 1.0 - det_s <= 1e-12 {
        if max_abs(g) > CP_TOL {
            return Err(Error::InvalidInput("symplectic S with non-zero G is not minimal noise".into()));
        }
        return Ok(MinimalNoiseDecomposition { sigma1: *s, tau: 1.0, sigma2: Mat2::identity() });
    }
    let g_sym = 0.5 * (g + g.transpose());
    let mut sigma2 = sqrt_spd2(&(g_sym / (1.0 - det_s)));
    // normalize away the residual of det G = (1 − s)² so σ₂ is exactly symplectic
    sigma2 /= sigma2.determinant().sqrt();
    let tau = det_s.sqrt();
    let inv = sigma2.try_inverse().ok_or_else(|| Error::NumericalFailure("singular noise factor".into()))?;
    Ok(MinimalNoiseDecomposition { sigma1: inv * s / tau, tau, sigma2 })
}

/// Covariance after swapping onto a resource with isotropic noise `2 n_opt I`.
pub fn swap_cm(n_opt: f64, r: f64) -> Result<TwoModeCm> {
    if !(n_opt >= 0.0 && r >= 0.0) || !n_opt.is_finite() || !r.is_finite() {
        return Err(Error::InvalidInput(format!("swap parameters must be non-negative (n_opt = {n_opt}, r = {r})")));
    }
    let i = Mat2::identity();
    TwoModeCm::new(from_blocks(&(i * r.cosh()), &(i * (2.0 * n_opt + r.cosh())), &(z2() * -r.sinh())), SYMMETRY_TOL)
}

/// PT spectrum of [`swap_cm`] from its exact block determinants, usable at
/// squeezing levels where the 4x4 matrix itself is numerically ill-conditioned.
pub fn swap_pt_spectrum(n_opt: f64, r: f64) -> Result<PtSpectrum> {
    if !(n_opt >= 0.0 && r >= 0.0) || !n_opt.is_finite() || !r.is_finite() {
        return Err(Error::InvalidInput(format!("swap parameters must be non-negative (n_opt = {n_opt}, r = {r})")));
    }
    let (ch, sh) = (r.cosh(), r.sinh());
    let b = 2.0 * n_opt + ch;
    pt_spectrum_from_invariants(ch * ch, b * b, -sh * sh, (2.0 * n_opt * ch + 1.0).powi(2))
}

/// Local symplectic pair `S_a = Z S_b Z` turning `N` into `√det N · I`.
#[derive(Debug, Clone, PartialEq)]
pub struct Isotropization {
    pub map: TgcpMap,
    pub output: TwoModeCm,
}

pub fn isotropize_noise(v: &TwoModeCm) -> Result<Isotropization> {
    let n = noise_matrix(v);
    let det = n.det();
    if !(det > 0.0) {
        return Err(Error::NumericalFailure(format!("noise matrix is singular (det N = {det})")));
    }
    let s_b = sqrt_spd2(&n.n).try_inverse().ok_or_else(|| Error::NumericalFailure("singular noise matrix".into()))?
        * det.sqrt().sqrt();
    let z = z2();
    let map = TgcpMap::symplectic(z * s_b * z, s_b);
    let output = apply_local_tgcp(v, &map)?;
    Ok(Isotropization { map, output })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{rotation, squeeze};
    use crate::state::two_mode_squeezed;
    use approx::assert_abs_diff_eq;

    fn vacuum() -> TwoModeCm {
        TwoModeCm::new(Mat4::identity(), SYMMETRY_TOL).unwrap()
    }

    #[test]
    fn noise_of_vacuum_and_tmsv() {
        assert_eq!(noise_matrix(&vacuum()).n, Mat2::identity() * 2.0);
        let r: f64 = 0.9;
        let n = noise_matrix(&two_mode_squeezed(r).unwrap()).n;
        assert_abs_diff_eq!(n, Mat2::identity() * 2.0 * (-r).exp(), epsilon = 1e-14);
    }

    #[test]
    fn coherent_fidelities() {
        assert_abs_diff_eq!(fidelity_coherent(&vacuum()).unwrap(), 0.5, epsilon = 1e-15);
        let r = 2.0_f64.ln();
        assert_abs_diff_eq!(fidelity_coherent(&two_mode_squeezed(r).unwrap()).unwrap(), 2.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn wrong_sign_correlations_fall_below_classical_but_keep_entanglement() {
        let r: f64 = 0.8;
        let good = two_mode_squeezed(r).unwrap();
        let i = Mat2::identity();
        let flipped =
            TwoModeCm::from_blocks(&(i * r.cosh()), &(i * r.cosh()), &(z2() * r.sinh()), SYMMETRY_TOL).unwrap();
        let f = fidelity_coherent(&flipped).unwrap();
        assert_abs_diff_eq!(f, 1.0 / (1.0 + r.exp()), epsilon = 1e-14);
        assert!(f < 0.5);
        assert_abs_diff_eq!(flipped.pt_spectrum().unwrap().nu, good.pt_spectrum().unwrap().nu, epsilon = 1e-12);
    }

    #[test]
    fn gaussian_input_fidelity() {
        assert_abs_diff_eq!(fidelity_gaussian_input(&vacuum(), &Mat2::identity()).unwrap(), 0.5, epsilon = 1e-15);
        let (r, q): (f64, f64) = (0.7, 0.3);
        let v = two_mode_squeezed(r).unwrap();
        let v_in = Mat2::new((2.0 * q).exp(), 0.0, 0.0, (-2.0 * q).exp());
        let expect =
            2.0 / ((2.0 * (2.0 * q).exp() + 2.0 * (-r).exp()) * (2.0 * (-2.0 * q).exp() + 2.0 * (-r).exp())).sqrt();
        assert_abs_diff_eq!(fidelity_gaussian_input(&v, &v_in).unwrap(), expect, epsilon = 1e-14);
        assert_abs_diff_eq!(
            fidelity_gaussian_input(&v, &Mat2::identity()).unwrap(),
            fidelity_coherent(&v).unwrap(),
            epsilon = 1e-15
        );
        assert!(fidelity_gaussian_input(&v, &(Mat2::identity() * 0.5)).is_err());
    }

    #[test]
    fn attenuation_on_tmsv() {
        let (r, tau): (f64, f64) = (0.6, 0.75);
        let out = apply_local_tgcp(&two_mode_squeezed(r).unwrap(), &attenuation_map(tau, Mode::B).unwrap()).unwrap();
        let i = Mat2::identity();
        assert_abs_diff_eq!(out.b(), i * (tau * tau * r.cosh() + 1.0 - tau * tau), epsilon = 1e-14);
        assert_abs_diff_eq!(out.c(), z2() * (-tau * r.sinh()), epsilon = 1e-14);
        assert_abs_diff_eq!(out.a(), i * r.cosh(), epsilon = 1e-14);
    }

    #[test]
    fn attenuation_edges() {
        assert_eq!(attenuation_map(1.0, Mode::A).unwrap(), TgcpMap::identity());
        let full = attenuation_map(0.0, Mode::B).unwrap();
        assert_eq!(full.s_b, Mat2::zeros());
        assert_eq!(full.g_b, Mat2::identity());
        let m = attenuation_map(0.6, Mode::B).unwrap();
        assert_abs_diff_eq!(m.g_b.determinant(), 0.4096, epsilon = 1e-15);
        assert!(is_minimal_noise(&m, 1e-12));
        assert!(attenuation_map(1.1, Mode::A).is_err());
        assert!(attenuation_map(-0.1, Mode::A).is_err());
    }

    #[test]
    fn minimal_noise_predicate() {
        let sq = squeeze(1.7).unwrap();
        assert!(is_minimal_noise(&TgcpMap::symplectic(sq, rotation(0.3)), 1e-12));
        let thermal =
            TgcpMap { s_a: Mat2::identity(), g_a: Mat2::identity(), s_b: Mat2::identity(), g_b: Mat2::zeros() };
        assert!(thermal.is_cp());
        assert!(!is_minimal_noise(&thermal, 1e-9));
    }

    #[test]
    fn cp_violation_rejected() {
        let bad = TgcpMap {
            s_a: Mat2::identity() * 0.5,
            g_a: Mat2::identity() * 0.1,
            s_b: Mat2::identity(),
            g_b: Mat2::zeros(),
        };
        assert!(matches!(apply_local_tgcp(&vacuum(), &bad), Err(Error::InvalidInput(_))));
        assert!(TgcpMap::new(Mat2::identity(), -Mat2::identity(), Mat2::identity(), Mat2::zeros()).is_err());
    }

    #[test]
    fn decomposition_special_cases() {
        let tau = 0.35;
        let d = decompose_minimal_noise(&(Mat2::identity() * tau), &(Mat2::identity() * (1.0 - tau * tau))).unwrap();
        assert_abs_diff_eq!(d.sigma1, Mat2::identity(), epsilon = 1e-14);
        assert_abs_diff_eq!(d.sigma2, Mat2::identity(), epsilon = 1e-14);
        assert_abs_diff_eq!(d.tau, tau, epsilon = 1e-15);

        let s = squeeze(2.0).unwrap() * rotation(0.4);
        let d = decompose_minimal_noise(&s, &Mat2::zeros()).unwrap();
        assert_eq!(d.sigma1, s);
        assert_eq!(d.tau, 1.0);
        assert_eq!(d.sigma2, Mat2::identity());
    }

    #[test]
    fn decomposition_domain_errors() {
        let z = Mat2::zeros();
        assert!(matches!(decompose_minimal_noise(&(Mat2::identity() * 1.2), &z), Err(Error::OutOfDomain(_))));
        assert!(matches!(decompose_minimal_noise(&z2(), &(Mat2::identity() * 4.0)), Err(Error::OutOfDomain(_))));
        assert!(matches!(decompose_minimal_noise(&Mat2::zeros(), &Mat2::identity()), Err(Error::OutOfDomain(_))));
        assert!(matches!(
            decompose_minimal_noise(&(Mat2::identity() * 0.5), &Mat2::identity()),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(decompose_minimal_noise(&Mat2::identity(), &Mat2::identity()), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn noiseless_swap_is_tmsv() {
        assert_eq!(swap_cm(0.0, 1.3).unwrap(), two_mode_squeezed(1.3).unwrap());
        assert!(swap_cm(-0.1, 1.0).is_err());
    }

    #[test]
    fn swap_spectrum_matches_matrix_route() {
        for n in [0.0, 0.1, 0.7] {
            for r in [0.0, 0.5, 2.0, 5.0] {
                let direct = swap_cm(n, r).unwrap().pt_spectrum().unwrap();
                let closed = swap_pt_spectrum(n, r).unwrap();
                assert_abs_diff_eq!(direct.nu, closed.nu, epsilon = 1e-9 * (1.0 + closed.nu));
                assert_abs_diff_eq!(direct.mu / closed.mu, 1.0, epsilon = 1e-12);
            }
        }
        assert_abs_diff_eq!(swap_pt_spectrum(0.0, 3.0).unwrap().nu, (-3.0_f64).exp(), epsilon = 1e-14);
    }

    #[test]
    fn isotropization_on_anisotropic_noise() {
        let v = two_mode_squeezed(0.8).unwrap();
        let skewed = apply_local_tgcp(&v, &TgcpMap::symplectic(Mat2::identity(), squeeze(1.6).unwrap())).unwrap();
        let before = noise_matrix(&skewed);
        assert!(before.anisotropy() > 1e-3);
        let iso = isotropize_noise(&skewed).unwrap();
        let after = noise_matrix(&iso.output);
        assert_abs_diff_eq!(after.anisotropy(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(after.det(), before.det(), epsilon = 1e-12);
        assert!(fidelity_coherent(&iso.output).unwrap() > fidelity_coherent(&skewed).unwrap());
    }
}
