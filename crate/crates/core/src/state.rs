//! The two-mode covariance-matrix model: validation, symplectic invariants,
//! partial-transpose spectrum and the local-symplectic normal forms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{
    beam_splitter, block, det_two_mode, direct_sum, from_blocks, max_abs, partial_transpose_cm, rotation, rotation_svd,
    sqrt_spd2, squeeze, symplectic_eigenvalues, two_mode_squeezer, z2, EulerParams, Mat2, Mat4,
};
use crate::scalar::{geometric_grid, scan_roots};

/// Williamson eigenvalues in `[1 − PHYSICALITY_TOL, 1)` are accepted as vacuum.
pub const PHYSICALITY_TOL: f64 = 1e-9;
/// Default asymmetry tolerance for [`make_cm`].
pub const SYMMETRY_TOL: f64 = 1e-9;

/// Covariance matrix of a zero-mean two-mode Gaussian state,
/// `V = [[A, C], [Cᵀ, B]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeCm {
    v: Mat4,
}

/// Validates `V`: finite, symmetric up to `tol` (then symmetrized), positive
/// definite and respecting the uncertainty principle.
pub fn make_cm(entries: &[f64; 16], tol: f64) -> Result<TwoModeCm> {
    TwoModeCm::new(Mat4::from_row_slice(entries), tol)
}

impl TwoModeCm {
    pub fn new(v: Mat4, tol: f64) -> Result<Self> {
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("covariance matrix has non-finite entries".into()));
        }
        let asym = max_abs(&(v - v.transpose()));
        if asym >= tol {
            return Err(Error::InvalidInput(format!("covariance matrix is not symmetric (max asymmetry {asym:.3e})")));
        }
        let v = 0.5 * (v + v.transpose());
        check_physical(&v)?;
        Ok(Self { v })
    }

    pub fn from_blocks(a: &Mat2, b: &Mat2, c: &Mat2, tol: f64) -> Result<Self> {
        Self::new(from_blocks(a, b, c), tol)
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.v
    }

    pub fn a(&self) -> Mat2 {
        block(&self.v, 0, 0)
    }

    pub fn b(&self) -> Mat2 {
        block(&self.v, 1, 1)
    }

    pub fn c(&self) -> Mat2 {
        block(&self.v, 0, 1)
    }

    /// Same state with the two modes relabeled.
    pub fn swapped(&self) -> Self {
        Self { v: from_blocks(&self.b(), &self.a(), &self.c().transpose()) }
    }

    /// `S V Sᵀ`, revalidated.
    pub fn congruence(&self, s: &Mat4) -> Result<Self> {
        let w = s * self.v * s.transpose();
        Self::new(0.5 * (w + w.transpose()), f64::INFINITY)
    }

    /// Williamson eigenvalues `(ν₋, ν₊)`.
    pub fn williamson_eigenvalues(&self) -> (f64, f64) {
        symplectic_eigenvalues(&self.v)
    }

    pub fn invariants(&self) -> ChannelInvariants {
        let det_c = self.c().determinant();
        ChannelInvariants {
            a: self.a().determinant().sqrt(),
            b: self.b().determinant().sqrt(),
            c: det_c.abs().sqrt(),
            sign_det_c: if det_c > 0.0 {
                1
            } else if det_c < 0.0 {
                -1
            } else {
                0
            },
            v: det_two_mode(&self.v),
        }
    }

    pub fn pt_spectrum(&self) -> Result<PtSpectrum> {
        let sigma = self.a().determinant() + self.b().determinant() - 2.0 * self.c().determinant();
        let (nu, mu) = symplectic_eigenvalues(&partial_transpose_cm(&self.v));
        if !(nu > 0.0 && mu.is_finite()) {
            return Err(Error::NumericalFailure(format!("degenerate partial-transpose spectrum ({nu}, {mu})")));
        }
        Ok(PtSpectrum { nu, mu, sigma_pt: sigma })
    }

    /// `max(0, −ln ν)`.
    pub fn log_negativity(&self) -> Result<f64> {
        Ok((-self.pt_spectrum()?.nu.ln()).max(0.0))
    }

    pub fn is_entangled(&self) -> Result<bool> {
        Ok(self.pt_spectrum()?.nu < 1.0)
    }
}

fn check_physical(v: &Mat4) -> Result<()> {
    if v.cholesky().is_none() {
        let min_eigenvalue = v.symmetric_eigenvalues().min();
        return Err(Error::NotPositiveDefinite { min_eigenvalue });
    }
    let (nu_minus, _) = symplectic_eigenvalues(v);
    if nu_minus < 1.0 - PHYSICALITY_TOL {
        return Err(Error::Unphysical { eigenvalue: nu_minus });
    }
    Ok(())
}

/// Two-mode squeezed vacuum: `A = B = I cosh r`, `C = −Z sinh r`.
pub fn two_mode_squeezed(r: f64) -> Result<TwoModeCm> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::InvalidInput(format!("squeezing must be non-negative, got {r}")));
    }
    let i = Mat2::identity();
    TwoModeCm::from_blocks(&(i * r.cosh()), &(i * r.cosh()), &(z2() * -r.sinh()), SYMMETRY_TOL)
}

/// Product of two thermal states with variances `n_a`, `n_b` (each ≥ 1).
pub fn thermal_product(n_a: f64, n_b: f64) -> Result<TwoModeCm> {
    let i = Mat2::identity();
    TwoModeCm::from_blocks(&(i * n_a), &(i * n_b), &Mat2::zeros(), SYMMETRY_TOL)
}

/// Local symplectic invariants used by the optimal-map procedure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelInvariants {
    /// `√det A`
    pub a: f64,
    /// `√det B`
    pub b: f64,
    /// `√|det C|`
    pub c: f64,
    pub sign_det_c: i8,
    /// `det V`
    pub v: f64,
}

impl ChannelInvariants {
    /// Signed `−det C`; equals `c²` for every entangled state.
    pub fn kappa(&self) -> f64 {
        -f64::from(self.sign_det_c) * self.c * self.c
    }

    /// Entries `(n, m, d)` of the `η`-normal form as closed-form functions of
    /// `(λ, η)` and the block determinants. `None` when `d` has no real solution.
    pub fn normal_form_coefficients(&self, lambda: f64, eta: f64) -> Option<(f64, f64, f64)> {
        let n = shifted_root(self.a * self.a, 0.5 * lambda)?;
        let m = shifted_root(self.b * self.b, 0.5 * lambda / (eta * eta))?;
        let d = shifted_root(self.kappa(), 0.5 * lambda / eta)?;
        Some((n, m, d))
    }

    /// `det V_η(λ)` built from [`Self::normal_form_coefficients`].
    pub fn normal_form_det(&self, lambda: f64, eta: f64) -> Option<f64> {
        let (n, m, d) = self.normal_form_coefficients(lambda, eta)?;
        let x = (n + lambda) * (m + lambda / (eta * eta)) - (d + lambda / eta).powi(2);
        Some(x * (n * m - d * d))
    }
}

/// `−h + √(x + h²)` evaluated without cancellation.
fn shifted_root(x: f64, h: f64) -> Option<f64> {
    let rad = x + h * h;
    if rad < 0.0 {
        return None;
    }
    let s = rad.sqrt();
    if h > 0.0 {
        Some(x / (h + s))
    } else {
        Some(s - h)
    }
}

/// Partial-transpose spectrum from the block determinants alone.
///
/// `μ² = (Σ + √(Σ² − 4 det V))/2` with `Σ = det A + det B − 2 det C`, and
/// `ν = √det V / μ`. A radicand below `−1e−12 Σ²` is reported as a failure,
/// smaller negative values are clamped to zero.
pub fn pt_spectrum_from_invariants(det_a: f64, det_b: f64, det_c: f64, det_v: f64) -> Result<PtSpectrum> {
    let sigma = det_a + det_b - 2.0 * det_c;
    let mut radicand = sigma * sigma - 4.0 * det_v;
    if radicand < 0.0 {
        if radicand < -1e-12 * (sigma * sigma).max(1.0) {
            return Err(Error::NumericalFailure(format!(
                "negative radicand {radicand:.3e} in the partial-transpose spectrum"
            )));
        }
        radicand = 0.0;
    }
    let mu = (0.5 * (sigma + radicand.sqrt())).sqrt();
    if !(mu > 0.0) {
        return Err(Error::NumericalFailure("vanishing partial-transpose spectrum".into()));
    }
    Ok(PtSpectrum { nu: det_v.max(0.0).sqrt() / mu, mu, sigma_pt: sigma })
}

/// Lowest (`nu`) and largest (`mu`) symplectic eigenvalues of the partially
/// transposed covariance matrix, and `Σ(V) = det A + det B − 2 det C`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PtSpectrum {
    pub nu: f64,
    pub mu: f64,
    pub sigma_pt: f64,
}

/// Standard form I: `A = a I`, `B = b I`, `C = diag(−c1, c2)` with `c1 ≥ |c2|`.
///
/// `c2 < 0` happens only when `det C > 0`, i.e. for separable states.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardFormI {
    pub v_n: TwoModeCm,
    pub s_a: Mat2,
    pub s_b: Mat2,
    pub a: f64,
    pub b: f64,
    pub c1: f64,
    pub c2: f64,
}

impl StandardFormI {
    pub fn params(&self) -> FormIParams {
        FormIParams { a: self.a, b: self.b, c1: self.c1, c2: self.c2 }
    }

    /// True when the state could not be brought to the all-positive form (`det C > 0`).
    pub fn has_negative_c2(&self) -> bool {
        self.c2 < 0.0
    }
}

/// Brings `V` to standard form I with local symplectics.
pub fn to_standard_form_i(v: &TwoModeCm) -> Result<StandardFormI> {
    let a_blk = v.a();
    let b_blk = v.b();
    let a = a_blk.determinant().sqrt();
    let b = b_blk.determinant().sqrt();
    // S A Sᵀ = √det A · I for S = (det A)^{1/4} A^{-1/2}
    let normalize = |m: &Mat2, root_det: f64| -> Result<Mat2> {
        sqrt_spd2(m)
            .try_inverse()
            .map(|inv| inv * root_det.sqrt())
            .ok_or_else(|| Error::NumericalFailure("singular local block".into()))
    };
    let sa1 = normalize(&a_blk, a)?;
    let sb1 = normalize(&b_blk, b)?;
    let c_prime = sa1 * v.c() * sb1.transpose();
    let scale = max_abs(&c_prime).max(f64::MIN_POSITIVE);
    let already_diagonal = c_prime[(0, 1)].abs() <= 1e-15 * scale
        && c_prime[(1, 0)].abs() <= 1e-15 * scale
        && -c_prime[(0, 0)] >= c_prime[(1, 1)].abs();
    let (s_a, s_b, c1, c2) = if already_diagonal {
        (sa1, sb1, -c_prime[(0, 0)], c_prime[(1, 1)])
    } else {
        let (phi, sx, sy, psi) = rotation_svd(&c_prime);
        // rotation(π) = −I on Alice flips C to diag(−sx, −sy)
        (-(rotation(-phi) * sa1), rotation(psi) * sb1, sx, -sy)
    };
    let v_n = v.congruence(&direct_sum(&s_a, &s_b))?;
    Ok(StandardFormI { v_n, s_a, s_b, a, b, c1, c2 })
}

/// Standard-form-I parameters and the squeeze equations of the `η` normal-form family.
///
/// Local squeezes `diag(√r_a, 1/√r_a) ⊕ diag(√r_b, 1/√r_b)` applied to standard
/// form I give `n₁ − n₂ = a(r_a − 1/r_a)`, `m₁ − m₂ = b(r_b − 1/r_b)` and
/// `d₁ − d₂ = c1 ρ − c2/ρ` with `ρ = √(r_a r_b)`. The `η` family fixes
/// `r_a = r(λ/a)`, `r_b = r(λ/(b η²))` and requires `c1 ρ − c2/ρ = λ/η`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormIParams {
    pub a: f64,
    pub b: f64,
    pub c1: f64,
    pub c2: f64,
}

/// Geometric points per decade used when scanning for λ roots.
pub const ROOT_POINTS_PER_DECADE: usize = 24;

/// Positive solution of `r − 1/r = x`.
pub fn squeeze_ratio(x: f64) -> f64 {
    let s = (1.0 + 0.25 * x * x).sqrt();
    if x >= 0.0 {
        0.5 * x + s
    } else {
        1.0 / (s - 0.5 * x)
    }
}

impl FormIParams {
    pub fn squeeze_ratios(&self, lambda: f64, eta: f64) -> (f64, f64) {
        (squeeze_ratio(lambda / self.a), squeeze_ratio(lambda / (self.b * eta * eta)))
    }

    /// `c1 ρ − c2/ρ − λ/η`; zero exactly at the `η` normal forms.
    pub fn residual(&self, lambda: f64, eta: f64) -> f64 {
        let (ra, rb) = self.squeeze_ratios(lambda, eta);
        let rho = (ra * rb).sqrt();
        self.c1 * rho - self.c2 / rho - lambda / eta
    }

    /// `(n, m, d)` = `(n₂, m₂, d₂)` of the squeezed form at `(λ, η)`.
    pub fn coefficients(&self, lambda: f64, eta: f64) -> (f64, f64, f64) {
        let (ra, rb) = self.squeeze_ratios(lambda, eta);
        (self.a / ra, self.b / rb, self.c2 / (ra * rb).sqrt())
    }

    fn scale(&self) -> f64 {
        self.a + self.b + self.c1.abs()
    }

    /// All real roots λ of [`Self::residual`] at fixed `η`, ascending.
    ///
    /// λ = 0 is a root iff `c1 = c2`; the remaining roots are bracketed on
    /// expanding geometric grids on both sides of the origin.
    pub fn roots(&self, eta: f64) -> Vec<f64> {
        self.roots_with_density(eta, ROOT_POINTS_PER_DECADE)
    }

    pub fn roots_with_density(&self, eta: f64, per_decade: usize) -> Vec<f64> {
        let scale = self.scale();
        let mut roots = Vec::new();
        if (self.c1 - self.c2).abs() <= 1e-13 * scale {
            roots.push(0.0);
        }
        let f = |l: f64| self.residual(l, eta);
        let lo = 1e-9 * scale;
        // beyond |λ| ≫ a the residual is (λ/η)(c1/√(ab) − 1) up to O(1/λ)
        let slope = (1.0 - self.c1.abs() / (self.a * self.b).sqrt()).max(1e-12);
        let mut hi = 1e4 * scale / slope;
        // the residual tends to −∞ (λ → +∞) and +∞ (λ → −∞); widen until both tails agree
        for _ in 0..8 {
            if f(hi) < 0.0 && f(-hi) > 0.0 {
                break;
            }
            hi *= 1e3;
        }
        let decades = (hi / lo).log10();
        let count = ((decades * per_decade as f64).ceil() as usize).max(2);
        let grid = geometric_grid(lo, hi, count);
        let mut pos = scan_roots(&f, &grid, 1e-15);
        let neg_grid: Vec<f64> = grid.iter().rev().map(|x| -x).collect();
        let mut neg = scan_roots(&f, &neg_grid, 1e-15);
        roots.append(&mut neg);
        roots.append(&mut pos);
        roots.sort_by(f64::total_cmp);
        roots
    }
}

/// Standard form III: `n₁ − n₂ = m₁ − m₂ = d₁ − d₂ = λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardFormIII {
    pub n: f64,
    pub m: f64,
    pub d: f64,
    pub lambda: f64,
    pub s_a: Mat2,
    pub s_b: Mat2,
    pub v1: TwoModeCm,
    /// Every root of the squeeze equation; `lambda` is the one on the
    /// `sign(c1 − c2)` side closest to the origin.
    pub roots: Vec<f64>,
}

/// Normal form `V_η`: `n₁ − n₂ = η(d₁ − d₂) = η²(m₁ − m₂) = λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalFormEta {
    pub eta: f64,
    pub n: f64,
    pub m: f64,
    pub d: f64,
    pub lambda: f64,
    pub s_a: Mat2,
    pub s_b: Mat2,
    pub v_eta: TwoModeCm,
    pub roots: Vec<f64>,
}

impl NormalFormEta {
    /// Largest violation of the `V_η` structure (off-diagonal entries and the λ constraints).
    pub fn constraint_residual(&self) -> f64 {
        eta_form_residual(self.v_eta.matrix(), self.eta, self.lambda)
    }
}

/// Largest violation of the `V_η` pattern for a given `(η, λ)`, relative to the matrix scale.
pub fn eta_form_residual(v: &Mat4, eta: f64, lambda: f64) -> f64 {
    let scale = max_abs(v).max(1.0);
    let off = [(0, 1), (0, 3), (1, 2), (2, 3)].iter().map(|&(i, j)| v[(i, j)].abs()).fold(0.0_f64, f64::max);
    let n_gap = v[(0, 0)] - v[(1, 1)];
    let m_gap = v[(2, 2)] - v[(3, 3)];
    let d_gap = -v[(0, 2)] - v[(1, 3)];
    let c = [n_gap - lambda, eta * d_gap - lambda, eta * eta * m_gap - lambda]
        .iter()
        .fold(0.0_f64, |acc, x| acc.max(x.abs()));
    off.max(c) / scale
}

/// Distance of `V` from standard form III (relative to its scale): zero iff
/// the blocks are diagonal with `n₁ − n₂ = m₁ − m₂ = d₁ − d₂`.
pub fn standard_form_iii_residual(v: &TwoModeCm) -> f64 {
    let m = v.matrix();
    eta_form_residual(m, 1.0, m[(0, 0)] - m[(1, 1)])
}

fn primary_root(roots: &[f64], c1: f64, c2: f64) -> Option<f64> {
    if roots.contains(&0.0) {
        return Some(0.0);
    }
    let sign = if c1 >= c2 { 1.0 } else { -1.0 };
    roots.iter().copied().filter(|r| r * sign > 0.0).min_by(|x, y| x.abs().total_cmp(&y.abs()))
}

/// Builds `V_η` from a standard form I and a chosen root `lambda`.
pub fn normal_form_eta_at(
    form: &StandardFormI,
    v: &TwoModeCm,
    eta: f64,
    lambda: f64,
    tol: f64,
) -> Result<NormalFormEta> {
    let p = form.params();
    let (ra, rb) = p.squeeze_ratios(lambda, eta);
    let s_a = squeeze(ra.sqrt())? * form.s_a;
    let s_b = squeeze(rb.sqrt())? * form.s_b;
    let v_eta = v.congruence(&direct_sum(&s_a, &s_b))?;
    let (n, m, d) = p.coefficients(lambda, eta);
    let out = NormalFormEta { eta, n, m, d, lambda, s_a, s_b, v_eta, roots: Vec::new() };
    let res = out.constraint_residual();
    if res > tol {
        return Err(Error::NumericalFailure(format!(
            "normal form at eta={eta}, lambda={lambda} violates its constraints by {res:.3e}"
        )));
    }
    Ok(out)
}

/// Local-symplectic reduction to the `V_η` normal form.
pub fn to_normal_form_eta(v: &TwoModeCm, eta: f64, tol: f64) -> Result<NormalFormEta> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::OutOfDomain(format!("eta must lie in (0, 1], got {eta}")));
    }
    let form = to_standard_form_i(v)?;
    let roots = form.params().roots(eta);
    let lambda = primary_root(&roots, form.c1, form.c2)
        .ok_or_else(|| Error::NumericalFailure("no bracketed root of the normal-form squeeze equation".into()))?;
    let mut out = normal_form_eta_at(&form, v, eta, lambda, tol)?;
    out.roots = roots;
    Ok(out)
}

/// Local-symplectic reduction to standard form III (the `η = 1` member).
pub fn to_standard_form_iii(v: &TwoModeCm, tol: f64) -> Result<StandardFormIII> {
    let f = to_normal_form_eta(v, 1.0, tol)?;
    Ok(StandardFormIII {
        n: f.n,
        m: f.m,
        d: f.d,
        lambda: f.lambda,
        s_a: f.s_a,
        s_b: f.s_b,
        v1: f.v_eta,
        roots: f.roots,
    })
}

pub(crate) fn random_euler<R: Rng>(rng: &mut R, max_log_squeeze: f64) -> Mat2 {
    let tau = std::f64::consts::TAU;
    let params = EulerParams::new(
        rng.gen_range(0.0..tau),
        (rng.gen_range(-max_log_squeeze..=max_log_squeeze) * 0.5).exp(),
        rng.gen_range(0.0..tau),
    );
    params.compose().expect("positive squeeze factor")
}

pub(crate) fn random_local<R: Rng>(rng: &mut R, max_log_squeeze: f64) -> Mat4 {
    let sa = random_euler(rng, max_log_squeeze);
    let sb = random_euler(rng, max_log_squeeze);
    direct_sum(&sa, &sb)
}

/// Seeded random physical state `S · diag(ν₁, ν₁, ν₂, ν₂) · Sᵀ`.
///
/// `ν_i = 1 + purity_mix · X_i` with `X_i` exponential of mean 0.7, so
/// `purity_mix = 0` gives pure states. `S` is local Euler ⊕ Euler, a two-mode
/// squeezer with `r ∈ [0, max_squeeze]`, a beam splitter and another local layer.
pub fn random_physical_cm(seed: u64, purity_mix: f64, max_squeeze: f64) -> Result<TwoModeCm> {
    if !(max_squeeze > 0.0) {
        return Err(Error::InvalidInput(format!("max_squeeze must be positive, got {max_squeeze}")));
    }
    if !(0.0..=1.0).contains(&purity_mix) {
        return Err(Error::InvalidInput(format!("purity_mix must lie in [0, 1], got {purity_mix}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut thermal = || 1.0 + purity_mix * 0.7 * -(1.0 - rng.gen::<f64>()).ln();
    let nu1 = thermal();
    let nu2 = thermal();
    let outer = random_local(&mut rng, max_squeeze);
    let r = rng.gen_range(0.0..=max_squeeze);
    let theta = rng.gen_range(0.0..std::f64::consts::PI);
    let inner = random_local(&mut rng, max_squeeze);
    let s = outer * two_mode_squeezer(r) * beam_splitter(theta) * inner;
    let d = direct_sum(&(Mat2::identity() * nu1), &(Mat2::identity() * nu2));
    let v = s * d * s.transpose();
    TwoModeCm::new(0.5 * (v + v.transpose()), f64::INFINITY)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::Vector4;

    #[test]
    fn identity_is_valid() {
        let cm = make_cm(&Mat4::identity().as_slice().try_into().unwrap(), SYMMETRY_TOL).unwrap();
        assert_eq!(cm.invariants(), ChannelInvariants { a: 1.0, b: 1.0, c: 0.0, sign_det_c: 0, v: 1.0 });
        assert_abs_diff_eq!(cm.pt_spectrum().unwrap().nu, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn sub_vacuum_rejected() {
        let v = Mat4::from_diagonal(&Vector4::new(0.5, 0.5, 1.0, 1.0));
        match TwoModeCm::new(v, SYMMETRY_TOL) {
            Err(Error::Unphysical { eigenvalue }) => assert_abs_diff_eq!(eigenvalue, 0.5, epsilon = 1e-12),
            other => panic!("expected unphysical error, got {other:?}"),
        }
    }

    #[test]
    fn asymmetric_rejected_or_symmetrized() {
        let mut v = Mat4::identity() * 2.0;
        v[(0, 1)] = 1e-3;
        assert!(matches!(TwoModeCm::new(v, 1e-9), Err(Error::InvalidInput(_))));
        v[(0, 1)] = 1e-12;
        let cm = TwoModeCm::new(v, 1e-9).unwrap();
        assert_eq!(cm.matrix()[(0, 1)], cm.matrix()[(1, 0)]);
    }

    #[test]
    fn indefinite_rejected() {
        let v = Mat4::from_diagonal(&Vector4::new(1.0, -2.0, 1.0, 1.0));
        assert!(matches!(TwoModeCm::new(v, 1e-9), Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn tmsv_entries_and_spectrum() {
        let cm = two_mode_squeezed(1.0).unwrap();
        assert_abs_diff_eq!(cm.matrix()[(0, 0)], 1.0_f64.cosh(), epsilon = 1e-15);
        assert_abs_diff_eq!(cm.matrix()[(0, 2)], -1.0_f64.sinh(), epsilon = 1e-15);
        let (lo, hi) = cm.williamson_eigenvalues();
        assert_abs_diff_eq!(lo, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(hi, 1.0, epsilon = 1e-12);
        let sp = two_mode_squeezed(2.0_f64.ln()).unwrap().pt_spectrum().unwrap();
        assert_abs_diff_eq!(sp.nu, 0.5, epsilon = 1e-14);
        assert_eq!(two_mode_squeezed(0.0).unwrap().matrix(), &Mat4::identity());
        assert!(two_mode_squeezed(-0.1).is_err());
    }

    #[test]
    fn tmsv_invariants() {
        let r: f64 = 0.8;
        let inv = two_mode_squeezed(r).unwrap().invariants();
        assert_abs_diff_eq!(inv.a, r.cosh(), epsilon = 1e-14);
        assert_abs_diff_eq!(inv.b, r.cosh(), epsilon = 1e-14);
        assert_abs_diff_eq!(inv.c, r.sinh(), epsilon = 1e-14);
        assert_eq!(inv.sign_det_c, -1);
        assert_abs_diff_eq!(inv.v, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn thermal_is_separable() {
        let sp = thermal_product(3.0, 3.0).unwrap().pt_spectrum().unwrap();
        assert_abs_diff_eq!(sp.nu, 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sp.sigma_pt, 18.0, epsilon = 1e-12);
    }

    #[test]
    fn log_negativity_cases() {
        assert_eq!(TwoModeCm::new(Mat4::identity(), 1e-9).unwrap().log_negativity().unwrap(), 0.0);
        assert_abs_diff_eq!(two_mode_squeezed(0.6).unwrap().log_negativity().unwrap(), 0.6, epsilon = 1e-12);
        assert_eq!(thermal_product(2.0, 2.0).unwrap().log_negativity().unwrap(), 0.0);
    }

    #[test]
    fn form_i_fixed_point_on_tmsv() {
        let r: f64 = 0.7;
        let f = to_standard_form_i(&two_mode_squeezed(r).unwrap()).unwrap();
        assert_abs_diff_eq!(f.a, r.cosh(), epsilon = 1e-12);
        assert_abs_diff_eq!(f.b, r.cosh(), epsilon = 1e-12);
        assert_abs_diff_eq!(f.c1, r.sinh(), epsilon = 1e-12);
        assert_abs_diff_eq!(f.c2, r.sinh(), epsilon = 1e-12);
        assert_abs_diff_eq!(f.s_a, Mat2::identity(), epsilon = 1e-12);
        assert_abs_diff_eq!(f.s_b, Mat2::identity(), epsilon = 1e-12);
    }

    #[test]
    fn form_i_invariant_under_local_rotations() {
        let r: f64 = 0.9;
        let cm = two_mode_squeezed(r).unwrap();
        let rotated = cm.congruence(&direct_sum(&rotation(0.4), &rotation(-1.1))).unwrap();
        let f = to_standard_form_i(&rotated).unwrap();
        assert_abs_diff_eq!(f.c1, r.sinh(), epsilon = 1e-12);
        assert_abs_diff_eq!(f.c2, r.sinh(), epsilon = 1e-12);
        assert_abs_diff_eq!(f.v_n.matrix(), cm.matrix(), epsilon = 1e-12);
    }

    #[test]
    fn form_iii_symmetric_tmsv() {
        let r: f64 = 1.1;
        let f = to_standard_form_iii(&two_mode_squeezed(r).unwrap(), 1e-9).unwrap();
        assert_eq!(f.lambda, 0.0);
        assert_abs_diff_eq!(f.n, r.cosh(), epsilon = 1e-12);
        assert_abs_diff_eq!(f.m, r.cosh(), epsilon = 1e-12);
        assert_abs_diff_eq!(f.d, r.sinh(), epsilon = 1e-12);
    }

    fn form_i_state(a: f64, b: f64, c1: f64, c2: f64) -> TwoModeCm {
        let i = Mat2::identity();
        TwoModeCm::from_blocks(&(i * a), &(i * b), &Mat2::new(-c1, 0.0, 0.0, c2), 1e-12).unwrap()
    }

    #[test]
    fn form_iii_asymmetric_constraints() {
        let cm = form_i_state(2.0, 1.5, 1.2, 0.9);
        let f = to_standard_form_iii(&cm, 1e-9).unwrap();
        assert!(f.lambda > 0.0);
        let v = f.v1.matrix();
        let n_gap = v[(0, 0)] - v[(1, 1)];
        let m_gap = v[(2, 2)] - v[(3, 3)];
        let d_gap = -v[(0, 2)] - v[(1, 3)];
        assert_abs_diff_eq!(n_gap, m_gap, epsilon = 1e-9);
        assert_abs_diff_eq!(n_gap, d_gap, epsilon = 1e-9);
        assert_abs_diff_eq!(n_gap, f.lambda, epsilon = 1e-9);
    }

    #[test]
    fn form_eta_constraints() {
        let cm = form_i_state(2.0, 1.5, 1.2, 0.9);
        let f = to_normal_form_eta(&cm, 0.7, 1e-9).unwrap();
        let v = f.v_eta.matrix();
        let n_gap = v[(0, 0)] - v[(1, 1)];
        let m_gap = v[(2, 2)] - v[(3, 3)];
        let d_gap = -v[(0, 2)] - v[(1, 3)];
        assert_abs_diff_eq!(n_gap, 0.7 * d_gap, epsilon = 1e-9);
        assert_abs_diff_eq!(n_gap, 0.49 * m_gap, epsilon = 1e-9);
        assert!(to_normal_form_eta(&cm, 0.0, 1e-9).is_err());
        assert!(to_normal_form_eta(&cm, 1.2, 1e-9).is_err());
    }

    #[test]
    fn form_eta_endpoint_matches_form_iii() {
        let cm = random_physical_cm(11, 0.5, 1.0).unwrap();
        let a = to_normal_form_eta(&cm, 1.0, 1e-9).unwrap();
        let b = to_standard_form_iii(&cm, 1e-9).unwrap();
        assert_eq!(a.v_eta, b.v1);
        assert_eq!(a.lambda, b.lambda);
    }

    #[test]
    fn symmetric_state_has_zero_root_for_any_eta() {
        let cm = form_i_state(1.8, 1.8, 1.1, 1.1);
        for eta in [0.2, 0.5, 0.9] {
            let f = to_normal_form_eta(&cm, eta, 1e-9).unwrap();
            assert_eq!(f.lambda, 0.0);
            assert!(f.constraint_residual() < 1e-9);
        }
    }

    #[test]
    fn closed_form_det_matches_squeeze_route() {
        // both routes describe the same orbit: det V_η at every squeeze root equals det V
        let cm = form_i_state(2.0, 1.5, 1.2, 0.9);
        let inv = cm.invariants();
        let p = to_standard_form_i(&cm).unwrap().params();
        for eta in [0.3, 0.6, 1.0] {
            for lambda in p.roots(eta) {
                let det = inv.normal_form_det(lambda, eta).unwrap();
                assert_abs_diff_eq!(det / inv.v, 1.0, epsilon = 1e-9);
                let (n, m, d) = inv.normal_form_coefficients(lambda, eta).unwrap();
                let (n2, m2, d2) = p.coefficients(lambda, eta);
                assert_abs_diff_eq!(n, n2, epsilon = 1e-10);
                assert_abs_diff_eq!(m, m2, epsilon = 1e-10);
                assert_abs_diff_eq!(d, d2, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn random_states_deterministic_and_physical() {
        let a = random_physical_cm(42, 0.7, 1.5).unwrap();
        let b = random_physical_cm(42, 0.7, 1.5).unwrap();
        assert_eq!(a.matrix(), b.matrix());
        assert!(random_physical_cm(1, 0.5, 0.0).is_err());
        assert!(random_physical_cm(1, 1.5, 1.0).is_err());
    }
}
