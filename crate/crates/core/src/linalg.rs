//! Fixed-size 2x2 / 4x4 phase-space algebra.
//!
//! Quadratures are ordered `(x_a, p_a, x_b, p_b)` and covariance matrices use
//! the vacuum-variance-1 convention, so a coherent state has covariance `I`.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Matrix4, SymmetricEigen, Vector4};

use crate::error::{Error, Result};

pub type Mat2 = Matrix2<f64>;
pub type Mat4 = Matrix4<f64>;

/// Default residual tolerance for matrices this module constructs.
pub const CONSTRUCTION_TOL: f64 = 1e-10;
/// Default tolerance for user-facing symplecticity / diagonality checks.
pub const CHECK_TOL: f64 = 1e-9;

/// Single-mode symplectic form `J = [[0, 1], [-1, 0]]`.
pub fn j2() -> Mat2 {
    Mat2::new(0.0, 1.0, -1.0, 0.0)
}

/// `Z = diag(1, -1)`.
pub fn z2() -> Mat2 {
    Mat2::new(1.0, 0.0, 0.0, -1.0)
}

/// Two-mode symplectic form `J ⊕ J`.
pub fn j4() -> Mat4 {
    direct_sum(&j2(), &j2())
}

/// Partial-transpose conjugator `Z ⊕ I = diag(1, -1, 1, 1)`.
pub fn pt_conjugator() -> Mat4 {
    Mat4::from_diagonal(&Vector4::new(1.0, -1.0, 1.0, 1.0))
}

pub fn direct_sum(a: &Mat2, b: &Mat2) -> Mat4 {
    let mut m = Mat4::zeros();
    m.fixed_view_mut::<2, 2>(0, 0).copy_from(a);
    m.fixed_view_mut::<2, 2>(2, 2).copy_from(b);
    m
}

/// Assembles `[[A, C], [Cᵀ, B]]`.
pub fn from_blocks(a: &Mat2, b: &Mat2, c: &Mat2) -> Mat4 {
    let mut m = Mat4::zeros();
    m.fixed_view_mut::<2, 2>(0, 0).copy_from(a);
    m.fixed_view_mut::<2, 2>(0, 2).copy_from(c);
    m.fixed_view_mut::<2, 2>(2, 0).copy_from(&c.transpose());
    m.fixed_view_mut::<2, 2>(2, 2).copy_from(b);
    m
}

/// The 2x2 block at block-row `row`, block-column `col` (each 0 or 1).
pub fn block(m: &Mat4, row: usize, col: usize) -> Mat2 {
    m.fixed_view::<2, 2>(2 * row, 2 * col).into_owned()
}

pub fn max_abs<const R: usize, const C: usize>(m: &nalgebra::SMatrix<f64, R, C>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

fn all_finite<const R: usize, const C: usize>(m: &nalgebra::SMatrix<f64, R, C>) -> bool {
    m.iter().all(|x| x.is_finite())
}

/// Matrices with a phase-space symplectic form: `Mat2` (one mode) and `Mat4` (two modes).
pub trait PhaseSpaceMatrix: Sized {
    fn symplectic_form() -> Self;
    /// `‖S Ω Sᵀ − Ω‖_max`.
    fn symplectic_residual(&self) -> f64;
    fn is_finite(&self) -> bool;
}

impl PhaseSpaceMatrix for Mat2 {
    fn symplectic_form() -> Self {
        j2()
    }
    fn symplectic_residual(&self) -> f64 {
        max_abs(&(self * j2() * self.transpose() - j2()))
    }
    fn is_finite(&self) -> bool {
        all_finite(self)
    }
}

impl PhaseSpaceMatrix for Mat4 {
    fn symplectic_form() -> Self {
        j4()
    }
    fn symplectic_residual(&self) -> f64 {
        max_abs(&(self * j4() * self.transpose() - j4()))
    }
    fn is_finite(&self) -> bool {
        all_finite(self)
    }
}

/// True iff `‖S Ω Sᵀ − Ω‖_max ≤ tol`.
pub fn is_symplectic<M: PhaseSpaceMatrix>(s: &M, tol: f64) -> Result<bool> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    if !s.is_finite() {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    Ok(s.symplectic_residual() <= tol)
}

/// Phase-space rotation `[[cos φ, sin φ], [−sin φ, cos φ]]`.
pub fn rotation(phi: f64) -> Mat2 {
    let (s, c) = phi.sin_cos();
    Mat2::new(c, s, -s, c)
}

/// Single-mode squeezer `diag(s, 1/s)`.
pub fn squeeze(s: f64) -> Result<Mat2> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::InvalidInput(format!("squeeze factor must be positive, got {s}")));
    }
    Ok(Mat2::new(s, 0.0, 0.0, 1.0 / s))
}

/// Two-mode squeezer `[[cosh r I, sinh r Z], [sinh r Z, cosh r I]]`.
pub fn two_mode_squeezer(r: f64) -> Mat4 {
    let (ch, sh) = (r.cosh(), r.sinh());
    let i = Mat2::identity();
    from_blocks(&(i * ch), &(i * ch), &(z2() * sh))
}

/// Beam splitter with mixing angle `theta` (transmissivity `cos² θ`).
pub fn beam_splitter(theta: f64) -> Mat4 {
    let (s, c) = theta.sin_cos();
    let i = Mat2::identity();
    let mut m = from_blocks(&(i * c), &(i * c), &(i * s));
    m.fixed_view_mut::<2, 2>(2, 0).copy_from(&(i * -s));
    m
}

/// Euler (Bloch–Messiah) parameters of a single-mode symplectic matrix:
/// `S = rotation(phi) · squeeze(s) · rotation(psi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerParams {
    pub phi: f64,
    pub s: f64,
    pub psi: f64,
}

impl EulerParams {
    pub fn new(phi: f64, s: f64, psi: f64) -> Self {
        Self { phi, s, psi }
    }

    pub fn compose(&self) -> Result<Mat2> {
        Ok(rotation(self.phi) * squeeze(self.s)? * rotation(self.psi))
    }
}

/// Rotation-only singular value decomposition of a real 2x2 matrix.
///
/// Returns `(phi, sx, sy, psi)` with `m = rotation(phi) · diag(sx, sy) · rotation(psi)`,
/// `sx ≥ |sy|` and `sign(sy) = sign(det m)`.
pub fn rotation_svd(m: &Mat2) -> (f64, f64, f64, f64) {
    let (p, q, r, s) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let e = 0.5 * (p + s);
    let f = 0.5 * (p - s);
    let g = 0.5 * (r + q);
    let h = 0.5 * (r - q);
    let qn = e.hypot(h);
    let rn = f.hypot(g);
    let a1 = g.atan2(f);
    let a2 = h.atan2(e);
    let theta = 0.5 * (a2 - a1);
    let phi = 0.5 * (a2 + a1);
    (-phi, qn + rn, qn - rn, -theta)
}

/// Decomposes a single-mode symplectic matrix into Euler parameters with `s ≥ 1`.
pub fn euler_decompose(s: &Mat2) -> Result<EulerParams> {
    if !is_symplectic(s, CHECK_TOL)? {
        return Err(Error::InvalidInput(format!(
            "matrix is not symplectic (residual {:.3e})",
            s.symplectic_residual()
        )));
    }
    let (phi, sx, _, psi) = rotation_svd(s);
    Ok(EulerParams { phi: wrap_angle(phi), s: sx, psi: wrap_angle(psi) })
}

fn wrap_angle(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// Symmetric square root of a 2x2 symmetric positive-definite matrix.
pub fn sqrt_spd2(m: &Mat2) -> Mat2 {
    let sd = m.determinant().sqrt();
    (m + Mat2::identity() * sd) / (m.trace() + 2.0 * sd).sqrt()
}

/// `Λ V Λ` with `Λ = diag(1, −1, 1, 1)`.
pub fn partial_transpose_cm(v: &Mat4) -> Mat4 {
    let l = pt_conjugator();
    l * v * l
}

/// `det V` through the Schur complement of the `A` block, which keeps the
/// digits that a cofactor or LU expansion loses on strongly correlated states.
pub fn det_two_mode(v: &Mat4) -> f64 {
    let a = block(v, 0, 0);
    let b = block(v, 1, 1);
    let c = block(v, 0, 1);
    match a.try_inverse() {
        Some(inv) if a.determinant() > 0.0 => a.determinant() * (b - c.transpose() * inv * c).determinant(),
        _ => v.determinant(),
    }
}

/// Symplectic eigenvalues `(ν₋, ν₊)` of a 4x4 symmetric positive-definite matrix.
///
/// Both are read off the symmetric matrix `Kᵀ K`, `K = V^{1/2} 𝒥 V^{1/2}`, whose
/// spectrum is `{ν₋², ν₋², ν₊², ν₊²}`; the symmetric eigensolver stays accurate
/// when `ν₋ ≈ ν₊`, where the determinant formula loses half the digits. For
/// widely separated values `ν₋ = √det V / ν₊` is used instead, because the
/// absolute error of the small eigenvalue scales with `ν₊²`.
pub fn symplectic_eigenvalues(v: &Mat4) -> (f64, f64) {
    let eig = v.symmetric_eigen();
    let root = eig.eigenvectors
        * Mat4::from_diagonal(&eig.eigenvalues.map(|x| x.max(0.0).sqrt()))
        * eig.eigenvectors.transpose();
    let k = root * j4() * root;
    let mut ev: Vec<f64> = (k.transpose() * k).symmetric_eigenvalues().iter().map(|x| x.max(0.0)).collect();
    ev.sort_by(f64::total_cmp);
    let hi = (ev[2] * ev[3]).sqrt().sqrt();
    let lo = (ev[0] * ev[1]).sqrt().sqrt();
    if hi > 1e3 * lo {
        (det_two_mode(v).max(0.0).sqrt() / hi, hi)
    } else {
        (lo, hi)
    }
}

/// `(ν₋, ν₊)` from the invariant `Δ = det A + det B + 2 det C` and `det V`.
pub fn symplectic_eigenvalues_from_invariants(v: &Mat4) -> (f64, f64) {
    let a = block(v, 0, 0).determinant();
    let b = block(v, 1, 1).determinant();
    let c = block(v, 0, 1).determinant();
    let delta = a + b + 2.0 * c;
    let det = det_two_mode(v);
    let disc = (delta * delta - 4.0 * det).max(0.0).sqrt();
    let hi = (0.5 * (delta + disc)).sqrt();
    let lo = if hi > 0.0 { det.max(0.0).sqrt() / hi } else { 0.0 };
    (lo, hi)
}

/// Output of [`williamson_two_mode`].
#[derive(Debug, Clone, PartialEq)]
pub struct Williamson {
    /// Symplectic matrix with `S V Sᵀ = diag(ν₋, ν₋, ν₊, ν₊)`.
    pub s: Mat4,
    pub nu_minus: f64,
    pub nu_plus: f64,
}

/// Williamson normal form of a two-mode symmetric positive-definite matrix.
///
/// Built from `K = V^{-1/2} 𝒥 V^{-1/2}`: the eigenvectors of `KᵀK` give an
/// orthogonal `O` with `Oᵀ K O = ⊕ J/ν_k`, and `S = D^{1/2} Oᵀ V^{-1/2}`.
pub fn williamson_two_mode(v: &Mat4, tol: f64) -> Result<Williamson> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    if !all_finite(v) {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    let scale = max_abs(v).max(1.0);
    if max_abs(&(v - v.transpose())) > 1e-12 * scale {
        return Err(Error::InvalidInput("matrix is not symmetric".into()));
    }
    let sym = 0.5 * (v + v.transpose());
    let eig = SymmetricEigen::new(sym);
    let min_eig = eig.eigenvalues.min();
    if !(min_eig > 0.0) {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: min_eig });
    }
    let inv_sqrt =
        eig.eigenvectors * Mat4::from_diagonal(&eig.eigenvalues.map(|x| 1.0 / x.sqrt())) * eig.eigenvectors.transpose();
    let k = inv_sqrt * j4() * inv_sqrt;
    let ktk = k.transpose() * k;
    let keig = SymmetricEigen::new(0.5 * (ktk + ktk.transpose()));

    let mut order = [0usize, 1, 2, 3];
    order.sort_by(|&i, &j| keig.eigenvalues[j].total_cmp(&keig.eigenvalues[i]));

    let o1 = keig.eigenvectors.column(order[0]).into_owned().normalize();
    let kn1 = (k * o1).norm();
    let nu_minus = 1.0 / kn1;
    let o2 = -(k * o1) / kn1;

    // second normal mode lives in the K-invariant orthogonal complement
    let mut o3 = keig.eigenvectors.column(order[3]).into_owned();
    o3 -= o1 * o1.dot(&o3) + o2 * o2.dot(&o3);
    if o3.norm() < 1e-6 {
        o3 = (0..4)
            .map(|i| {
                let mut e = Vector4::zeros();
                e[i] = 1.0;
                e - o1 * o1[i] - o2 * o2[i]
            })
            .max_by(|x, y| x.norm().total_cmp(&y.norm()))
            .expect("four basis vectors");
    }
    let o3 = o3.normalize();
    let kn3 = (k * o3).norm();
    let nu_plus = 1.0 / kn3;
    let o4 = -(k * o3) / kn3;

    let o = Mat4::from_columns(&[o1, o2, o3, o4]);
    let d_half = Mat4::from_diagonal(&Vector4::new(nu_minus.sqrt(), nu_minus.sqrt(), nu_plus.sqrt(), nu_plus.sqrt()));
    let s = d_half * o.transpose() * inv_sqrt;

    let target = Mat4::from_diagonal(&Vector4::new(nu_minus, nu_minus, nu_plus, nu_plus));
    let diag_res = max_abs(&(s * v * s.transpose() - target)) / scale;
    let sympl_res = s.symplectic_residual();
    if diag_res > tol || sympl_res > tol {
        return Err(Error::NumericalFailure(format!(
            "Williamson residuals too large (diagonal {diag_res:.3e}, symplectic {sympl_res:.3e})"
        )));
    }
    Ok(Williamson { s, nu_minus, nu_plus })
}
