//! Fidelity bounds, the constructive `ω_θ` map and the optimal local
//! trace-preserving Gaussian channel before teleportation.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{block, max_abs, partial_transpose_cm, williamson_two_mode, z2, Mat2};
use crate::scalar::golden_section_max;
use crate::state::{
    normal_form_eta_at, to_standard_form_i, to_standard_form_iii, FormIParams, StandardFormI, TwoModeCm,
};
use crate::teleport::{
    apply_local_tgcp, attenuation_map, decompose_minimal_noise, fidelity_coherent, noise_matrix,
    MinimalNoiseDecomposition, Mode, TgcpMap,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityBounds {
    pub nu: f64,
    pub lower: f64,
    pub upper: f64,
}

impl FidelityBounds {
    pub fn gap(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, f: f64, tol: f64) -> bool {
        f >= self.lower - tol && f <= self.upper + tol
    }
}

/// `((1+ν)/(1+3ν), 1/(1+ν))`.
pub fn fidelity_bounds(nu: f64) -> Result<FidelityBounds> {
    if !(nu > 0.0) || !nu.is_finite() {
        return Err(Error::InvalidInput(format!("nu must be positive, got {nu}")));
    }
    Ok(FidelityBounds { nu, lower: (1.0 + nu) / (1.0 + 3.0 * nu), upper: 1.0 / (1.0 + nu) })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundGap {
    pub nu_star: f64,
    pub gap: f64,
    pub iterations: usize,
}

/// Largest distance between the two bounds over `ν ∈ (0, 1]`.
pub fn max_bound_gap() -> BoundGap {
    let gap = |nu: f64| 1.0 / (1.0 + nu) - (1.0 + nu) / (1.0 + 3.0 * nu);
    let g = golden_section_max(gap, 0.0, 1.0, 1e-12, 100);
    BoundGap { nu_star: g.x, gap: g.value, iterations: g.iterations }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OmegaThetaResult {
    pub theta: f64,
    pub epsilon: f64,
    pub nu: f64,
    pub map: TgcpMap,
    pub fidelity: f64,
    pub w_a: Mat2,
    pub w_b: Mat2,
}

impl OmegaThetaResult {
    /// `(1+|ε|)/(1+ν+2|ε|)`.
    pub fn closed_form_fidelity(&self) -> f64 {
        let e = self.epsilon.abs();
        (1.0 + e) / (1.0 + self.nu + 2.0 * e)
    }
}

/// Local map that makes the teleportation noise isotropic using the Williamson
/// modes of the partially transposed state.
pub fn omega_theta(v: &TwoModeCm) -> Result<OmegaThetaResult> {
    let pt = partial_transpose_cm(v.matrix());
    let w = williamson_two_mode(&pt, 1e-9)?;
    let nu = w.nu_minus;
    if nu >= 1.0 {
        return Err(Error::OutOfDomain(format!("state is not entangled (nu = {nu})")));
    }
    let w_a = block(&w.s, 0, 0);
    let w_b = block(&w.s, 0, 1);
    let epsilon = w_b.determinant() - w_a.determinant();
    if epsilon.abs() > nu + 1e-9 {
        return Err(Error::NumericalFailure(format!("|epsilon| = {} exceeds nu = {nu}", epsilon.abs())));
    }
    let epsilon = epsilon.clamp(-nu, nu);
    let theta = ((1.0 - epsilon) / (1.0 + epsilon)).sqrt().atan();
    let z = z2();
    let i = Mat2::identity();
    let map = if epsilon >= 0.0 {
        let (c, t) = (theta.cos(), theta.tan());
        TgcpMap { s_a: z * w_a * z / c, g_a: i * (1.0 - t * t), s_b: w_b / c, g_b: Mat2::zeros() }
    } else {
        let (s, ct) = (theta.sin(), 1.0 / theta.tan());
        TgcpMap { s_a: z * w_a * z / s, g_a: Mat2::zeros(), s_b: w_b / s, g_b: i * (1.0 - ct * ct) }
    };
    map.check_cp()?;
    let fidelity = fidelity_coherent(&apply_local_tgcp(v, &map)?)?;
    Ok(OmegaThetaResult { theta, epsilon, nu, map, fidelity, w_a, w_b })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Interior points of the uniform `η` grid on `(0, 1)`.
    pub eta_steps: usize,
    /// Geometric scan density for the `λ` roots.
    pub points_per_decade: usize,
    /// Bisection width for sign changes of the stationarity residual.
    pub eta_tol: f64,
    /// Tolerance of the normal-form and map verification steps.
    pub tol: f64,
    pub two_sided: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { eta_steps: 512, points_per_decade: 24, eta_tol: 1e-10, tol: 1e-9, two_sided: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub lambda: f64,
    pub eta: f64,
    pub fidelity: f64,
    /// Mode carrying the attenuation (the relabeled run attenuates Alice).
    pub side: Mode,
}

impl Candidate {
    pub fn is_boundary(&self) -> bool {
        self.eta == 1.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationReport {
    pub nu: f64,
    pub entangled: bool,
    /// Only reported for entangled inputs.
    pub bounds: Option<FidelityBounds>,
    pub f_unoptimized: f64,
    pub f_opt: f64,
    pub optimal_map: TgcpMap,
    pub decomposition_a: MinimalNoiseDecomposition,
    pub decomposition_b: MinimalNoiseDecomposition,
    pub attenuation_side: Option<Mode>,
    pub tau_star: f64,
    pub eta_star: f64,
    pub lambda_star: f64,
    /// `|η − d/(m−1)|` for attenuated optima, normal-form residual otherwise.
    pub stationarity_residual: f64,
    pub candidates: Vec<Candidate>,
    pub winner: usize,
    /// The input already realizes the optimum and the identity map is reported.
    pub already_optimal: bool,
    pub output: TwoModeCm,
}

fn candidate_fidelity(p: &FormIParams, lambda: f64, eta: f64) -> f64 {
    let (n, m, d) = p.coefficients(lambda, eta);
    2.0 / (3.0 + n - 2.0 * eta * d + eta * eta * (m - 1.0))
}

fn stationarity(p: &FormIParams, lambda: f64, eta: f64) -> f64 {
    let (_, m, d) = p.coefficients(lambda, eta);
    eta * (m - 1.0) - d
}

fn nearest(roots: &[f64], target: f64) -> Option<f64> {
    roots.iter().copied().min_by(|x, y| (x - target).abs().total_cmp(&(y - target).abs()))
}

fn boundary_candidates(p: &FormIParams, side: Mode, opts: &SolverOptions) -> Vec<Candidate> {
    p.roots_with_density(1.0, opts.points_per_decade)
        .into_iter()
        .map(|lambda| Candidate { lambda, eta: 1.0, fidelity: candidate_fidelity(p, lambda, 1.0), side })
        .collect()
}

/// Interior stationary points: follow every root branch `λ(η)` across the
/// grid and bisect each sign change of `η(m−1) − d`.
fn interior_candidates(p: &FormIParams, side: Mode, opts: &SolverOptions) -> Vec<Candidate> {
    let steps = opts.eta_steps;
    let etas: Vec<f64> =
        (1..=steps + 1).map(|i| if i == steps + 1 { 1.0 } else { i as f64 / (steps + 1) as f64 }).collect();
    let layers: Vec<Vec<(f64, f64)>> = etas
        .par_iter()
        .map(|&eta| {
            p.roots_with_density(eta, opts.points_per_decade)
                .into_iter()
                .map(|l| (l, stationarity(p, l, eta)))
                .collect()
        })
        .collect();
    let mut brackets = Vec::new();
    for k in 1..layers.len() {
        for &(l1, h1) in &layers[k] {
            let prev: Vec<f64> = layers[k - 1].iter().map(|x| x.0).collect();
            let Some(l0) = nearest(&prev, l1) else { continue };
            let h0 = layers[k - 1].iter().find(|x| x.0 == l0).map(|x| x.1).unwrap_or(f64::NAN);
            if h0 != 0.0 && h1 != 0.0 && (h0 < 0.0) != (h1 < 0.0) {
                brackets.push((etas[k - 1], l0, h0, etas[k], l1));
            }
        }
    }
    brackets
        .into_par_iter()
        .filter_map(|(e0, l0, h0, e1, l1)| refine_crossing(p, opts, e0, l0, h0, e1, l1))
        .map(|(lambda, eta)| Candidate { lambda, eta, fidelity: candidate_fidelity(p, lambda, eta), side })
        .collect()
}

fn refine_crossing(
    p: &FormIParams,
    opts: &SolverOptions,
    mut e0: f64,
    mut l0: f64,
    mut h0: f64,
    mut e1: f64,
    mut l1: f64,
) -> Option<(f64, f64)> {
    while e1 - e0 > opts.eta_tol {
        let mid = 0.5 * (e0 + e1);
        let guess = l0 + (l1 - l0) * (mid - e0) / (e1 - e0);
        let lm = nearest(&p.roots_with_density(mid, opts.points_per_decade), guess)?;
        let hm = stationarity(p, lm, mid);
        if hm == 0.0 {
            return Some((lm, mid));
        }
        if (hm < 0.0) == (h0 < 0.0) {
            e0 = mid;
            l0 = lm;
            h0 = hm;
        } else {
            e1 = mid;
            l1 = lm;
        }
    }
    let eta = 0.5 * (e0 + e1);
    // Bob replacing his mode by vacuum is never optimal
    if eta < 1e-6 {
        return None;
    }
    let guess = 0.5 * (l0 + l1);
    nearest(&p.roots_with_density(eta, opts.points_per_decade), guess).map(|l| (l, eta))
}

fn side_candidates(p: &FormIParams, side: Mode, opts: &SolverOptions, interior: bool) -> Vec<Candidate> {
    let mut out = boundary_candidates(p, side, opts);
    if interior {
        out.extend(interior_candidates(p, side, opts));
    }
    out
}

/// Candidates, ordered boundary before interior and Bob's side before Alice's.
fn all_candidates(forms: &[(Mode, StandardFormI)], opts: &SolverOptions, upper: Option<f64>) -> Result<Vec<Candidate>> {
    let mut boundary: Vec<Candidate> = Vec::new();
    for (side, form) in forms {
        boundary.extend(boundary_candidates(&form.params(), *side, opts));
    }
    if !boundary.iter().any(|c| c.side == Mode::B) {
        return Err(Error::NumericalFailure("no boundary root of the normal-form equation".into()));
    }
    // reaching the upper bound on the boundary makes the interior scan moot
    let best = boundary.iter().map(|c| c.fidelity).fold(f64::NEG_INFINITY, f64::max);
    if upper.is_some_and(|u| best >= u - 1e-14) {
        return Ok(boundary);
    }
    let mut out = boundary;
    for (side, form) in forms {
        let c = side_candidates(&form.params(), *side, opts, true);
        out.extend(c.into_iter().filter(|c| !c.is_boundary()));
    }
    Ok(out)
}

fn map_for(form: &StandardFormI, v: &TwoModeCm, c: &Candidate, tol: f64) -> Result<(TgcpMap, f64)> {
    let nf = normal_form_eta_at(form, v, c.eta, c.lambda, tol)?;
    let mut map = TgcpMap::symplectic(nf.s_a, nf.s_b);
    let residual = if c.eta < 1.0 {
        map = map.then(&attenuation_map(c.eta, Mode::B)?);
        let (_, m, d) = form.params().coefficients(c.lambda, c.eta);
        (c.eta - d / (m - 1.0)).abs()
    } else {
        nf.constraint_residual()
    };
    Ok((map, residual))
}

/// Optimal local minimal-noise channel for coherent-state teleportation.
pub fn optimal_tgcp(v: &TwoModeCm, opts: &SolverOptions) -> Result<OptimizationReport> {
    let nu = v.pt_spectrum()?.nu;
    let entangled = nu < 1.0;
    let bounds = if entangled { Some(fidelity_bounds(nu)?) } else { None };
    let f_unoptimized = fidelity_coherent(v)?;

    let swapped = v.swapped();
    let mut forms = vec![(Mode::B, to_standard_form_i(v)?)];
    if opts.two_sided {
        forms.push((Mode::A, to_standard_form_i(&swapped)?));
    }
    let candidates = all_candidates(&forms, opts, bounds.map(|b| b.upper))?;
    let f_max = candidates.iter().map(|c| c.fidelity).fold(f64::NEG_INFINITY, f64::max);
    let winner = candidates.iter().position(|c| c.fidelity >= f_max - 1e-12).expect("non-empty candidate list");
    let best = candidates[winner];

    let (form, frame) = match best.side {
        Mode::B => (&forms[0].1, v),
        Mode::A => (&forms[1].1, &swapped),
    };
    let (map, stationarity_residual) = map_for(form, frame, &best, opts.tol)?;
    let map = if best.side == Mode::A { map.swapped() } else { map };
    let output = apply_local_tgcp(v, &map)?;
    let f_applied = fidelity_coherent(&output)?;
    if (f_applied - best.fidelity).abs() > opts.tol {
        return Err(Error::NumericalFailure(format!(
            "reconstructed map gives fidelity {f_applied}, candidate promised {}",
            best.fidelity
        )));
    }

    let already_optimal = f_unoptimized >= f_max - 1e-10;
    let (map, output, f_opt, side, eta) = if already_optimal {
        (TgcpMap::identity(), v.clone(), f_unoptimized.max(f_max), None, 1.0)
    } else {
        let side = (best.eta < 1.0).then_some(best.side);
        (map, output, f_max, side, best.eta)
    };
    let decomposition_a = decompose_minimal_noise(&map.s_a, &map.g_a)?;
    let decomposition_b = decompose_minimal_noise(&map.s_b, &map.g_b)?;
    Ok(OptimizationReport {
        nu,
        entangled,
        bounds,
        f_unoptimized,
        f_opt,
        optimal_map: map,
        decomposition_a,
        decomposition_b,
        attenuation_side: side,
        tau_star: eta,
        eta_star: eta,
        lambda_star: best.lambda,
        stationarity_residual,
        candidates,
        winner,
        already_optimal,
        output,
    })
}

/// True iff the state is locally equivalent to a symmetric one (`n = m` in
/// standard form III), the only case where `1/(1+ν)` is reached.
pub fn upper_bound_achievable(v: &TwoModeCm, tol: f64) -> Result<bool> {
    let f = to_standard_form_iii(v, 1e-9)?;
    Ok((f.n - f.m).abs() <= tol * (1.0 + f.n.abs().max(f.m.abs())))
}

/// Noise after the optimal map is `2 n_opt I`; returns `n_opt`.
pub fn optimal_noise_level(report: &OptimizationReport) -> f64 {
    let n = noise_matrix(&report.output);
    0.25 * n.trace()
}

/// `‖G_a ⊕ G_b‖_max` of a map.
pub fn noise_norm(map: &TgcpMap) -> f64 {
    max_abs(&map.g_a).max(max_abs(&map.g_b))
}
