//! Brute-force reference for the optimal local channel: multistart
//! Nelder–Mead over symplectic-times-attenuation maps on each mode.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::linalg::{Mat2, Mat4};
use crate::state::TwoModeCm;

pub const TAU_MIN: f64 = 0.02;
pub const LOG_SQUEEZE_MAX: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    pub starts: usize,
    pub seed: u64,
    /// Function evaluations per Nelder–Mead run.
    pub max_evals: usize,
    /// Restarts from the incumbent simplex vertex after each run.
    pub restarts: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { starts: 32, seed: 0, max_evals: 6000, restarts: 3 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub fidelity: f64,
    /// `(φ_a, q_a, ψ_a, τ_a, φ_b, q_b, ψ_b, τ_b)` of the best map.
    pub params: [f64; 8],
    pub best_start: usize,
    pub evaluations: usize,
    /// Number of runs that ended on the simplex-size criterion.
    pub converged_runs: usize,
    pub starts: usize,
    pub seed: u64,
}

fn local(phi: f64, q: f64, psi: f64, tau: f64) -> Mat2 {
    let rot = |t: f64| {
        let (s, c) = t.sin_cos();
        Mat2::new(c, s, -s, c)
    };
    let sq = Mat2::new(q.exp(), 0.0, 0.0, (-q).exp());
    rot(phi) * sq * rot(psi) * tau
}

fn clamp_params(x: &[f64; 8]) -> ([f64; 8], f64) {
    let mut y = *x;
    let mut penalty = 0.0;
    for &i in &[1usize, 5] {
        y[i] = x[i].clamp(-LOG_SQUEEZE_MAX, LOG_SQUEEZE_MAX);
        penalty += (x[i] - y[i]).powi(2);
    }
    for &i in &[3usize, 7] {
        y[i] = x[i].clamp(TAU_MIN, 1.0);
        penalty += (x[i] - y[i]).powi(2);
    }
    (y, penalty)
}

/// Teleportation fidelity of `V` after the parametrized map, computed from scratch.
pub fn map_fidelity(v: &Mat4, x: &[f64; 8]) -> f64 {
    let sa = local(x[0], x[1], x[2], x[3]);
    let sb = local(x[4], x[5], x[6], x[7]);
    let a = v.fixed_view::<2, 2>(0, 0).into_owned();
    let b = v.fixed_view::<2, 2>(2, 2).into_owned();
    let c = v.fixed_view::<2, 2>(0, 2).into_owned();
    let a2 = sa * a * sa.transpose() + Mat2::identity() * (1.0 - x[3] * x[3]);
    let b2 = sb * b * sb.transpose() + Mat2::identity() * (1.0 - x[7] * x[7]);
    let c2 = sa * c * sb.transpose();
    // N = Z A Z + Z C + Cᵀ Z + B
    let n00 = a2[(0, 0)] + 2.0 * c2[(0, 0)] + b2[(0, 0)];
    let n11 = a2[(1, 1)] - 2.0 * c2[(1, 1)] + b2[(1, 1)];
    let n01 = -a2[(0, 1)] + c2[(0, 1)] - c2[(1, 0)] + b2[(0, 1)];
    let det = (2.0 + n00) * (2.0 + n11) - n01 * n01;
    2.0 / det.sqrt()
}

fn objective(v: &Mat4, x: &[f64; 8]) -> f64 {
    let (y, penalty) = clamp_params(x);
    let f = map_fidelity(v, &y);
    if f.is_finite() {
        -f + penalty
    } else {
        f64::INFINITY
    }
}

struct RunOutcome {
    x: [f64; 8],
    value: f64,
    evaluations: usize,
    converged: bool,
}

fn nelder_mead<F: Fn(&[f64; 8]) -> f64>(f: &F, x0: [f64; 8], steps: [f64; 8], max_evals: usize) -> RunOutcome {
    const N: usize = 8;
    let mut simplex: Vec<([f64; N], f64)> = Vec::with_capacity(N + 1);
    simplex.push((x0, f(&x0)));
    for i in 0..N {
        let mut x = x0;
        x[i] += steps[i];
        simplex.push((x, f(&x)));
    }
    let mut evaluations = N + 1;
    let mut converged = false;
    let combine = |a: &[f64; N], b: &[f64; N], t: f64| -> [f64; N] {
        let mut out = [0.0; N];
        for k in 0..N {
            out[k] = a[k] + t * (b[k] - a[k]);
        }
        out
    };
    while evaluations < max_evals {
        simplex.sort_by(|p, q| p.1.total_cmp(&q.1));
        let best = simplex[0].1;
        let worst = simplex[N].1;
        let size = simplex[1..]
            .iter()
            .map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if (worst - best).abs() <= 1e-15 && size <= 1e-9 {
            converged = true;
            break;
        }
        let mut centroid = [0.0; N];
        for (x, _) in &simplex[..N] {
            for k in 0..N {
                centroid[k] += x[k] / N as f64;
            }
        }
        let xr = combine(&centroid, &simplex[N].0, -1.0);
        let fr = f(&xr);
        evaluations += 1;
        if fr < simplex[0].1 {
            let xe = combine(&centroid, &simplex[N].0, -2.0);
            let fe = f(&xe);
            evaluations += 1;
            simplex[N] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[N - 1].1 {
            simplex[N] = (xr, fr);
        } else {
            let (xc, fc) = if fr < simplex[N].1 {
                let xc = combine(&centroid, &xr, 0.5);
                (xc, f(&xc))
            } else {
                let xc = combine(&centroid, &simplex[N].0, 0.5);
                (xc, f(&xc))
            };
            evaluations += 1;
            if fc < simplex[N].1.min(fr) {
                simplex[N] = (xc, fc);
            } else {
                let x_best = simplex[0].0;
                for vertex in simplex.iter_mut().skip(1) {
                    vertex.0 = combine(&x_best, &vertex.0, 0.5);
                    vertex.1 = f(&vertex.0);
                }
                evaluations += N;
            }
        }
    }
    simplex.sort_by(|p, q| p.1.total_cmp(&q.1));
    RunOutcome { x: simplex[0].0, value: simplex[0].1, evaluations, converged }
}

fn random_start(seed: u64, index: usize) -> [f64; 8] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let tau = std::f64::consts::TAU;
    let mut x = [0.0; 8];
    for mode in 0..2 {
        let o = 4 * mode;
        x[o] = rng.gen_range(0.0..tau);
        x[o + 1] = rng.gen_range(-1.0..1.0);
        x[o + 2] = rng.gen_range(0.0..tau);
        x[o + 3] = rng.gen_range(0.5..=1.0);
    }
    x
}

/// Best teleportation fidelity over local maps `τ_k R(φ_k) D(q_k) R(ψ_k)` with
/// added vacuum noise `(1 − τ_k²) I`, found by seeded multistart Nelder–Mead.
pub fn brute_force_optimal(v: &TwoModeCm, opts: &OracleOptions) -> OracleResult {
    let m = *v.matrix();
    let f = |x: &[f64; 8]| objective(&m, x);
    let steps = [0.6, 0.4, 0.6, 0.15, 0.6, 0.4, 0.6, 0.15];
    let runs: Vec<(usize, RunOutcome)> = (0..opts.starts.max(1))
        .into_par_iter()
        .map(|i| {
            let mut out = nelder_mead(&f, random_start(opts.seed, i), steps, opts.max_evals);
            for _ in 0..opts.restarts {
                let next = nelder_mead(&f, clamp_params(&out.x).0, steps.map(|s| 0.1 * s), opts.max_evals);
                let evaluations = out.evaluations + next.evaluations;
                let improved = next.value < out.value;
                out = if improved { next } else { out };
                out.evaluations = evaluations;
                if !improved {
                    break;
                }
            }
            (i, out)
        })
        .collect();
    let evaluations = runs.iter().map(|(_, r)| r.evaluations).sum();
    let converged_runs = runs.iter().filter(|(_, r)| r.converged).count();
    let (best_start, best) =
        runs.iter().min_by(|(i, a), (j, b)| a.value.total_cmp(&b.value).then(i.cmp(j))).expect("at least one start");
    let params = clamp_params(&best.x).0;
    OracleResult {
        fidelity: map_fidelity(&m, &params),
        params,
        best_start: *best_start,
        evaluations,
        converged_runs,
        starts: opts.starts.max(1),
        seed: opts.seed,
    }
}
