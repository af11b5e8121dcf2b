use std::fmt::Write as _;

use cvtele::optimizer::{fidelity_bounds, omega_theta, optimal_tgcp, OptimizationReport, SolverOptions};
use cvtele::oracle::{brute_force_optimal, OracleOptions};
use cvtele::sampling;
use cvtele::state::{standard_form_iii_residual, TwoModeCm};
use cvtele::teleport::{fidelity_coherent, isotropize_noise, noise_matrix, swap_pt_spectrum};
use rayon::prelude::*;

use crate::document::{
    rows2, BoundsDocument, CandidateDocument, CmDocument, InvariantsDocument, OmegaThetaDocument, OptimalDocument,
    OracleDocument, ReportDocument, SCHEMA_VERSION,
};
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyzeOptions {
    pub oracle: bool,
    pub seed: u64,
    pub tol: f64,
    pub starts: usize,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        Self { oracle: false, seed: 0, tol: 1e-9, starts: 32 }
    }
}

pub fn read_document(path: &str) -> Result<CmDocument, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_string(), source })?;
    CmDocument::parse(&text)
}

fn optimal_document(rep: &OptimizationReport) -> OptimalDocument {
    let map = &rep.optimal_map;
    OptimalDocument {
        fidelity: rep.f_opt,
        eta: rep.eta_star,
        lambda: rep.lambda_star,
        attenuation_side: rep.attenuation_side.map_or("none", |m| m.as_str()).to_string(),
        tau: rep.tau_star,
        s_a: rows2(&map.s_a),
        g_a: rows2(&map.g_a),
        s_b: rows2(&map.s_b),
        g_b: rows2(&map.g_b),
        already_optimal: rep.already_optimal,
        stationarity_residual: rep.stationarity_residual,
        candidates: rep
            .candidates
            .iter()
            .map(|c| CandidateDocument {
                lambda: c.lambda,
                eta: c.eta,
                fidelity: c.fidelity,
                side: c.side.as_str().to_string(),
            })
            .collect(),
    }
}

/// Full report for one validated state.
pub fn build_report(v: &TwoModeCm, label: Option<String>, opts: &AnalyzeOptions) -> Result<ReportDocument, CliError> {
    let solver = |e| CliError::Solver(e);
    let pt = v.pt_spectrum().map_err(solver)?;
    let inv = v.invariants();
    let bounds = fidelity_bounds(pt.nu).map_err(solver)?;
    let entangled = pt.nu < 1.0;
    let omega = if entangled {
        let o = omega_theta(v).map_err(solver)?;
        Some(OmegaThetaDocument { theta: o.theta, epsilon: o.epsilon, fidelity: o.fidelity })
    } else {
        None
    };
    let solver_opts = SolverOptions { tol: opts.tol.max(1e-9), ..SolverOptions::default() };
    let rep = optimal_tgcp(v, &solver_opts).map_err(solver)?;
    let oracle = opts.oracle.then(|| {
        let o = brute_force_optimal(v, &OracleOptions { starts: opts.starts, seed: opts.seed, ..Default::default() });
        OracleDocument { fidelity: o.fidelity, starts: o.starts, seed: o.seed, evaluations: o.evaluations }
    });
    Ok(ReportDocument {
        schema_version: SCHEMA_VERSION.to_string(),
        label,
        nu: pt.nu,
        mu: pt.mu,
        log_negativity: v.log_negativity().map_err(solver)?,
        entangled,
        invariants: InvariantsDocument { a: inv.a, b: inv.b, c: inv.c, sign_det_c: inv.sign_det_c, v: inv.v },
        fidelity_unoptimized: fidelity_coherent(v).map_err(solver)?,
        bounds: BoundsDocument { lower: bounds.lower, upper: bounds.upper, proven: entangled },
        omega_theta: omega,
        optimal: optimal_document(&rep),
        oracle,
    })
}

pub fn analyze(path: &str, opts: &AnalyzeOptions) -> Result<String, CliError> {
    if opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(CliError::Usage(format!("--tol must be positive, got {}", opts.tol)));
    }
    if opts.starts == 0 {
        return Err(CliError::Usage("--starts must be at least 1".into()));
    }
    let doc = read_document(path)?;
    let v = doc.to_cm(opts.tol)?;
    build_report(&v, doc.label.clone(), opts)?.to_json()
}

pub fn analyze_error_body(err: &CliError) -> String {
    let doc = crate::document::ErrorDocument {
        schema_version: SCHEMA_VERSION.to_string(),
        error: crate::document::ErrorBody {
            kind: err.kind().to_string(),
            message: err.to_string(),
            eigenvalue: err.eigenvalue(),
        },
    };
    crate::document::to_json(&doc).unwrap_or_else(|_| format!("{{\"error\": {:?}}}\n", err.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsOptions {
    pub nu_min: f64,
    pub nu_max: f64,
    pub steps: usize,
}

/// CSV of `nu,lower,upper,gap` on a uniform grid including both ends.
pub fn bounds(opts: &BoundsOptions) -> Result<String, CliError> {
    let BoundsOptions { nu_min, nu_max, steps } = *opts;
    if !(nu_min > 0.0 && nu_min <= nu_max && nu_max <= 1.0) {
        return Err(CliError::Usage(format!("need 0 < nu-min <= nu-max <= 1, got [{nu_min}, {nu_max}]")));
    }
    if steps < 2 {
        return Err(CliError::Usage(format!("--steps must be at least 2, got {steps}")));
    }
    let mut out = String::from("nu,lower,upper,gap\n");
    for i in 0..steps {
        let nu = if i + 1 == steps { nu_max } else { nu_min + (nu_max - nu_min) * i as f64 / (steps - 1) as f64 };
        let b = fidelity_bounds(nu).map_err(CliError::Solver)?;
        writeln!(out, "{},{},{},{}", nu, b.lower, b.upper, b.gap()).expect("writing to a String");
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwapOptions {
    pub n_opt: f64,
    pub r_max: f64,
    pub steps: usize,
}

/// CSV of `r,nu_swap` for `r` from 0 to `r_max`.
pub fn swap_demo(opts: &SwapOptions) -> Result<String, CliError> {
    let SwapOptions { n_opt, r_max, steps } = *opts;
    if !(n_opt >= 0.0 && n_opt.is_finite()) || !(r_max > 0.0 && r_max.is_finite()) {
        return Err(CliError::Usage(format!("need n-opt >= 0 and r-max > 0, got {n_opt} and {r_max}")));
    }
    if steps < 2 {
        return Err(CliError::Usage(format!("--steps must be at least 2, got {steps}")));
    }
    let mut out = String::from("r,nu_swap\n");
    for i in 0..steps {
        let r = if i + 1 == steps { r_max } else { r_max * i as f64 / (steps - 1) as f64 };
        let nu = swap_pt_spectrum(n_opt, r).map_err(CliError::Solver)?.nu;
        writeln!(out, "{r},{nu}").expect("writing to a String");
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub count: usize,
    pub seed: u64,
    /// Oracle starts per state; zero skips the oracle comparison.
    pub oracle_budget: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateCheck {
    pub seed: u64,
    pub nu: f64,
    pub f_opt: f64,
    pub oracle: Option<f64>,
    pub sandwich: bool,
    pub oracle_ok: bool,
    pub isotropy: bool,
    pub fixed_point: bool,
    pub error: Option<String>,
}

impl StateCheck {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.sandwich && self.oracle_ok && self.isotropy && self.fixed_point
    }
}

pub const ORACLE_AGREEMENT: f64 = 1e-4;

fn check_state(seed: u64, oracle_budget: usize) -> StateCheck {
    let mut check = StateCheck {
        seed,
        nu: f64::NAN,
        f_opt: f64::NAN,
        oracle: None,
        sandwich: false,
        oracle_ok: false,
        isotropy: false,
        fixed_point: false,
        error: None,
    };
    let run = |check: &mut StateCheck| -> cvtele::Result<()> {
        let v = sampling::entangled(seed)?;
        let opts = SolverOptions::default();
        let rep = optimal_tgcp(&v, &opts)?;
        check.nu = rep.nu;
        check.f_opt = rep.f_opt;
        check.sandwich = rep.bounds.is_some_and(|b| b.contains(rep.f_opt, 1e-9));

        check.oracle_ok = if oracle_budget > 0 {
            let o = brute_force_optimal(&v, &OracleOptions { starts: oracle_budget, seed, ..Default::default() });
            check.oracle = Some(o.fidelity);
            (o.fidelity - rep.f_opt).abs() < ORACLE_AGREEMENT
        } else {
            true
        };

        let before = noise_matrix(&v);
        let iso = isotropize_noise(&v)?;
        let after = noise_matrix(&iso.output);
        check.isotropy = after.anisotropy().abs() <= 1e-9 * (1.0 + after.trace())
            && (after.det() - before.det()).abs() <= 1e-9 * before.det()
            && fidelity_coherent(&iso.output)? >= fidelity_coherent(&v)? - 1e-12;

        let again = optimal_tgcp(&rep.output, &opts)?;
        check.fixed_point = again.already_optimal
            && (again.f_opt - rep.f_opt).abs() < 1e-8
            && standard_form_iii_residual(&rep.output) < 1e-8;
        Ok(())
    };
    if let Err(e) = run(&mut check) {
        check.error = Some(e.to_string());
    }
    check
}

pub fn verify_checks(opts: &VerifyOptions) -> Result<Vec<StateCheck>, CliError> {
    if opts.count == 0 {
        return Err(CliError::Usage("--count must be at least 1".into()));
    }
    Ok((0..opts.count as u64)
        .into_par_iter()
        .map(|i| check_state(opts.seed.wrapping_add(i), opts.oracle_budget))
        .collect())
}

fn mark(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "FAIL"
    }
}

/// Summary table; `Err(Property)` lists the failing seeds.
pub fn verify(opts: &VerifyOptions) -> Result<String, CliError> {
    let checks = verify_checks(opts)?;
    let mut out = String::from("seed,nu,f_opt,oracle,sandwich,oracle_agreement,isotropy,fixed_point\n");
    for c in &checks {
        let oracle = c.oracle.map_or("-".to_string(), |f| format!("{f:.12}"));
        writeln!(
            out,
            "{},{:.12},{:.12},{},{},{},{},{}",
            c.seed,
            c.nu,
            c.f_opt,
            oracle,
            mark(c.sandwich),
            mark(c.oracle_ok),
            mark(c.isotropy),
            mark(c.fixed_point)
        )
        .expect("writing to a String");
        if let Some(e) = &c.error {
            writeln!(out, "# seed {} error: {e}", c.seed).expect("writing to a String");
        }
    }
    let failed: Vec<u64> = checks.iter().filter(|c| !c.passed()).map(|c| c.seed).collect();
    writeln!(out, "# passed {}/{}", checks.len() - failed.len(), checks.len()).expect("writing to a String");
    if failed.is_empty() {
        Ok(out)
    } else {
        print!("{out}");
        Err(CliError::Property { seeds: failed, total: checks.len() })
    }
}
