//! JSON input and report documents.

use cvtele::linalg::{Mat2, Mat4};
use cvtele::state::TwoModeCm;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Bumped whenever a field is renamed, removed or changes meaning.
pub const SCHEMA_VERSION: &str = "1.0.0";

/// Two-mode covariance matrix as either a full 4x4 array or its blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CmDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cm: Option<[[f64; 4]; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks: Option<BlocksDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlocksDocument {
    #[serde(rename = "A")]
    pub a: [[f64; 2]; 2],
    #[serde(rename = "B")]
    pub b: [[f64; 2]; 2],
    #[serde(rename = "C")]
    pub c: [[f64; 2]; 2],
}

fn mat2(rows: &[[f64; 2]; 2]) -> Mat2 {
    Mat2::new(rows[0][0], rows[0][1], rows[1][0], rows[1][1])
}

pub fn rows2(m: &Mat2) -> [[f64; 2]; 2] {
    // adding 0.0 turns -0.0 into 0.0
    [[m[(0, 0)] + 0.0, m[(0, 1)] + 0.0], [m[(1, 0)] + 0.0, m[(1, 1)] + 0.0]]
}

impl CmDocument {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let doc: CmDocument = serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
        match (&doc.cm, &doc.blocks) {
            (Some(_), Some(_)) => Err(CliError::Parse("document has both \"cm\" and \"blocks\"".into())),
            (None, None) => Err(CliError::Parse("document needs one of \"cm\" or \"blocks\"".into())),
            _ => Ok(doc),
        }
    }

    pub fn from_cm(v: &TwoModeCm, label: Option<String>) -> Self {
        let m = v.matrix();
        let mut cm = [[0.0; 4]; 4];
        for (i, row) in cm.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = m[(i, j)];
            }
        }
        Self { cm: Some(cm), blocks: None, label }
    }

    pub fn matrix(&self) -> Mat4 {
        match (&self.cm, &self.blocks) {
            (Some(rows), _) => Mat4::from_fn(|i, j| rows[i][j]),
            (None, Some(b)) => {
                let c = mat2(&b.c);
                cvtele::linalg::from_blocks(&mat2(&b.a), &mat2(&b.b), &c)
            }
            (None, None) => Mat4::zeros(),
        }
    }

    /// Validated covariance matrix; asymmetry above `tol` or unphysical entries fail.
    pub fn to_cm(&self, tol: f64) -> Result<TwoModeCm, CliError> {
        if let Some(b) = &self.blocks {
            // blocks are given independently, so only A and B can be asymmetric
            let a = mat2(&b.a);
            let bb = mat2(&b.b);
            if (a - a.transpose()).abs().max() >= tol || (bb - bb.transpose()).abs().max() >= tol {
                return Err(CliError::State(cvtele::Error::InvalidInput(
                    "diagonal blocks A and B must be symmetric".into(),
                )));
            }
        }
        TwoModeCm::new(self.matrix(), tol).map_err(CliError::State)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantsDocument {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    #[serde(rename = "sign_detC")]
    pub sign_det_c: i8,
    pub v: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsDocument {
    pub lower: f64,
    pub upper: f64,
    /// Whether the bounds are established for this state (entangled inputs only).
    pub proven: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaThetaDocument {
    pub theta: f64,
    pub epsilon: f64,
    pub fidelity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateDocument {
    pub lambda: f64,
    pub eta: f64,
    pub fidelity: f64,
    pub side: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalDocument {
    pub fidelity: f64,
    pub eta: f64,
    pub lambda: f64,
    /// `"none"`, `"a"` or `"b"`.
    pub attenuation_side: String,
    pub tau: f64,
    #[serde(rename = "S_a")]
    pub s_a: [[f64; 2]; 2],
    #[serde(rename = "G_a")]
    pub g_a: [[f64; 2]; 2],
    #[serde(rename = "S_b")]
    pub s_b: [[f64; 2]; 2],
    #[serde(rename = "G_b")]
    pub g_b: [[f64; 2]; 2],
    pub already_optimal: bool,
    pub stationarity_residual: f64,
    pub candidates: Vec<CandidateDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleDocument {
    pub fidelity: f64,
    pub starts: usize,
    pub seed: u64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema_version: String,
    pub label: Option<String>,
    pub nu: f64,
    pub mu: f64,
    pub log_negativity: f64,
    pub entangled: bool,
    pub invariants: InvariantsDocument,
    pub fidelity_unoptimized: f64,
    pub bounds: BoundsDocument,
    /// Absent (null) for separable states.
    pub omega_theta: Option<OmegaThetaDocument>,
    pub optimal: OptimalDocument,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub kind: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigenvalue: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorDocument {
    pub schema_version: String,
    pub error: ErrorBody,
}

impl ReportDocument {
    /// Every numeric field, for the finiteness check before serialization.
    fn numbers(&self) -> Vec<f64> {
        let inv = &self.invariants;
        let opt = &self.optimal;
        let mut out = vec![
            self.nu,
            self.mu,
            self.log_negativity,
            inv.a,
            inv.b,
            inv.c,
            inv.v,
            self.fidelity_unoptimized,
            self.bounds.lower,
            self.bounds.upper,
            opt.fidelity,
            opt.eta,
            opt.lambda,
            opt.tau,
            opt.stationarity_residual,
        ];
        for m in [&opt.s_a, &opt.g_a, &opt.s_b, &opt.g_b] {
            out.extend(m.iter().flatten());
        }
        for c in &opt.candidates {
            out.extend([c.lambda, c.eta, c.fidelity]);
        }
        if let Some(o) = &self.omega_theta {
            out.extend([o.theta, o.epsilon, o.fidelity]);
        }
        if let Some(o) = &self.oracle {
            out.push(o.fidelity);
        }
        out
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        if self.numbers().iter().any(|x| !x.is_finite()) {
            return Err(CliError::Internal("report contains non-finite numbers".into()));
        }
        to_json(self)
    }
}

/// Pretty JSON with shortest round-trip number formatting and a trailing newline.
pub fn to_json<T: Serialize>(doc: &T) -> Result<String, CliError> {
    let mut text = serde_json::to_string_pretty(doc).map_err(|e| CliError::Internal(e.to_string()))?;
    text.push('\n');
    Ok(text)
}
