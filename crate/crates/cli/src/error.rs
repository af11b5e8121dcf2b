use thiserror::Error;

/// Failures of a CLI command, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse input document: {0}")]
    Parse(String),
    #[error("{0}")]
    State(cvtele::Error),
    #[error("solver failure: {0}")]
    Solver(cvtele::Error),
    #[error("{} of {total} states failed verification (seeds: {})", .seeds.len(), join(.seeds))]
    Property { seeds: Vec<u64>, total: usize },
    #[error("internal error: {0}")]
    Internal(String),
}

fn join(seeds: &[u64]) -> String {
    seeds.iter().map(u64::to_string).collect::<Vec<_>>().join(" ")
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } | CliError::Parse(_) => 1,
            CliError::State(_) => 2,
            CliError::Solver(_) | CliError::Internal(_) => 3,
            CliError::Property { .. } => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Io { .. } => "io",
            CliError::Parse(_) => "parse",
            CliError::State(e) if e.is_unphysical() => "unphysical",
            CliError::State(_) => "invalid_state",
            CliError::Solver(_) => "numerical_failure",
            CliError::Property { .. } => "property_failure",
            CliError::Internal(_) => "internal",
        }
    }

    /// Offending Williamson eigenvalue of an unphysical input, if any.
    pub fn eigenvalue(&self) -> Option<f64> {
        match self {
            CliError::State(cvtele::Error::Unphysical { eigenvalue }) => Some(*eigenvalue),
            _ => None,
        }
    }
}
