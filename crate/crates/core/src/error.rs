use thiserror::Error;

/// Failures of the field layer and the multiplier operators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("grid size {0} is invalid: need an even number of modes >= 8")]
    InvalidGrid(usize),
    #[error("malformed field: {0}")]
    MalformedField(String),
    #[error("grid mismatch: {left} vs {right} modes per axis")]
    GridMismatch { left: usize, right: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("blow-up at t = {t}: non-finite tendency")]
    BlowUp { t: f64 },
    #[error("invalid time step {0}")]
    InvalidStep(f64),
    #[error("unknown preset '{0}' (expected taylor-green, rho-stripe, random-bandlimited or zero)")]
    UnknownPreset(String),
    #[error("forcing violates the admissible class: {0}")]
    ForcingClass(String),
    #[error("invalid step policy: {0}")]
    InvalidPolicy(String),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnosticsError {
    #[error("exponent p = {0} out of range")]
    InvalidExponent(f64),
    #[error("series too short: need at least {needed} samples, got {got}")]
    SeriesTooShort { needed: usize, got: usize },
    #[error("non-positive value {value} at t = {t}")]
    NonPositive { t: f64, value: f64 },
    #[error("zero field")]
    ZeroField,
    #[error("invalid window [{0}, {1}]")]
    InvalidWindow(f64, f64),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// Configuration errors carry the offending line (parse) or field (validation).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
}

impl ConfigError {
    pub(crate) fn invalid(field: &str, message: impl Into<String>) -> Self {
        ConfigError::Invalid {
            field: field.to_string(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("invalid recursion parameters: {0}")]
    InvalidParams(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Errors of the command-line layer; each maps to an exit code.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("column '{0}' not found")]
    MissingColumn(String),
    #[error("column '{column}' row {row}: value {value} is not positive")]
    NonPositive {
        column: String,
        row: usize,
        value: f64,
    },
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Diagnostics(#[from] DiagnosticsError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

impl HarnessError {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// 64 for usage and configuration problems, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Usage(_) | HarnessError::Config(_) => 64,
            _ => 1,
        }
    }
}
