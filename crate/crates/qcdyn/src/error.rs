//! Error type shared across the crate.
//!
//! Errors are grouped by the way a caller is expected to react to them:
//! configuration problems (reject the input, exit code 2), gate refusals
//! (the requested run does not satisfy the hypotheses its estimates rely
//! on, exit code 3), and numerical failures during time stepping (exit
//! code 4). Everything else (I/O, internal misuse) is reported verbatim.

use std::fmt;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes surfaced by the library.
#[derive(Debug)]
pub enum Error {
    /// A configuration file or value is malformed. `line` is 1-based when
    /// the error can be pinned to a specific line of the input.
    Config { line: Option<usize>, msg: String },
    /// Material parameters violate a basic validity requirement
    /// (positivity of density, phason drag, or viscosities).
    InvalidMaterial(String),
    /// A constitutive evaluation was requested without the rate inputs it
    /// needs (e.g. a viscous stress with no velocity gradient supplied).
    IncompleteInput(String),
    /// A field or initial datum does not match the grid it is used with.
    ShapeMismatch(String),
    /// The run was refused because the well-posedness gate failed.
    GateRefused(String),
    /// The fixed-point iteration for the gyroscopic coupling failed to
    /// converge within the configured iteration budget.
    PicardDiverged {
        step: usize,
        iterations: usize,
        last_change: f64,
    },
    /// The inner linear solver stalled before reaching its tolerance.
    KrylovBreakdown {
        step: usize,
        iterations: usize,
        residual: f64,
    },
    /// A direct factorization found the system matrix singular.
    SingularSystem(String),
    /// A field stopped being finite (NaN or infinity) during stepping.
    NonFinite { step: usize, what: String },
    /// Unknown scenario name passed to the scenario runner.
    UnknownScenario(String),
    /// Wrapped I/O error with the path that produced it.
    Io { path: String, source: std::io::Error },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Config { line: Some(n), msg } => write!(f, "config error (line {n}): {msg}"),
            Error::Config { line: None, msg } => write!(f, "config error: {msg}"),
            Error::InvalidMaterial(msg) => write!(f, "invalid material parameters: {msg}"),
            Error::IncompleteInput(msg) => write!(f, "incomplete input: {msg}"),
            Error::ShapeMismatch(msg) => write!(f, "shape mismatch: {msg}"),
            Error::GateRefused(msg) => write!(f, "gate refused: {msg}"),
            Error::PicardDiverged {
                step,
                iterations,
                last_change,
            } => write!(
                f,
                "fixed-point iteration diverged at step {step} after {iterations} iterations \
                 (last relative change {last_change:e})"
            ),
            Error::KrylovBreakdown {
                step,
                iterations,
                residual,
            } => write!(
                f,
                "linear solver failed at step {step} after {iterations} iterations \
                 (relative residual {residual:e})"
            ),
            Error::SingularSystem(msg) => write!(f, "singular linear system: {msg}"),
            Error::NonFinite { step, what } => {
                write!(f, "non-finite values in {what} after step {step}")
            }
            Error::UnknownScenario(name) => write!(f, "unknown scenario `{name}`"),
            Error::Io { path, source } => write!(f, "i/o error on `{path}`: {source}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io { source, .. } => Some(source),
            _ => None,
        }
    }
}

impl Error {
    /// Process exit code associated with this error class.
    ///
    /// 2 = configuration error, 3 = gate refusal, 4 = numerical failure,
    /// 1 = everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. }
            | Error::InvalidMaterial(_)
            | Error::ShapeMismatch(_)
            | Error::UnknownScenario(_)
            | Error::IncompleteInput(_) => 2,
            Error::GateRefused(_) => 3,
            Error::PicardDiverged { .. }
            | Error::KrylovBreakdown { .. }
            | Error::SingularSystem(_)
            | Error::NonFinite { .. } => 4,
            Error::Io { .. } => 1,
        }
    }

    /// Convenience constructor for I/O errors tagged with their path.
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
