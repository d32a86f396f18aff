use thiserror::Error;

/// Errors produced by the pose estimators and their supporting machinery.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid calibration matrix: {0}")]
    InvalidCalibration(String),

    /// A direction was requested from a (numerically) zero vector.
    #[error("undefined direction: vector has zero norm")]
    UndefinedDirection,

    #[error("insufficient points: need at least {needed}, got {got}")]
    InsufficientPoints { needed: usize, got: usize },

    /// The coefficient row for a point triple vanished or the norm factor did not divide out.
    #[error("degenerate triple ({}, {}, {}): {reason}", triple[0], triple[1], triple[2])]
    DegenerateTriple { triple: [usize; 3], reason: String },

    /// The seven-point split lost rank: the points lie on a critical surface.
    #[error(
        "critical surface: A2 has rank {rank} (expected {expected}, singular value gap {gap:.3e}); \
         use the six-point solver (quest6) for this configuration"
    )]
    CriticalSurface {
        rank: usize,
        expected: usize,
        gap: f64,
    },

    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),

    #[error("no solution candidates survived")]
    NoSolution,

    #[error("no decomposition hypothesis places a majority of points in front of both cameras")]
    ChiralityFailure,

    #[error("robust estimation failed: no hypothesis gathered {needed} inliers")]
    RobustFailure { needed: usize },

    #[error("infeasible scene configuration: {0}")]
    InfeasibleConfig(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Malformed input file; `line` is 1-based (0 when the problem is not tied to a line).
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    /// Short machine-friendly name, used on the CLI diagnostic stream.
    pub fn name(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::InvalidCalibration(_) => "invalid-calibration",
            Error::UndefinedDirection => "undefined-direction",
            Error::InsufficientPoints { .. } => "insufficient-points",
            Error::DegenerateTriple { .. } => "degenerate-triple",
            Error::CriticalSurface { .. } => "critical-surface",
            Error::DegenerateConfiguration(_) => "degenerate-configuration",
            Error::NoSolution => "no-solution",
            Error::ChiralityFailure => "chirality-failure",
            Error::RobustFailure { .. } => "robust-failure",
            Error::InfeasibleConfig(_) => "infeasible-config",
            Error::Numerical(_) => "numerical-failure",
            Error::Parse { .. } => "parse-error",
        }
    }

    /// Whether the error stems from the geometry of the input rather than its shape.
    pub fn is_degeneracy(&self) -> bool {
        matches!(
            self,
            Error::DegenerateTriple { .. }
                | Error::CriticalSurface { .. }
                | Error::DegenerateConfiguration(_)
                | Error::NoSolution
                | Error::ChiralityFailure
                | Error::RobustFailure { .. }
                | Error::Numerical(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
