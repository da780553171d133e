use thiserror::Error;

/// Errors raised by polytope construction and the evaluation engines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("polytope is not simple: vertex {vertex} lies on {facets} facets (expected {expected})")]
    NotSimple {
        vertex: usize,
        facets: usize,
        expected: usize,
    },
    #[error("polyhedron is unbounded")]
    Unbounded,
    #[error("point is not in the affine hull of face {face} (residual {residual:.3e})")]
    NotInAffineHull { face: usize, residual: f64 },
    #[error("point is not strictly interior (margin {margin:.3e})")]
    PointNotInterior { margin: f64 },
    #[error("point is not strictly inside the cone of face {face} (margin {margin:.3e})")]
    PointNotInCone { face: usize, margin: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{count} marginal records present; perturb the point and retry")]
    MarginalRecordsPresent { count: usize },
    #[error("Morse consistency violated: {0}")]
    MorseViolation(String),
    #[error("segment crossing near t={t:.6} did not resolve to a single +-2 change (delta {delta})")]
    NonGenericSample { t: f64, delta: i64 },
    #[error("degenerate spherical triangle")]
    DegenerateTriangle,
    #[error("skew signature mismatch: {0}")]
    SignatureMismatch(String),
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("inconsistent dihedral role on edge ({0}, {1})")]
    InconsistentDihedralRole(usize, usize),
    #[error("bad incidence: {0}")]
    BadIncidence(String),
    #[error("polytope generation failed after {attempts} attempts")]
    GenerationFailed { attempts: usize },
    #[error("unknown canned polytope `{0}`")]
    UnknownName(String),
    #[error("linear program failed: {0}")]
    Lp(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Variant name, for machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DegenerateInput(_) => "DegenerateInput",
            Error::NotSimple { .. } => "NotSimple",
            Error::Unbounded => "Unbounded",
            Error::NotInAffineHull { .. } => "NotInAffineHull",
            Error::PointNotInterior { .. } => "PointNotInterior",
            Error::PointNotInCone { .. } => "PointNotInCone",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::MarginalRecordsPresent { .. } => "MarginalRecordsPresent",
            Error::MorseViolation(_) => "MorseViolation",
            Error::NonGenericSample { .. } => "NonGenericSample",
            Error::DegenerateTriangle => "DegenerateTriangle",
            Error::SignatureMismatch(_) => "SignatureMismatch",
            Error::PreconditionFailed(_) => "PreconditionFailed",
            Error::InconsistentDihedralRole(..) => "InconsistentDihedralRole",
            Error::BadIncidence(_) => "BadIncidence",
            Error::GenerationFailed { .. } => "GenerationFailed",
            Error::UnknownName(_) => "UnknownName",
            Error::Lp(_) => "Lp",
        }
    }

    /// Errors that signal an internal inconsistency rather than bad input.
    pub fn is_alarm(&self) -> bool {
        matches!(
            self,
            Error::MorseViolation(_) | Error::SignatureMismatch(_) | Error::InconsistentDihedralRole(..) | Error::Lp(_)
        )
    }
}
