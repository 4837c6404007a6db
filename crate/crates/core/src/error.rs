use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("usage: {0}")]
    Usage(String),

    #[error("degenerate frame: near-null vector (|<w,w>| = {self_inner:.3e})")]
    DegenerateFrame { self_inner: f64 },

    #[error("domain: {0}")]
    Domain(String),

    #[error("singular warp: f({t}) = {value:.3e}")]
    SingularWarp { t: f64, value: f64 },

    #[error("surface is not space-like at (u, v) = ({u}, {v})")]
    NotSpacelike { u: f64, v: f64 },

    #[error("horizontal-slice degeneracy: |T| = {norm:.3e} at or below tolerance")]
    HorizontalSlice { norm: f64 },

    #[error("minimal-direction degeneracy: |H| = {norm:.3e} at or below tolerance")]
    MinimalDirection { norm: f64 },

    #[error("constraint violated: {equation} (residual {residual:.3e})")]
    Constraint {
        equation: &'static str,
        residual: f64,
    },

    #[error("precondition: {0}")]
    Precondition(String),

    #[error("inapplicable: {0}")]
    Inapplicable(String),

    #[error("io: {0}")]
    Io(String),
}

impl Error {
    /// Errors caused by invalid or degenerate input, as opposed to I/O failures.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Io(_))
    }

    /// Short machine-parsable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::Usage(_) => "usage",
            Error::DegenerateFrame { .. } => "degenerate-frame",
            Error::Domain(_) => "domain",
            Error::SingularWarp { .. } => "singular-warp",
            Error::NotSpacelike { .. } => "not-space-like",
            Error::HorizontalSlice { .. } => "horizontal-slice",
            Error::MinimalDirection { .. } => "minimal-direction",
            Error::Constraint { .. } => "constraint",
            Error::Precondition(_) => "precondition",
            Error::Inapplicable(_) => "inapplicable",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
