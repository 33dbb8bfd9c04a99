use thiserror::Error;

/// Errors raised by channel generation, beamformer design, and the harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("dimension guard: {elements} complex entries exceeds the cap of {cap}")]
    DimensionOverflow { elements: u128, cap: u128 },

    #[error("rank deficiency: {0}")]
    RankDeficient(String),

    #[error("cannot normalize a zero beamformer product")]
    ZeroProduct,

    #[error("amplitude {0} is outside the double phase shifter range [0, 2]")]
    PhaseSplitDomain(f64),

    #[error("empty mapping set for RF chain {0}")]
    EmptyGroup(usize),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("spec parse error at line {line}: {message}")]
    SpecParse { line: usize, message: String },

    #[error("result schema mismatch: {0}")]
    Schema(String),

    #[error("join failure: {0}")]
    Join(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Short machine-readable tag used in result rows and CLI error lines.
    pub fn tag(&self) -> &'static str {
        match self {
            Error::InvalidConfig(_) => "invalid-config",
            Error::DimensionMismatch(_) => "dimension-mismatch",
            Error::DimensionOverflow { .. } => "dimension-overflow",
            Error::RankDeficient(_) => "rank-deficient",
            Error::ZeroProduct => "zero-product",
            Error::PhaseSplitDomain(_) => "phase-split-domain",
            Error::EmptyGroup(_) => "empty-group",
            Error::Numerical(_) => "numerical",
            Error::SpecParse { .. } => "spec-parse",
            Error::Schema(_) => "schema",
            Error::Join(_) => "join",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
