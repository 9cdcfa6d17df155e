use thiserror::Error;

/// Errors raised by estimation, inference and simulation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("inadmissible break dates {dates:?}: {reason}")]
    InadmissibleDates { dates: Vec<usize>, reason: String },

    #[error("rank-deficient design: {0}")]
    RankDeficient(String),

    #[error("no admissible date survived the rank checks")]
    EmptyProfile,

    #[error("cannot place {breaks} breaks in {len} observations with minimum segment length {min_len}")]
    InfeasibleSegmentation {
        breaks: usize,
        len: usize,
        min_len: usize,
    },

    #[error("regime {regime} is degenerate: {reason}")]
    DegenerateRegime { regime: usize, reason: String },

    #[error("limit-law grid too small: argmax on the boundary in {boundary_fraction:.4} of paths after {doublings} doublings")]
    GridTooSmall {
        boundary_fraction: f64,
        doublings: usize,
    },

    #[error("sample is empty")]
    EmptySample,

    #[error("prior support does not match the profile dates")]
    SupportMismatch,

    #[error("invalid loss: {0}")]
    InvalidLoss(String),

    #[error("degenerate Bai scale factor {0}")]
    DegenerateScale(f64),

    #[error("no tabulated sup-Wald critical value for q={q}, trimming={trimming}, alpha={alpha}")]
    MissingCriticalValue { q: usize, trimming: f64, alpha: f64 },

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error: {0}")]
    Io(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    pub(crate) fn at_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Innermost error, with stage labels stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| e.at_stage(stage))
    }
}
