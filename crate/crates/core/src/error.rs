use thiserror::Error;

/// Failure modes shared by diff generation, parsing and patching.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EditError {
    #[error("source and target are identical")]
    NoChange,
    #[error("anchor of hunk {hunk} was not found")]
    NoMatch { hunk: usize },
    #[error("anchor of hunk {hunk} matches {count} locations")]
    AmbiguousMatch { hunk: usize, count: usize },
    #[error("malformed diff: {0}")]
    MalformedDiff(String),
    #[error("line {line:?} collides with a search/replace delimiter")]
    DelimiterCollision { line: String },
    #[error("unsupported language `{0}`")]
    UnsupportedLanguage(String),
    #[error("unknown format `{0}`")]
    UnknownFormat(String),
    #[error("token counter unavailable: {0}")]
    CounterUnavailable(String),
}

impl EditError {
    /// Stable machine-readable name of the failure.
    pub fn reason(&self) -> &'static str {
        match self {
            EditError::NoChange => "NoChange",
            EditError::NoMatch { .. } => "NoMatch",
            EditError::AmbiguousMatch { .. } => "AmbiguousMatch",
            EditError::MalformedDiff(_) => "MalformedDiff",
            EditError::DelimiterCollision { .. } => "DelimiterCollision",
            EditError::UnsupportedLanguage(_) => "UnsupportedLanguage",
            EditError::UnknownFormat(_) => "UnknownFormat",
            EditError::CounterUnavailable(_) => "CounterUnavailable",
        }
    }

    pub(crate) fn malformed(msg: impl Into<String>) -> Self {
        EditError::MalformedDiff(msg.into())
    }
}

pub type Result<T, E = EditError> = std::result::Result<T, E>;
