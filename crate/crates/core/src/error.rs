use thiserror::Error;

/// Crate-wide error type. Variants are grouped by how the CLI maps them to
/// exit codes: configuration (2), data (3) and numeric (4).
#[derive(Debug, Error)]
pub enum Error {
    // --- configuration errors ---
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    // --- data errors ---
    #[error("duplicate document id: {0}")]
    DuplicateId(String),
    #[error("document id {0:?} contains a comma or line break")]
    InvalidDocumentId(String),
    #[error("all documents are empty after preprocessing")]
    AllDocumentsEmpty,
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("token {0:?} is not in the embedding vocabulary")]
    MissingToken(String),
    #[error("similarity requires at least two documents")]
    SingleDocument,
    #[error("word {0:?} has zero document frequency")]
    WordWithZeroDf(String),
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error("ground truth does not cover document {0:?}")]
    TruthIncomplete(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed {kind} file {path}: {detail}")]
    Parse {
        kind: &'static str,
        path: String,
        detail: String,
    },

    // --- numeric errors ---
    #[error("row {0} is not a probability distribution")]
    NotADistribution(usize),
    #[error("matrix is not symmetric (max asymmetry {0:.3e})")]
    NotSymmetric(f64),
    #[error("eigensolver failed to converge within {0} iterations")]
    ConvergenceFailure(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("k-means needs at least k points ({points} points, k={k})")]
    TooFewPoints { points: usize, k: usize },
    #[error("non-finite feature value at row {row}, column {col}")]
    NonFiniteFeature { row: usize, col: usize },
    #[error("silhouette is undefined for a single cluster")]
    SingleCluster,

    // --- stage context wrapper ---
    #[error("stage {stage} failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

/// Exit-code class of an error, matching the CLI contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Data,
    Numeric,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            InvalidConfig(_) => ErrorClass::Config,
            DuplicateId(_) | InvalidDocumentId(_) | AllDocumentsEmpty | EmptyCorpus | MissingToken(_)
            | SingleDocument | WordWithZeroDf(_) | EmptyInput(_) | TruthIncomplete(_)
            | Io { .. } | Parse { .. } => ErrorClass::Data,
            NotADistribution(_) | NotSymmetric(_) | ConvergenceFailure(_)
            | DimensionMismatch(_) | TooFewPoints { .. } | NonFiniteFeature { .. }
            | SingleCluster => ErrorClass::Numeric,
            Stage { source, .. } => source.class(),
        }
    }

    /// Attach a stage name to an error (pipeline context).
    pub fn in_stage(self, stage: &'static str) -> Self {
        match self {
            already @ Error::Stage { .. } => already,
            other => Error::Stage {
                stage,
                source: Box::new(other),
            },
        }
    }

    /// Process exit code for the CLI: 2 config, 3 data, 4 numeric.
    pub fn exit_code(&self) -> i32 {
        match self.class() {
            ErrorClass::Config => 2,
            ErrorClass::Data => 3,
            ErrorClass::Numeric => 4,
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
