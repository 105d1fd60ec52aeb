use thiserror::Error;

/// Result type used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by series handling, model fitting, combining, and the
/// experiment harness.
#[derive(Error, Debug)]
pub enum Error {
    /// A length or size precondition failed.
    #[error("size error: {0}")]
    Size(String),

    /// A value was outside the domain of an operation (log of a nonpositive
    /// number, zero actual under MAPE, and similar).
    #[error("domain error: {0}")]
    Domain(String),

    /// A linear system had no unique solution.
    #[error("singular system: {0}")]
    Singular(String),

    /// An iterative optimizer failed to converge.
    #[error("optimization failed: {0}")]
    Optimization(String),

    /// Invalid configuration value or combination.
    #[error("configuration error: {0}")]
    Config(String),

    /// A forecast matrix did not line up with the weights it was applied to.
    #[error("alignment error: {0}")]
    Alignment(String),

    /// Input file could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    /// Underlying I/O failure.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// A failure wrapped with the pipeline stage it occurred in.
    #[error("stage {stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Wrap an error with the name of the pipeline stage that produced it.
    pub fn in_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
