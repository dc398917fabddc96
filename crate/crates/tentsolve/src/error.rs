//! Error types shared across the solver.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate element {element}: measure {measure:e} below tolerance")]
    SingularGeometry { element: usize, measure: f64 },

    #[error("tent pitching stuck at vertex {vertex} (front time {time:e})")]
    PitchingStuck { vertex: usize, time: f64 },

    #[error("singular tent mass on element {element} at quasi-time {quasi_time} (det {det:e})")]
    SingularMass {
        element: usize,
        quasi_time: f64,
        det: f64,
    },

    #[error("tent task {tent} failed: {source}")]
    TentTask {
        tent: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
