use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    Geometry(String),

    /// The angular mean of a weight is (numerically) zero somewhere inside
    /// the reconstruction mask.
    #[error("degenerate weight: |w0| = {value:.3e} below {threshold:.3e} at pixel ({i}, {j})")]
    WeightDegenerate {
        i: usize,
        j: usize,
        value: f64,
        threshold: f64,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("noise injection: {0}")]
    Noise(String),

    #[error("malformed array file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
