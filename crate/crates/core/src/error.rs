use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("Fock cutoff {dim} too small: truncated tail probability {tail:.3e} >= tolerance {tail_tol:.3e}")]
    TruncationTooSmall { dim: usize, tail: f64, tail_tol: f64 },

    #[error("degenerate quadrature projection: weight {weight:.3e} below the conditioning floor")]
    DegenerateProjection { weight: f64 },

    #[error("Mandel Q undefined: mean photon number {mean:.3e} is zero")]
    ZeroMeanPhotons { mean: f64 },

    #[error("tomogram grid has no usable columns")]
    EmptyGrid,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed grid file at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
