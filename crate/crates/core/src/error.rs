use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScatterError {
    #[error("domain error: {0}")]
    Domain(String),

    /// Coulomb matrix element at zero momentum transfer.
    #[error("Coulomb forward singularity: momentum transfer vanishes")]
    ForwardSingularity,

    #[error("Born series does not converge: term-norm ratio {ratio:.6} at order {order}")]
    NonConvergent { order: usize, ratio: f64 },

    #[error("perturbative order {requested} is not supported (maximum {max})")]
    UnsupportedOrder { requested: usize, max: usize },

    #[error("malformed data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl ScatterError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        ScatterError::Domain(msg.into())
    }

    /// True for failures of the numerics (as opposed to bad input or I/O).
    pub fn is_numeric(&self) -> bool {
        matches!(self, ScatterError::ForwardSingularity | ScatterError::NonConvergent { .. })
    }
}

pub type Result<T> = std::result::Result<T, ScatterError>;
