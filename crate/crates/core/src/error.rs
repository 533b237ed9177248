use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("evaluation at distance {distance:e} from a point source (minimum {minimum:e})")]
    SingularPoint { distance: f64, minimum: f64 },

    #[error("point is not on the surface (level {level:e})")]
    OffSurface { level: f64 },

    #[error("point is within the exclusion zone of the surface (level {level:e}, limit {limit:e})")]
    TooCloseToSurface { level: f64, limit: f64 },

    #[error("point lies on an interface (level {level:e} on interface {interface})")]
    OnInterface { interface: usize, level: f64 },

    #[error("source geometry violated: {0}")]
    SourceGeometry(String),

    #[error("retarded-time solve did not converge (residual {residual:e})")]
    RetardedTimeNonConvergence { residual: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("degenerate quadrature: {0}")]
    DegenerateQuadrature(String),

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },
}

impl Error {
    /// True for failures of a numerical procedure rather than of its inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::RetardedTimeNonConvergence { .. })
    }
}
