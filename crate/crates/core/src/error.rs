use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("symbol is not finite at grid frequency index {index}")]
    NonFiniteSymbol { index: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("coefficient does not satisfy the {case} preconditions: {reason}")]
    WrongCase { case: &'static str, reason: String },

    #[error("coefficient is negative ({value:e}) at t = {t}")]
    NegativeCoefficient { t: f64, value: f64 },

    #[error("step size underflow at t = {t} (h = {h:e}); problem is too stiff for the explicit integrator")]
    Stiffness { t: f64, h: f64 },

    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },

    #[error("mode {index} failed: {source}")]
    Mode {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("transform matrix is singular at t = {t} (det = {det:e})")]
    SingularTransform { t: f64, det: f64 },

    #[error("mode {mode} aliases on a grid with {points} points per axis")]
    Aliased { mode: i64, points: usize },

    #[error("configuration invalid:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerical machinery rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Stiffness { .. } | Error::NonFinite { .. } | Error::SingularTransform { .. } => {
                true
            }
            Error::Mode { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
