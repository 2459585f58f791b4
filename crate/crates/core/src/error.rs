use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("UAV altitude {h_u} m is outside the model range ({min} m, {max} m)")]
    AltitudeOutOfModelRange { h_u: f64, min: f64, max: f64 },

    #[error("carrier frequency {f_ghz} GHz is outside the absorption fit range 275-400 GHz")]
    FrequencyOutsideFitRange { f_ghz: f64 },

    #[error("array-gain quadrature did not converge: {coarse_db} dBi vs {fine_db} dBi after refinement")]
    IntegrationNotConverged { coarse_db: f64, fine_db: f64 },

    #[error("invalid propulsion parameters: {0}")]
    InvalidPropulsionParams(String),

    #[error("invalid compute parameters: {0}")]
    InvalidComputeParams(String),

    #[error("total processing rate is zero, the workload can never complete")]
    ZeroTotalRate,

    #[error("move-and-return time has no solution: {0}")]
    NoSolution(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{0}")]
    Io(String),
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    /// Errors caused by the input (bad config, out-of-model geometry) as
    /// opposed to failures while running.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::AltitudeOutOfModelRange { .. }
                | Error::FrequencyOutsideFitRange { .. }
                | Error::InvalidPropulsionParams(_)
                | Error::InvalidComputeParams(_)
                | Error::Validation(_)
                | Error::Parse { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
