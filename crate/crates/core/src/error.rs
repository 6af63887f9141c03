use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {field}: {reason}")]
    Config { field: &'static str, reason: String },

    #[error("failed to parse configuration: {0}")]
    Parse(String),

    #[error("{0}")]
    Domain(String),

    #[error("eigensolver failed on station {station}")]
    Eigen { station: usize },

    #[error("singular observation covariance at station {station}")]
    SingularCovariance { station: usize },

    #[error("zero-forcing precoder rank failure: condition number {condition:e}")]
    RankDeficient { condition: f64 },

    #[error("zero channel energy, NMSE undefined")]
    ZeroEnergy,

    #[error("Lloyd-Max iteration did not converge for B = {bits}")]
    NoConvergence { bits: u32 },

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn at(self, stage: &'static str) -> Self {
        Error::Stage { stage, source: Box::new(self) }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
