use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("simulation fault on lane {lane} (handler {handler}): {message}")]
    Simulation {
        lane: u32,
        handler: u16,
        message: String,
    },
    #[error("fit failed: {0}")]
    Fit(String),
    #[error("topology error: {0}")]
    Topology(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

impl Error {
    /// Stable short identifier, used for machine-readable error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Capacity(_) => "capacity",
            Error::Parameter(_) => "parameter",
            Error::Format(_) => "format",
            Error::InsufficientData(_) => "insufficient_data",
            Error::Simulation { .. } => "simulation",
            Error::Fit(_) => "fit",
            Error::Topology(_) => "topology",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
            Error::Toml(_) => "toml",
        }
    }
}
