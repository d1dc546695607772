use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("simulation error: {0}")]
    Simulation(hhl_core::Error),
    #[error("fit error: {0}")]
    Fit(hhl_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 1,
            HarnessError::Simulation(_) | HarnessError::Io(_) => 2,
            HarnessError::Fit(_) => 3,
        }
    }
}

impl From<hhl_core::Error> for HarnessError {
    fn from(e: hhl_core::Error) -> Self {
        use hhl_core::Error as E;
        match e {
            E::Fit(_)
            | E::RankDeficient { .. }
            | E::NoPostselectedCounts { .. }
            | E::MissingData(_)
            | E::ZeroTrace => HarnessError::Fit(e),
            _ => HarnessError::Simulation(e),
        }
    }
}
