use hle_core::asymptotics::AsymptoticsError;
use hle_core::evolve::EvolveError;
use hle_core::io::IoError;
use hle_core::params::ParamsError;
use hle_core::shooter::ShootError;
use hle_core::spectrum::SpectrumError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("refused: {0}")]
    Precondition(String),
    #[error("missing artifact {0}")]
    MissingArtifact(String),
    #[error(transparent)]
    Shoot(ShootError),
    #[error(transparent)]
    Evolve(EvolveError),
    #[error("property violated: {}", .0.join(", "))]
    Property(Vec<String>),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Table(#[from] IoError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// Process exit status for this failure class.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Precondition(_) | CliError::MissingArtifact(_) => 2,
            CliError::Shoot(e) => match e {
                ShootError::Params(_) | ShootError::Precondition(_) | ShootError::Xi(_) => 2,
                ShootError::NoDichotomy(_)
                | ShootError::MaxIter { .. }
                | ShootError::Stalled { .. }
                | ShootError::TailNotAsymptotic { .. } => 3,
                ShootError::Stiff(_) | ShootError::SeriesStart { .. } => 4,
            },
            CliError::Evolve(e) => match e {
                EvolveError::BlowUp(_) => 5,
                EvolveError::Config(_)
                | EvolveError::Grid(_)
                | EvolveError::Params(_)
                | EvolveError::TooFewNodes(_) => 2,
                EvolveError::Shoot(s) => CliError::Shoot(s.clone()).exit_code(),
                EvolveError::Singular(_) | EvolveError::Newton(_) | EvolveError::Length { .. } => 4,
            },
            CliError::Property(_) => 6,
            CliError::Io(_) | CliError::Table(_) | CliError::Csv(_) | CliError::Json(_) => 1,
        }
    }
}

impl From<ShootError> for CliError {
    fn from(e: ShootError) -> Self {
        CliError::Shoot(e)
    }
}

impl From<EvolveError> for CliError {
    fn from(e: EvolveError) -> Self {
        match e {
            EvolveError::Shoot(s) => CliError::Shoot(s),
            other => CliError::Evolve(other),
        }
    }
}

impl From<ParamsError> for CliError {
    fn from(e: ParamsError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<SpectrumError> for CliError {
    fn from(e: SpectrumError) -> Self {
        CliError::Precondition(e.to_string())
    }
}

impl From<AsymptoticsError> for CliError {
    fn from(e: AsymptoticsError) -> Self {
        match e {
            AsymptoticsError::TailTooShort { .. } => CliError::Property(vec![format!("fit: {e}")]),
            other => CliError::Precondition(other.to_string()),
        }
    }
}
