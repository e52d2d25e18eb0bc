use thiserror::Error;

pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RESOLUTION: i32 = 3;
pub const EXIT_BLOWUP: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] eulerlab::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use eulerlab::Error as E;
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Core(E::InvalidInput(_) | E::InvalidExponent(_) | E::InvalidBand(_) | E::Parse(_) | E::Json(_)) => {
                EXIT_CONFIG
            }
            CliError::Core(E::Resolution(_)) => EXIT_RESOLUTION,
            CliError::Core(E::Blowup { .. }) => EXIT_BLOWUP,
            CliError::Core(_) | CliError::Io(_) => EXIT_FAILURE,
        }
    }
}
