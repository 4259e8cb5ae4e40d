use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("numerical blow-up at t = {time}: sup|omega| grew by {growth:.3}x in one step")]
    BlowUp { time: f64, growth: f64 },

    #[error("non-finite value produced by {0}")]
    NonFinite(&'static str),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("bad file format in {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("checksum mismatch for {0}")]
    Checksum(PathBuf),

    #[error("{0} self-test check(s) failed")]
    Selftest(usize),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) | Error::Config(_) | Error::Checksum(_) => 1,
            Error::BlowUp { .. } | Error::NonFinite(_) | Error::Selftest(_) => 2,
            Error::Io { .. } => 3,
            Error::Format { .. } => 1,
        }
    }

    /// Short machine-readable kind tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid_input",
            Error::Config(_) => "invalid_config",
            Error::BlowUp { .. } => "blow_up",
            Error::NonFinite(_) => "non_finite",
            Error::Io { .. } => "io",
            Error::Format { .. } => "format",
            Error::Checksum(_) => "checksum",
            Error::Selftest(_) => "selftest",
        }
    }
}
