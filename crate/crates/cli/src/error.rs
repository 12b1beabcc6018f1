use afg_core::nn::NnError;

/// Failure categories with stable exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Other,
    Config,
    Data,
    Diverged,
}

impl Kind {
    pub fn exit_code(self) -> u8 {
        match self {
            Kind::Other => 1,
            Kind::Config => 2,
            Kind::Data => 3,
            Kind::Diverged => 4,
        }
    }
}

#[derive(Debug)]
pub struct Failure {
    pub kind: Kind,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn config(error: impl Into<anyhow::Error>) -> Self {
        Self { kind: Kind::Config, error: error.into() }
    }

    pub fn data(error: impl Into<anyhow::Error>) -> Self {
        Self { kind: Kind::Data, error: error.into() }
    }

    pub fn other(error: impl Into<anyhow::Error>) -> Self {
        Self { kind: Kind::Other, error: error.into() }
    }

    /// Training failures: divergence has its own code.
    pub fn training(error: NnError) -> Self {
        let kind = match error {
            NnError::Diverged { .. } => Kind::Diverged,
            _ => Kind::Other,
        };
        Self { kind, error: error.into() }
    }
}

pub type CliResult<T> = Result<T, Failure>;

/// Attaches a failure kind and a context message to any error.
pub trait OrFail<T> {
    fn or_config(self, context: impl FnOnce() -> String) -> CliResult<T>;
    fn or_data(self, context: impl FnOnce() -> String) -> CliResult<T>;
    fn or_other(self, context: impl FnOnce() -> String) -> CliResult<T>;
}

impl<T, E> OrFail<T> for Result<T, E>
where
    E: std::error::Error + Send + Sync + 'static,
{
    fn or_config(self, context: impl FnOnce() -> String) -> CliResult<T> {
        self.map_err(|e| Failure::config(anyhow::Error::new(e).context(context())))
    }

    fn or_data(self, context: impl FnOnce() -> String) -> CliResult<T> {
        self.map_err(|e| Failure::data(anyhow::Error::new(e).context(context())))
    }

    fn or_other(self, context: impl FnOnce() -> String) -> CliResult<T> {
        self.map_err(|e| Failure::other(anyhow::Error::new(e).context(context())))
    }
}
