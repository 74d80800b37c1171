use hdpg_core::agent::AgentError;
use hdpg_core::envs::EnvError;
use hdpg_core::nn::checkpoint::CheckpointError;
use hdpg_core::replay::ReplayError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Replay(#[from] ReplayError),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    /// Checkpoint and environment disagree on shapes.
    #[error("{0}")]
    Mismatch(String),
    #[error("{0}")]
    Metrics(String),
}

impl HarnessError {
    pub fn kind(&self) -> &'static str {
        match self {
            HarnessError::Config(_) => "config",
            HarnessError::Io(_) => "io",
            HarnessError::Agent(AgentError::Diverged(_)) => "diverged",
            HarnessError::Agent(AgentError::Checkpoint(_)) => "checkpoint",
            HarnessError::Agent(AgentError::Config(_)) => "config",
            HarnessError::Agent(_) => "agent",
            HarnessError::Env(EnvError::Diverged(_)) => "diverged",
            HarnessError::Env(EnvError::InvalidConfig(_)) => "config",
            HarnessError::Env(_) => "env",
            HarnessError::Replay(_) => "replay",
            HarnessError::Checkpoint(_) => "checkpoint",
            HarnessError::Mismatch(_) => "mismatch",
            HarnessError::Metrics(_) => "metrics",
        }
    }

    pub fn message(&self) -> String {
        self.to_string()
    }

    /// `error kind=<kind> message="<message>"` on a single line.
    pub fn one_line(&self) -> String {
        let msg = self
            .message()
            .replace('\\', "\\\\")
            .replace('"', "\\\"")
            .replace('\n', " ");
        format!("error kind={} message=\"{}\"", self.kind(), msg)
    }
}

pub fn io_err(path: &std::path::Path, e: std::io::Error) -> HarnessError {
    HarnessError::Io(format!("{}: {e}", path.display()))
}
