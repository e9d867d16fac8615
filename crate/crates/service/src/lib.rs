//! Session server for reaching experiments.
//!
//! A [`Session`] walks one subject through a trial schedule. The server owns
//! the clock: client input only sets the latest wheel angle and each server
//! tick applies it through [`Session::drive_tick`]. Finished trials are
//! appended to `<root>/<session>/log.jsonl` and synced before the next trial
//! starts, so a crash loses at most the trial in flight.

pub mod results;
pub mod server;
pub mod session;
pub mod store;
pub mod wire;

pub use results::{ConditionFit, ResultsBundle};
pub use session::{
    load_session_files, open_session, replay_session, ReplayedTrial, Session, SessionConfig, TickOutput,
};
pub use store::{export_results, SessionStore};
pub use wire::{WireMessage, PROTOCOL_VERSION};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/service.md")]
    mod service {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error(transparent)]
    Core(#[from] dess::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("protocol: {0}")]
    Protocol(String),
    #[error("unknown session `{0}`")]
    UnknownSession(String),
    #[error("no trial is running")]
    NoActiveTrial,
    #[error("a trial is already running")]
    TrialActive,
    #[error("schedule is complete")]
    ScheduleDone,
}

pub type Result<T, E = ServiceError> = std::result::Result<T, E>;
