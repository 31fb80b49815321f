//! Session-oriented monitor service: one event in, one verdict out.
//!
//! [`MonitorService`] owns the loaded specifications and the live sessions.
//! It is exposed over HTTP and a WebSocket stream by [`http::router`] and
//! reached from the chatbot through a [`MonitorLink`].

pub mod http;
mod link;
mod service;

use std::fmt;
use std::str::FromStr;

use chatguard_rml::{Event, Verdict};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use link::{HttpLink, LinkError, LocalLink, MonitorLink};
pub use service::{
    load_spec_dir, LoadError, MonitorService, ServiceOptions, SessionInfo, Subscription,
};

/// How much monitoring a deployment performs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    /// No monitor is contacted.
    None,
    /// Same protocol as `Real`, but every verdict is true.
    Dummy,
    Real,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::None, Level::Dummy, Level::Real];

    pub fn as_str(self) -> &'static str {
        match self {
            Level::None => "none",
            Level::Dummy => "dummy",
            Level::Real => "real",
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Level {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(Level::None),
            "dummy" => Ok(Level::Dummy),
            "real" => Ok(Level::Real),
            other => Err(format!(
                "unknown monitor level `{other}` (expected none, dummy or real)"
            )),
        }
    }
}

/// Verdict payload returned for every event.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictReport {
    pub verdict: Verdict,
    pub currently_accepting: bool,
    /// Human-readable reason. The format is not stable.
    pub explanation: String,
}

impl VerdictReport {
    pub fn is_false(&self) -> bool {
        self.verdict.is_false()
    }
}

/// One logged step of a session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub index: u64,
    pub event: Event,
    #[serde(flatten)]
    pub report: VerdictReport,
}

/// Items delivered to stream subscribers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum StreamItem {
    Entry(LogEntry),
    /// The session was reset; indices restart at zero.
    Reset,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ServiceError {
    #[error("unknown spec `{0}`")]
    UnknownSpec(String),
    #[error("unknown session `{0}`")]
    UnknownSession(String),
    #[error("malformed event: {0}")]
    MalformedEvent(String),
    #[error("monitor overload: {alternatives} alternatives exceed the cap of {cap}")]
    Overload { alternatives: usize, cap: usize },
}

impl ServiceError {
    pub fn kind(&self) -> &'static str {
        match self {
            ServiceError::UnknownSpec(_) => "unknown_spec",
            ServiceError::UnknownSession(_) => "unknown_session",
            ServiceError::MalformedEvent(_) => "malformed_event",
            ServiceError::Overload { .. } => "monitor_overload",
        }
    }
}
