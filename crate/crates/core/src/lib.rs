//! Runtime-verified chatbot services.
//!
//! * [`monitor`]: a session-based monitor service over trace-expression
//!   specifications, in process or over HTTP and WebSocket.
//! * [`chatbot`]: a grid-world chatbot whose intents and actions are checked
//!   by the monitor before they take effect.
//! * [`harness`]: service launcher, scripted runs and overhead reports.

pub mod chatbot;
pub mod config;
pub mod harness;
pub mod monitor;

pub use chatguard_rml as rml;
