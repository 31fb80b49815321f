//! Operator tooling: service launcher, chat client, scripted runs and reports.

mod bench;
mod chat;
mod client;
mod report;
mod serve;
pub mod stats;

pub use bench::{
    csv_path, run_test, Expectation, HarnessError, IndexStats, IterationResult, LatencySummary,
    MessageRecord, TestOptions, TestRun,
};
pub use chat::{chat_loop, render_floor, render_reply};
pub use client::{ChatClient, ClientError, Timed};
pub use report::{BenchReport, LevelStats};
pub use serve::{ServeError, Stack, StackConfig, CHATBOT_LISTEN_ENV, MONITOR_LISTEN_ENV};
