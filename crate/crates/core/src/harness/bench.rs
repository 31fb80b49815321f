//! Scripted runs: the same conversation replayed `n` times against a
//! chatbot service, one CSV of per-message latencies per iteration.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::client::{ChatClient, ClientError};
use super::stats::{median, percentile};
use crate::monitor::Level;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("cannot write {path}: {message}")]
    Output { path: PathBuf, message: String },
    #[error("cannot read {path}: {message}")]
    Input { path: PathBuf, message: String },
    #[error(transparent)]
    Client(#[from] ClientError),
    #[error("{0}")]
    Report(String),
}

/// One row of an iteration CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MessageRecord {
    pub iteration: usize,
    pub message_index: usize,
    pub utterance: String,
    pub latency_ms: f64,
    /// `true`, `false`, `inconclusive`, `none` (no monitor) or `error`.
    pub verdict: String,
}

/// Which false verdicts a run is allowed to see.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Expectation {
    #[default]
    NoViolations,
    /// At least one violation in every iteration.
    AnyViolation,
    /// Exactly these 1-based message indices are violated in every iteration.
    At(Vec<usize>),
}

impl Expectation {
    pub fn accepts(&self, violations: &[usize]) -> bool {
        match self {
            Expectation::NoViolations => violations.is_empty(),
            Expectation::AnyViolation => !violations.is_empty(),
            Expectation::At(expected) => violations == expected.as_slice(),
        }
    }
}

impl FromStr for Expectation {
    type Err = String;

    /// `""` or `any` for any violation, otherwise comma-separated indices.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() || s == "any" {
            return Ok(Expectation::AnyViolation);
        }
        let mut idx = s
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<usize>()
                    .map_err(|_| format!("bad message index `{p}`"))
            })
            .collect::<Result<Vec<_>, _>>()?;
        idx.sort_unstable();
        idx.dedup();
        Ok(Expectation::At(idx))
    }
}

#[derive(Debug, Clone)]
pub struct TestOptions {
    pub iterations: usize,
    pub level: Level,
    pub out_dir: PathBuf,
    pub expect: Expectation,
}

#[derive(Debug, Clone, Serialize)]
pub struct IterationResult {
    pub iteration: usize,
    pub records: Vec<MessageRecord>,
    pub violations: Vec<usize>,
    pub error: Option<String>,
    pub csv: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexStats {
    pub message_index: usize,
    pub median_ms: f64,
    pub p95_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatencySummary {
    pub per_index: Vec<IndexStats>,
    pub median_ms: Option<f64>,
    pub p95_ms: Option<f64>,
    /// Over messages 2.. only, so a slow first message does not dominate.
    pub median_ms_excluding_first: Option<f64>,
    pub p95_ms_excluding_first: Option<f64>,
}

impl LatencySummary {
    pub fn from_records<'a>(records: impl IntoIterator<Item = &'a MessageRecord>) -> Self {
        let mut by_index: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
        for r in records {
            by_index
                .entry(r.message_index)
                .or_default()
                .push(r.latency_ms);
        }
        let per_index = by_index
            .iter()
            .map(|(&i, xs)| IndexStats {
                message_index: i,
                median_ms: median(xs).unwrap_or(0.0),
                p95_ms: percentile(xs, 95.0).unwrap_or(0.0),
            })
            .collect();
        let all: Vec<f64> = by_index.values().flatten().copied().collect();
        let rest: Vec<f64> = by_index
            .range(2..)
            .flat_map(|(_, xs)| xs.iter().copied())
            .collect();
        LatencySummary {
            per_index,
            median_ms: median(&all),
            p95_ms: percentile(&all, 95.0),
            median_ms_excluding_first: median(&rest),
            p95_ms_excluding_first: percentile(&rest, 95.0),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TestRun {
    pub level: Level,
    pub expect_description: String,
    pub iterations: Vec<IterationResult>,
    pub summary: LatencySummary,
    /// Every iteration produced the same verdict sequence.
    pub deterministic: bool,
    pub passed: bool,
}

impl fmt::Display for TestRun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ms = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.3}"));
        writeln!(
            f,
            "level {}: {} iterations, expecting {}",
            self.level,
            self.iterations.len(),
            self.expect_description
        )?;
        writeln!(f, "{:>5}  {:>10}  {:>10}", "msg", "median_ms", "p95_ms")?;
        for s in &self.summary.per_index {
            writeln!(
                f,
                "{:>5}  {:>10.3}  {:>10.3}",
                s.message_index, s.median_ms, s.p95_ms
            )?;
        }
        writeln!(
            f,
            "all messages:       median {} p95 {}",
            ms(self.summary.median_ms),
            ms(self.summary.p95_ms)
        )?;
        writeln!(
            f,
            "excluding message 1: median {} p95 {}",
            ms(self.summary.median_ms_excluding_first),
            ms(self.summary.p95_ms_excluding_first)
        )?;
        for it in &self.iterations {
            if let Some(e) = &it.error {
                writeln!(f, "iteration {} aborted: {e}", it.iteration)?;
            } else if !it.violations.is_empty() {
                writeln!(
                    f,
                    "iteration {} violations at {:?}",
                    it.iteration, it.violations
                )?;
            }
        }
        if !self.deterministic {
            writeln!(f, "verdicts differ between iterations")?;
        }
        write!(f, "{}", if self.passed { "PASS" } else { "FAIL" })
    }
}

/// `<dir>/<level>-iterNNN.csv`
pub fn csv_path(dir: &Path, level: Level, iteration: usize) -> PathBuf {
    dir.join(format!("{level}-iter{iteration:03}.csv"))
}

fn verdict_label(reply: &crate::chatbot::MessageReply) -> String {
    match reply.turn.verdict() {
        Some(v) => v.as_str().to_string(),
        None if !reply.turn.monitor_errors.is_empty() => "error".into(),
        None => "none".into(),
    }
}

fn write_csv(path: &Path, records: &[MessageRecord]) -> Result<(), HarnessError> {
    let err = |e: &dyn fmt::Display| HarnessError::Output {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let mut w = csv::Writer::from_path(path).map_err(|e| err(&e))?;
    for r in records {
        w.serialize(r).map_err(|e| err(&e))?;
    }
    w.flush().map_err(|e| err(&e))
}

fn run_iteration(
    client: &ChatClient,
    messages: &[String],
    level: Level,
    iteration: usize,
) -> (Vec<MessageRecord>, Vec<usize>, Option<String>) {
    let mut records = Vec::with_capacity(messages.len());
    let mut violations = Vec::new();
    let conv = match client.open(Some(level)) {
        Ok(c) => c,
        Err(e) => return (records, violations, Some(e.to_string())),
    };
    for (i, text) in messages.iter().enumerate() {
        match client.send(&conv.id, text) {
            Ok(timed) => {
                let verdict = verdict_label(&timed.value);
                if verdict == "false" {
                    violations.push(i + 1);
                }
                records.push(MessageRecord {
                    iteration,
                    message_index: i + 1,
                    utterance: text.clone(),
                    latency_ms: timed.latency.as_secs_f64() * 1000.0,
                    verdict,
                });
            }
            Err(e) => return (records, violations, Some(format!("message {}: {e}", i + 1))),
        }
    }
    let _ = client.close(&conv.id);
    (records, violations, None)
}

/// Replays `messages` on a fresh conversation `iterations` times.
///
/// The run passes when no iteration aborted and every iteration's
/// violations satisfy the expectation.
pub fn run_test(
    client: &ChatClient,
    messages: &[String],
    opts: &TestOptions,
) -> Result<TestRun, HarnessError> {
    if opts.iterations > 0 {
        std::fs::create_dir_all(&opts.out_dir).map_err(|e| HarnessError::Output {
            path: opts.out_dir.clone(),
            message: e.to_string(),
        })?;
    }
    let mut iterations = Vec::with_capacity(opts.iterations);
    for iteration in 1..=opts.iterations {
        let (records, violations, error) = run_iteration(client, messages, opts.level, iteration);
        let csv = csv_path(&opts.out_dir, opts.level, iteration);
        write_csv(&csv, &records)?;
        iterations.push(IterationResult {
            iteration,
            records,
            violations,
            error,
            csv,
        });
    }
    let summary = LatencySummary::from_records(iterations.iter().flat_map(|it| &it.records));
    let verdicts = |it: &IterationResult| {
        it.records
            .iter()
            .map(|r| r.verdict.clone())
            .collect::<Vec<_>>()
    };
    let deterministic = iterations
        .windows(2)
        .all(|w| verdicts(&w[0]) == verdicts(&w[1]));
    let passed = iterations
        .iter()
        .all(|it| it.error.is_none() && opts.expect.accepts(&it.violations));
    let expect_description = match &opts.expect {
        Expectation::NoViolations => "no violations".to_string(),
        Expectation::AnyViolation => "violations".to_string(),
        Expectation::At(idx) => format!("violations at {idx:?}"),
    };
    Ok(TestRun {
        level: opts.level,
        expect_description,
        iterations,
        summary,
        deterministic,
        passed,
    })
}
