//! Running a fixed list of messages through a conversation.

use std::io;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::factory::Floor;
use super::wrapper::{Conversation, Turn};

/// One message of a replayed script.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Step {
    /// 1-based position in the script.
    pub index: usize,
    pub elapsed_ms: f64,
    pub turn: Turn,
    pub floor: Floor,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Transcript {
    pub steps: Vec<Step>,
}

impl Transcript {
    /// 1-based indices of messages that got a false verdict.
    pub fn violations(&self) -> Vec<usize> {
        self.steps
            .iter()
            .filter(|s| s.turn.any_false())
            .map(|s| s.index)
            .collect()
    }

    pub fn final_floor(&self) -> Option<&Floor> {
        self.steps.last().map(|s| &s.floor)
    }
}

/// Reads one message per line, skipping blank lines and `#` comments.
pub fn read_messages(path: impl AsRef<Path>) -> io::Result<Vec<String>> {
    Ok(parse_messages(&std::fs::read_to_string(path)?))
}

pub fn parse_messages(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect()
}

/// Sends every message in order and times each one, monitor round trips included.
pub fn replay<S: AsRef<str>>(conversation: &mut Conversation, messages: &[S]) -> Transcript {
    let mut steps = Vec::with_capacity(messages.len());
    for (i, m) in messages.iter().enumerate() {
        let start = Instant::now();
        let turn = conversation.handle(m.as_ref());
        let elapsed_ms = start.elapsed().as_secs_f64() * 1000.0;
        steps.push(Step {
            index: i + 1,
            elapsed_ms,
            turn,
            floor: conversation.floor(),
        });
    }
    Transcript { steps }
}
