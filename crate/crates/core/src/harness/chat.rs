//! Terminal chat: one line in, reply, verdicts and floor out.

use std::io::{self, BufRead, Write};

use super::client::{ChatClient, ClientError};
use crate::chatbot::{Floor, MessageReply};
use crate::monitor::Level;

/// Grid with one letter per object, `.` for free cells, and a legend.
///
/// ```
/// use chatguard::chatbot::{Floor, FloorObject};
/// use chatguard::harness::render_floor;
///
/// let floor = Floor {
///     width: 3,
///     height: 2,
///     objects: vec![FloorObject { id: "robot1".into(), object_type: "robot".into(), x: 1, y: 1 }],
/// };
/// assert_eq!(render_floor(&floor), "   0 1 2\n0  . . .\n1  . R .\nR robot1 (1,1)\n");
/// ```
pub fn render_floor(floor: &Floor) -> String {
    let mut out = String::from("  ");
    for x in 0..floor.width {
        out.push_str(&format!(" {}", x % 10));
    }
    out.push('\n');
    for y in 0..floor.height {
        out.push_str(&format!("{:<2}", y % 100));
        for x in 0..floor.width {
            let c = floor
                .at(x, y)
                .and_then(|o| o.object_type.chars().next())
                .map_or('.', |c| c.to_ascii_uppercase());
            out.push(' ');
            out.push(c);
        }
        out.push('\n');
    }
    for o in &floor.objects {
        let letter = o
            .object_type
            .chars()
            .next()
            .map_or('?', |c| c.to_ascii_uppercase());
        out.push_str(&format!("{letter} {} ({},{})\n", o.id, o.x, o.y));
    }
    out
}

/// Reply, one line per property verdict and the floor.
pub fn render_reply(reply: &MessageReply) -> String {
    let mut out = String::new();
    let marker = if reply.turn.any_false() { "!! " } else { "" };
    out.push_str(&format!("bot> {marker}{}\n", reply.turn.reply));
    for v in &reply.turn.verdicts {
        out.push_str(&format!(
            "     [{}] {} on {}: {}\n",
            v.report.verdict.as_str(),
            v.property,
            v.event,
            v.report.explanation
        ));
    }
    for e in &reply.turn.monitor_errors {
        out.push_str(&format!("     [error] {e}\n"));
    }
    out.push_str(&render_floor(&reply.floor));
    out
}

/// Reads utterances until end of input.
pub fn chat_loop(
    client: &ChatClient,
    level: Option<Level>,
    input: impl BufRead,
    mut output: impl Write,
) -> Result<(), ClientError> {
    let io_err = |e: io::Error| ClientError::Unreachable {
        url: "terminal".into(),
        message: e.to_string(),
    };
    let conv = client.open(level)?;
    writeln!(
        output,
        "conversation {} (monitor: {})",
        conv.id, conv.monitor
    )
    .map_err(io_err)?;
    for line in input.lines() {
        let line = line.map_err(io_err)?;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        let reply = client.send(&conv.id, text)?;
        output
            .write_all(render_reply(&reply.value).as_bytes())
            .map_err(io_err)?;
        output.flush().map_err(io_err)?;
    }
    let _ = client.close(&conv.id);
    Ok(())
}
