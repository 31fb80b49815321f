//! Monitors a stream of JSON events against a property, one line each.
//!
//! ```text
//! cargo run -p chatguard-rml --example monitor_property
//! cargo run -p chatguard-rml --example monitor_property -- spec.prop < events.jsonl
//! ```

use std::io::BufRead;

use chatguard_rml::{parse, Event, MonitorState};

const SPEC: &str = r#"
// A request is answered before the next one, and a cancelled id is never answered.
type request(id) matches { kind: "request", id: id };
type reply(id) matches { kind: "reply", id: id };
type cancel(id) matches { kind: "cancel", id: id };

Main = (let id { request(id) (reply(id) \/ cancel(id) !reply(id)) })*;
"#;

const EVENTS: &[&str] = &[
    r#"{"kind": "request", "id": 1}"#,
    r#"{"kind": "reply", "id": 1}"#,
    r#"{"kind": "request", "id": 2}"#,
    r#"{"kind": "reply", "id": 3}"#,
];

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (spec, events): (String, Vec<String>) = match args.first() {
        Some(path) => {
            let spec = std::fs::read_to_string(path).expect("cannot read spec");
            let stdin = std::io::stdin();
            (
                spec,
                stdin
                    .lock()
                    .lines()
                    .map_while(Result::ok)
                    .filter(|l| !l.trim().is_empty())
                    .collect(),
            )
        }
        None => (
            SPEC.to_string(),
            EVENTS.iter().map(|s| s.to_string()).collect(),
        ),
    };
    let spec = match parse(&spec) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(2);
        }
    };
    let mut monitor = MonitorState::new(spec);
    for line in events {
        let event = match Event::parse_json(&line) {
            Ok(e) => e,
            Err(e) => {
                println!("{line}  -> rejected: {e}");
                continue;
            }
        };
        let expected = monitor.expected();
        match monitor.advance(&event) {
            Ok(out) => {
                print!("{line}  -> {}", out.verdict.as_str());
                if out.currently_accepting {
                    print!(" (accepting)");
                }
                if monitor.is_violated() {
                    print!("; expected one of {}", expected.join(", "));
                }
                println!();
            }
            Err(e) => println!("{line}  -> {e}"),
        }
    }
}
