//! Runs the monitor service on a local port and talks to it over HTTP.
//!
//! ```text
//! cargo run --example monitor_service
//! ```

use std::sync::Arc;

use chatguard::chatbot::Scenario;
use chatguard::harness::{Stack, StackConfig};
use chatguard::monitor::{HttpLink, Level, MonitorLink};
use chatguard::rml::Event;

fn main() {
    let dir = env!("CARGO_MANIFEST_DIR");
    let scenario = Scenario::load(format!("{dir}/scenarios/factory.conf")).expect("scenario");
    let stack = Stack::start(StackConfig::new(Arc::new(scenario), Level::Real)).expect("services");
    let url = stack.monitor_url().expect("real level runs a monitor");
    println!("monitor at {url}");

    let mut link = HttpLink::new(url);
    let session = link.create_session("add_object").expect("session");
    println!("session {session}");

    let events = [
        r#"{"sender": "user", "receiver": "bot", "intent": {"name": "add_object"}, "slots": {"horizontal": 3, "vertical": 5}}"#,
        r#"{"sender": "bot", "receiver": "user", "last_action": "utter_add_object", "slots": {"object_id": "robot0"}}"#,
        r#"{"sender": "user", "receiver": "bot", "intent": {"name": "add_object"}, "slots": {"horizontal": 3, "vertical": 5}}"#,
    ];
    for text in events {
        let event = Event::parse_json(text).expect("valid event");
        let report = link.send_event(&session, &event).expect("monitor reply");
        println!(
            "{} -> {} ({})",
            text,
            report.verdict.as_str(),
            report.explanation
        );
    }

    link.reset_session(&session).expect("reset");
    println!(
        "after reset: {:?}",
        stack
            .monitor()
            .unwrap()
            .session_info(&session)
            .unwrap()
            .last
    );
}
