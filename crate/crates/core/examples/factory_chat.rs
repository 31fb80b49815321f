//! The 12-message factory conversation through the decision wrapper, with
//! the monitor in the same process.
//!
//! ```text
//! cargo run --example factory_chat
//! ```

use std::sync::Arc;

use chatguard::chatbot::{read_messages, replay, Conversation, Scenario};
use chatguard::harness::render_floor;
use chatguard::monitor::{Level, LocalLink, MonitorService, ServiceOptions};

fn main() {
    let dir = env!("CARGO_MANIFEST_DIR");
    let scenario =
        Arc::new(Scenario::load(format!("{dir}/scenarios/factory_script.conf")).expect("scenario"));
    let monitor = Arc::new(MonitorService::new(
        scenario.specs(),
        ServiceOptions::default(),
    ));
    let mut conv = Conversation::open(scenario, Level::Real, Some(Box::new(LocalLink(monitor))))
        .expect("sessions");

    let messages = read_messages(format!("{dir}/data/test_input.txt")).expect("messages");
    let transcript = replay(&mut conv, &messages);
    for step in &transcript.steps {
        let verdict = step.turn.verdict().map_or("none", |v| v.as_str());
        println!(
            "{:>2}. {:<36} [{verdict}] {}",
            step.index, step.turn.utterance, step.turn.reply
        );
        if step.index == 8 {
            print!("{}", render_floor(&step.floor));
        }
    }
    println!("violations: {:?}", transcript.violations());
    println!("objects left: {}", conv.state().len());
}
