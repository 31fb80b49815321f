#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use chatguard::chatbot::{Conversation, Scenario};
use chatguard::monitor::{Level, LocalLink, MonitorService, ServiceOptions};

pub fn crate_path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(rel)
}

pub fn scenario(name: &str) -> Arc<Scenario> {
    Arc::new(Scenario::load(crate_path(&format!("scenarios/{name}.conf"))).expect("scenario loads"))
}

pub fn local_monitor(scenario: &Scenario, level: Level) -> Arc<MonitorService> {
    Arc::new(MonitorService::new(
        scenario.specs(),
        ServiceOptions {
            level,
            ..ServiceOptions::default()
        },
    ))
}

/// A conversation whose monitor runs in this process.
pub fn local_conversation(scenario: Arc<Scenario>, level: Level) -> Conversation {
    let link = (level != Level::None).then(|| {
        Box::new(LocalLink(local_monitor(&scenario, level)))
            as Box<dyn chatguard::monitor::MonitorLink>
    });
    Conversation::open(scenario, level, link).expect("sessions open")
}

pub fn messages(file: &str) -> Vec<String> {
    chatguard::chatbot::read_messages(crate_path(&format!("data/{file}"))).expect("message file")
}
