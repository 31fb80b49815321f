//! Generates the spacing property for a minimum distance and shows it
//! blocking a placement that is too close.
//!
//! ```text
//! cargo run --example spacing_rule -- 2
//! cargo run --example spacing_rule -- 2 properties/factory/spacing2.prop
//! ```

use std::collections::BTreeMap;
use std::sync::Arc;

use chatguard::chatbot::{spacing_property, Conversation, Scenario};
use chatguard::monitor::{Level, LocalLink, MonitorService, ServiceOptions};
use chatguard::rml::parse;

fn main() {
    let mut args = std::env::args().skip(1);
    let distance: u32 = args
        .next()
        .map_or(2, |a| a.parse().expect("distance must be a number"));
    let text = spacing_property(distance);
    if let Some(path) = args.next() {
        std::fs::write(&path, &text).expect("cannot write property file");
        println!("wrote {path}");
        return;
    }
    print!("{text}");

    let dir = env!("CARGO_MANIFEST_DIR");
    let mut scenario = Scenario::load(format!("{dir}/scenarios/factory.conf")).expect("scenario");
    scenario.properties.retain(|p| p.name == "add_object");
    scenario.properties.push(chatguard::chatbot::Property {
        name: "spacing".into(),
        path: "generated".into(),
        spec: Arc::new(parse(&text).expect("generated property parses")),
    });
    let scenario = Arc::new(scenario);
    let specs: BTreeMap<_, _> = scenario.specs();
    let monitor = Arc::new(MonitorService::new(specs, ServiceOptions::default()));
    let link = Box::new(LocalLink(monitor));
    let mut conv = Conversation::open(scenario, Level::Real, Some(link)).expect("sessions");

    println!();
    for text in [
        "Add a table in position 4 4",
        "Add a box right of table0",
        "Add a box in position 7 4",
    ] {
        let turn = conv.handle(text);
        println!("> {text}\n  {}", turn.reply);
    }
}
