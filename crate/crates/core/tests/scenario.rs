use chatguard::chatbot::{
    spacing_property, Classifier, Entity, NluResult, Scenario, ScenarioError,
};
use chatguard::config::Config;
use chatguard::harness::StackConfig;
use chatguard::monitor::Level;
use proptest::prelude::*;

mod common;
use common::*;

#[test]
fn shipped_spacing_files_match_the_generator() {
    for (file, d) in [("spacing.prop", 1), ("spacing2.prop", 2)] {
        let text =
            std::fs::read_to_string(crate_path(&format!("properties/factory/{file}"))).unwrap();
        assert_eq!(text, spacing_property(d), "{file}");
    }
}

#[test]
fn shipped_scenarios_load() {
    for (name, props) in [("factory", 3), ("factory_script", 3), ("demo", 4)] {
        let sc = scenario(name);
        assert_eq!(sc.properties.len(), props, "{name}");
        assert_eq!((sc.width, sc.height), (10, 10));
        assert_eq!(sc.intents.len(), 3);
    }
    let script = scenario("factory_script");
    assert_eq!(script.new_state().next_id("table"), "table1");
    assert_eq!(script.new_state().next_id("box"), "box0");
}

#[test]
fn serve_config_resolves_relative_paths() {
    let cfg = Config::load(crate_path("config/serve.conf")).unwrap();
    let sc = StackConfig::from_config(&cfg, Level::Real).unwrap();
    assert_eq!(sc.scenario.name, "factory_script");
    assert_eq!(sc.chatbot_listen, "127.0.0.1:8081");
}

#[test]
fn scenario_errors() {
    let cfg = Config::parse("intents = greet\n").unwrap();
    assert!(
        matches!(Scenario::from_config(&cfg), Err(ScenarioError::MissingIntent(n)) if n == "greet")
    );
    let cfg = Config::parse("grid.width = 0\n").unwrap();
    assert!(matches!(
        Scenario::from_config(&cfg),
        Err(ScenarioError::EmptyGrid)
    ));
    let cfg = Config::parse("properties = /does/not/exist.prop\n").unwrap();
    assert!(matches!(
        Scenario::from_config(&cfg),
        Err(ScenarioError::Property { .. })
    ));
    let cfg = Config::parse("on_violation = explode\n").unwrap();
    assert!(Scenario::from_config(&cfg).is_err());
}

fn classifier() -> Classifier {
    scenario("factory").classifier()
}

#[test]
fn classifies_the_conversation_messages() {
    let c = classifier();
    let r = c.classify("Add a table");
    assert_eq!((r.intent.as_str(), r.confidence), ("add_object", 1.0));
    assert_eq!(r.slot_str(Entity::ObjectType), Some("table"));
    assert_eq!(r.slot_int(Entity::Horizontal), None);

    let r = c.classify("Add a box right of table1");
    assert_eq!(r.intent, "add_relative");
    assert_eq!(r.slot_str(Entity::ObjectType), Some("box"));
    assert_eq!(r.slot_str(Entity::RelativePosition), Some("right"));
    assert_eq!(r.slot_str(Entity::ReferenceObject), Some("table1"));

    let r = c.classify("Add a robot in front on the left");
    assert_eq!((r.intent.as_str(), r.confidence), ("add_object", 1.0));
    assert_eq!(r.slot_str(Entity::RelativePosition), Some("front_left"));

    let r = c.classify("Remove box0");
    assert_eq!(r.intent, "remove_object");
    assert_eq!(r.slot_str(Entity::ObjectType), Some("box0"));

    assert_eq!(c.classify(""), NluResult::fallback());
    assert_eq!(NluResult::fallback().confidence, 0.0);
}

#[test]
fn every_shipped_message_has_full_confidence() {
    let c = classifier();
    for m in messages("test_input.txt")
        .iter()
        .chain(&messages("double_add.txt"))
    {
        assert_eq!(c.classify(m).confidence, 1.0, "{m}");
    }
}

proptest! {
    #[test]
    fn classification_is_deterministic_and_bounded(text in "[a-zA-Z0-9 ,]{0,40}") {
        let c = classifier();
        let a = c.classify(&text);
        prop_assert_eq!(&a, &c.classify(&text));
        prop_assert!((0.0..=1.0).contains(&a.confidence));
        if a.intent == "fallback" {
            prop_assert_eq!(a.confidence, 0.0);
        }
    }
}
