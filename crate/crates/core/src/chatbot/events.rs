//! Events sent to the monitor: one per user intent and one per bot action.
//!
//! ```text
//! {"kind": "user_intent", "sender": "user", "receiver": "bot",
//!  "intent": {"name": ...}, "slots": {...}, "nlu": {"confidence": ...}}
//! {"kind": "bot_action", "sender": "bot", "receiver": "user",
//!  "last_action": ..., "slots": {...}}
//! ```

use std::collections::BTreeMap;

use chatguard_rml::{Event, Value};

use super::decide::BotAction;
use super::nlu::NluResult;

fn map(entries: impl IntoIterator<Item = (&'static str, Value)>) -> BTreeMap<String, Value> {
    entries
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
}

pub fn user_event(nlu: &NluResult) -> Event {
    let payload = map([
        ("kind", Value::from("user_intent")),
        ("sender", Value::from("user")),
        ("receiver", Value::from("bot")),
        (
            "intent",
            Value::Map(map([("name", Value::from(nlu.intent.as_str()))])),
        ),
        ("slots", Value::Map(nlu.slots.clone())),
        (
            "nlu",
            Value::Map(map([("confidence", Value::from(nlu.confidence))])),
        ),
    ]);
    Event::new(payload).expect("user events are well formed")
}

pub fn bot_event(action: &BotAction) -> Event {
    let slots = match action {
        BotAction::AddObject {
            id,
            object_type,
            x,
            y,
        } => map([
            ("object_id", Value::from(id.as_str())),
            ("object_type", Value::from(object_type.as_str())),
            ("horizontal", Value::from(*x)),
            ("vertical", Value::from(*y)),
        ]),
        BotAction::AddRelative {
            id,
            object_type,
            x,
            y,
            reference,
            position,
        } => map([
            ("object_id", Value::from(id.as_str())),
            ("object_type", Value::from(object_type.as_str())),
            ("horizontal", Value::from(*x)),
            ("vertical", Value::from(*y)),
            ("reference_object", Value::from(reference.as_str())),
            ("relative_position", Value::from(position.as_str())),
        ]),
        BotAction::RemoveObject {
            id, object_type, ..
        } => map([
            ("object_id", Value::from(id.as_str())),
            ("object_type", Value::from(object_type.as_str())),
        ]),
        BotAction::Error { .. } | BotAction::Listen => BTreeMap::new(),
    };
    let payload = map([
        ("kind", Value::from("bot_action")),
        ("sender", Value::from("bot")),
        ("receiver", Value::from("user")),
        ("last_action", Value::from(action.name())),
        ("slots", Value::Map(slots)),
    ]);
    Event::new(payload).expect("bot events are well formed")
}
