use chatguard::harness::{ChatClient, ClientError, Stack, StackConfig};
use chatguard::monitor::Level;
use serde_json::Value;

mod common;
use common::*;

fn stack(level: Level) -> Stack {
    Stack::start(StackConfig::new(scenario("factory"), level)).unwrap()
}

#[test]
fn message_reply_carries_reply_verdicts_and_floor() {
    let s = stack(Level::Real);
    let base = s.chatbot_url();
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .http_status_as_error(false)
        .build()
        .into();
    let mut r = agent
        .post(format!("{base}/conversations"))
        .send_empty()
        .unwrap();
    assert_eq!(r.status().as_u16(), 201);
    let conv: Value = serde_json::from_str(&r.body_mut().read_to_string().unwrap()).unwrap();
    assert_eq!(conv["monitor"], "real");
    assert_eq!(conv["monitor_url"].as_str(), s.monitor_url().as_deref());
    assert_eq!(conv["sessions"].as_array().unwrap().len(), 3);
    let id = conv["id"].as_str().unwrap();

    let mut r = agent
        .post(format!("{base}/conversations/{id}/messages"))
        .header("content-type", "application/json")
        .send(r#"{"text": "Add a table"}"#)
        .unwrap();
    let body: Value = serde_json::from_str(&r.body_mut().read_to_string().unwrap()).unwrap();
    assert_eq!(body["reply"], "Added table0 at (0,0)");
    assert_eq!(body["verdicts"].as_array().unwrap().len(), 6);
    assert_eq!(body["verdicts"][0]["property"], "add_object");
    assert_eq!(body["verdicts"][0]["event"], "user_intent");
    assert_eq!(body["floor"]["width"], 10);
    assert_eq!(
        body["floor"]["objects"][0],
        serde_json::json!({"id": "table0", "type": "table", "x": 0, "y": 0})
    );

    let mut r = agent
        .get(format!("{base}/conversations/{id}/floor"))
        .call()
        .unwrap();
    let floor: Value = serde_json::from_str(&r.body_mut().read_to_string().unwrap()).unwrap();
    assert_eq!(floor, body["floor"]);
}

#[test]
fn client_round_trip_and_reset() {
    let s = stack(Level::Real);
    let client = ChatClient::new(s.chatbot_url());
    client.health().unwrap();
    let scenario = client.scenario().unwrap();
    assert_eq!(scenario["levels"], serde_json::json!(["none", "real"]));
    let conv = client.open(None).unwrap();
    client
        .send(&conv.id, "Add a robot in position 1 1")
        .unwrap();
    assert_eq!(client.floor(&conv.id).unwrap().objects.len(), 1);
    let info = client.reset(&conv.id).unwrap();
    assert!(info.floor.objects.is_empty());
    client.close(&conv.id).unwrap();
    assert!(matches!(
        client.floor(&conv.id),
        Err(ClientError::Status { status: 404, .. })
    ));
}

#[test]
fn levels_without_a_monitor_are_rejected() {
    let s = stack(Level::Real);
    let client = ChatClient::new(s.chatbot_url());
    assert!(matches!(
        client.open(Some(Level::Dummy)),
        Err(ClientError::Status { status: 400, .. })
    ));
    let conv = client.open(Some(Level::None)).unwrap();
    assert!(conv.sessions.is_empty() && conv.monitor_url.is_none());
}

#[test]
fn unmonitored_stack_has_no_monitor() {
    let s = stack(Level::None);
    assert!(s.monitor_url().is_none());
    let client = ChatClient::new(s.chatbot_url());
    let conv = client.open(None).unwrap();
    let reply = client.send(&conv.id, "Add a table").unwrap().value;
    assert!(reply.turn.verdicts.is_empty());
    assert_eq!(reply.floor.objects.len(), 1);
}
