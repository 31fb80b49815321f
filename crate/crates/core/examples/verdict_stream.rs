//! Follows a property's verdicts over the monitor's WebSocket stream while
//! a conversation runs through the chatbot service.
//!
//! ```text
//! cargo run --example verdict_stream
//! ```

use std::net::TcpStream;
use std::sync::Arc;
use std::time::Duration;

use chatguard::chatbot::Scenario;
use chatguard::harness::{ChatClient, Stack, StackConfig};
use chatguard::monitor::Level;
use tungstenite::stream::MaybeTlsStream;

fn main() {
    let dir = env!("CARGO_MANIFEST_DIR");
    let scenario = Scenario::load(format!("{dir}/scenarios/factory.conf")).expect("scenario");
    let stack = Stack::start(StackConfig::new(Arc::new(scenario), Level::Real)).expect("services");
    let client = ChatClient::new(stack.chatbot_url());

    let conv = client.open(None).expect("conversation");
    let session = conv
        .sessions
        .iter()
        .find(|s| s.property == "add_object")
        .expect("add_object session");
    let ws_url = format!(
        "{}/sessions/{}/stream",
        conv.monitor_url.unwrap().replacen("http", "ws", 1),
        session.session
    );
    let (mut socket, _) = tungstenite::connect(ws_url).expect("stream");
    if let MaybeTlsStream::Plain(s) = socket.get_mut() {
        TcpStream::set_read_timeout(s, Some(Duration::from_millis(300))).unwrap();
    }

    for text in [
        "Add a robot in position 3 5",
        "Add a table",
        "Add a box in position 3 5",
    ] {
        let reply = client.send(&conv.id, text).expect("reply").value;
        println!("> {text}\n  {}", reply.turn.reply);
    }

    println!("stream of {}:", session.property);
    while let Ok(msg) = socket.read() {
        if let Ok(text) = msg.to_text() {
            println!("  {text}");
        }
    }
}
