//! Uses the monitor as an offline test engine: scripted conversations are
//! replayed against the services and checked for expected violations.
//!
//! ```text
//! cargo run --example offline_test
//! ```

use std::sync::Arc;

use chatguard::chatbot::{read_messages, Scenario};
use chatguard::harness::{run_test, ChatClient, Expectation, Stack, StackConfig, TestOptions};
use chatguard::monitor::Level;

fn main() {
    let dir = env!("CARGO_MANIFEST_DIR");
    let scenario =
        Scenario::load(format!("{dir}/scenarios/factory_script.conf")).expect("scenario");
    let stack = Stack::start(StackConfig::new(Arc::new(scenario), Level::Real)).expect("services");
    let client = ChatClient::new(stack.chatbot_url());
    let out = std::env::temp_dir().join("chatguard-offline-test");

    let cases = [
        ("test_input.txt", Expectation::NoViolations),
        ("double_add.txt", Expectation::At(vec![2])),
    ];
    for (file, expect) in cases {
        let messages = read_messages(format!("{dir}/data/{file}")).expect("messages");
        let opts = TestOptions {
            iterations: 3,
            level: Level::Real,
            out_dir: out.join(file),
            expect,
        };
        let run = run_test(&client, &messages, &opts).expect("run");
        println!("== {file}\n{run}\n");
    }
}
