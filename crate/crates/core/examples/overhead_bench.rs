//! Measures the monitor's overhead: the 12-message conversation at each
//! monitor level, then the cross-level report.
//!
//! ```text
//! cargo run --release --example overhead_bench -- 20
//! ```

use std::sync::Arc;

use chatguard::chatbot::{read_messages, Scenario};
use chatguard::harness::{
    run_test, BenchReport, ChatClient, Expectation, Stack, StackConfig, TestOptions,
};
use chatguard::monitor::Level;

fn main() {
    let iterations = std::env::args()
        .nth(1)
        .map_or(20, |n| n.parse().expect("iterations"));
    let dir = env!("CARGO_MANIFEST_DIR");
    let scenario =
        Arc::new(Scenario::load(format!("{dir}/scenarios/factory_script.conf")).expect("scenario"));
    let messages = read_messages(format!("{dir}/data/test_input.txt")).expect("messages");
    let out = tempfile::tempdir().expect("temp dir");

    for level in Level::ALL {
        let stack = Stack::start(StackConfig::new(scenario.clone(), level)).expect("services");
        let client = ChatClient::new(stack.chatbot_url());
        let opts = TestOptions {
            iterations,
            level,
            out_dir: out.path().into(),
            expect: Expectation::NoViolations,
        };
        let run = run_test(&client, &messages, &opts).expect("run");
        assert!(run.passed, "{run}");
        stack.stop();
    }

    let report = BenchReport::load(out.path()).expect("report");
    print!("{report}");
    print!("\n{}", report.to_tsv());
}
