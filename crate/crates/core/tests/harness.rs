use std::collections::BTreeMap;
use std::path::PathBuf;

use chatguard::harness::{
    chat_loop, csv_path, run_test, BenchReport, ChatClient, ClientError, Expectation,
    MessageRecord, Stack, StackConfig, TestOptions,
};
use chatguard::monitor::Level;

mod common;
use common::*;

fn stack(level: Level) -> Stack {
    Stack::start(StackConfig::new(scenario("factory_script"), level)).unwrap()
}

fn opts(
    dir: &std::path::Path,
    iterations: usize,
    level: Level,
    expect: Expectation,
) -> TestOptions {
    TestOptions {
        iterations,
        level,
        out_dir: dir.into(),
        expect,
    }
}

#[test]
fn writes_one_csv_per_iteration() {
    let s = stack(Level::Real);
    let dir = tempfile::tempdir().unwrap();
    let run = run_test(
        &ChatClient::new(s.chatbot_url()),
        &messages("test_input.txt"),
        &opts(dir.path(), 2, Level::Real, Expectation::NoViolations),
    )
    .unwrap();
    assert!(run.passed && run.deterministic, "{run}");
    let first = csv_path(dir.path(), Level::Real, 1);
    assert_eq!(first.file_name().unwrap(), "real-iter001.csv");
    let text = std::fs::read_to_string(&first).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("iteration,message_index,utterance,latency_ms,verdict")
    );
    assert_eq!(lines.count(), 12);
    assert!(csv_path(dir.path(), Level::Real, 2).exists());
    assert_eq!(run.summary.per_index.len(), 12);
}

#[test]
fn zero_iterations_write_nothing() {
    let s = stack(Level::None);
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let run = run_test(
        &ChatClient::new(s.chatbot_url()),
        &messages("test_input.txt"),
        &opts(&out, 0, Level::None, Expectation::NoViolations),
    )
    .unwrap();
    assert!(run.passed);
    assert!(run.iterations.is_empty() && run.summary.per_index.is_empty());
    assert!(!out.exists());
}

#[test]
fn expected_violation_at_message_two() {
    let s = stack(Level::Real);
    let client = ChatClient::new(s.chatbot_url());
    let dir = tempfile::tempdir().unwrap();
    let msgs = messages("double_add.txt");
    let at2 = run_test(
        &client,
        &msgs,
        &opts(dir.path(), 2, Level::Real, "2".parse().unwrap()),
    )
    .unwrap();
    assert!(at2.passed, "{at2}");
    let at1 = run_test(
        &client,
        &msgs,
        &opts(dir.path(), 1, Level::Real, "1".parse().unwrap()),
    )
    .unwrap();
    assert!(!at1.passed);
    let none = run_test(
        &client,
        &msgs,
        &opts(dir.path(), 1, Level::Real, Expectation::NoViolations),
    )
    .unwrap();
    assert!(!none.passed);
    let rows = std::fs::read_to_string(csv_path(dir.path(), Level::Real, 1)).unwrap();
    assert!(rows.lines().nth(2).unwrap().ends_with(",false"));
}

#[test]
fn unmonitored_runs_record_no_verdict() {
    let s = stack(Level::None);
    let dir = tempfile::tempdir().unwrap();
    let run = run_test(
        &ChatClient::new(s.chatbot_url()),
        &messages("double_add.txt"),
        &opts(dir.path(), 1, Level::None, Expectation::NoViolations),
    )
    .unwrap();
    assert!(run.passed);
    assert!(run.iterations[0]
        .records
        .iter()
        .all(|r| r.verdict == "none"));
}

#[test]
fn unreachable_service_aborts_the_iteration() {
    let dir = tempfile::tempdir().unwrap();
    let run = run_test(
        &ChatClient::new("http://127.0.0.1:9"),
        &messages("double_add.txt"),
        &opts(dir.path(), 1, Level::Real, Expectation::NoViolations),
    )
    .unwrap();
    assert!(!run.passed);
    assert!(run.iterations[0].error.is_some());
}

#[test]
fn parses_expectations() {
    assert_eq!("".parse::<Expectation>(), Ok(Expectation::AnyViolation));
    assert_eq!("any".parse::<Expectation>(), Ok(Expectation::AnyViolation));
    assert_eq!(
        "3, 2,3".parse::<Expectation>(),
        Ok(Expectation::At(vec![2, 3]))
    );
    assert!("two".parse::<Expectation>().is_err());
    assert!(Expectation::AnyViolation.accepts(&[4]) && !Expectation::AnyViolation.accepts(&[]));
}

fn synthetic(latencies: &[f64]) -> Vec<MessageRecord> {
    latencies
        .iter()
        .enumerate()
        .map(|(i, &l)| MessageRecord {
            iteration: 1,
            message_index: i + 1,
            utterance: format!("m{}", i + 1),
            latency_ms: l,
            verdict: "inconclusive".into(),
        })
        .collect()
}

fn runs(levels: &[(Level, Vec<Vec<f64>>)]) -> BTreeMap<Level, Vec<(PathBuf, Vec<MessageRecord>)>> {
    levels
        .iter()
        .map(|(l, its)| {
            (
                *l,
                its.iter()
                    .enumerate()
                    .map(|(i, xs)| (PathBuf::from(format!("{l}-{i}")), synthetic(xs)))
                    .collect(),
            )
        })
        .collect()
}

#[test]
fn identical_runs_have_zero_deltas() {
    let xs = vec![vec![5.0, 1.0, 2.0], vec![7.0, 3.0, 2.0]];
    let report = BenchReport::from_runs(runs(&[
        (Level::None, xs.clone()),
        (Level::Dummy, xs.clone()),
        (Level::Real, xs),
    ]))
    .unwrap();
    assert_eq!(
        report.deltas(Level::Real, Level::None).unwrap(),
        [0.0, 0.0, 0.0]
    );
    assert_eq!(
        report.level(Level::Real).unwrap().per_index_ms,
        [6.0, 2.0, 2.0]
    );
    assert_eq!(report.overhead_vs_none_ms(), Some(0.0));
    assert_eq!(report.ratio_vs_dummy(), Some(1.0));
    let tsv = report.to_tsv();
    assert_eq!(
        tsv.lines().next().unwrap(),
        "message_index\tnone_ms\tdummy_ms\treal_ms\treal_minus_none_ms\treal_minus_dummy_ms"
    );
    assert_eq!(tsv.lines().count(), 4);
}

#[test]
fn medians_exclude_the_first_message() {
    let report = BenchReport::from_runs(runs(&[
        (Level::None, vec![vec![100.0, 1.0, 1.0]]),
        (Level::Real, vec![vec![300.0, 2.0, 4.0]]),
    ]))
    .unwrap();
    assert_eq!(
        report.level(Level::Real).unwrap().median_ms_excluding_first,
        3.0
    );
    assert_eq!(report.overhead_vs_none_ms(), Some(2.0));
    assert_eq!(
        report.deltas(Level::Real, Level::None).unwrap(),
        [200.0, 1.0, 3.0]
    );
    assert_eq!(report.ratio_vs_dummy(), None);
}

#[test]
fn report_needs_two_levels() {
    assert!(BenchReport::from_runs(runs(&[(Level::Real, vec![vec![1.0]])])).is_err());
}

#[test]
fn report_rejects_mismatched_lengths() {
    let err = BenchReport::from_runs(runs(&[
        (Level::None, vec![vec![1.0, 2.0]]),
        (Level::Real, vec![vec![1.0]]),
    ]));
    assert!(err.unwrap_err().to_string().contains("expected 2"));
}

#[test]
fn report_reads_csv_directories() {
    let dir = tempfile::tempdir().unwrap();
    let client_none = stack(Level::None);
    let client_real = stack(Level::Real);
    for (s, level) in [(&client_none, Level::None), (&client_real, Level::Real)] {
        run_test(
            &ChatClient::new(s.chatbot_url()),
            &messages("double_add.txt"),
            &opts(dir.path(), 2, level, Expectation::At(vec![2])),
        )
        .unwrap();
    }
    std::fs::write(dir.path().join("notes.csv"), "ignored").unwrap();
    let report = BenchReport::load(dir.path()).unwrap();
    assert_eq!(report.messages, 2);
    assert_eq!(report.levels.len(), 2);
    assert_eq!(report.utterances[0], "Add a robot in position 3 5");
    assert!(report.to_string().contains("real - none"));
}

#[test]
fn chat_loop_prints_replies_and_floor() {
    let s = stack(Level::Real);
    let client = ChatClient::new(s.chatbot_url());
    let input = "Add a robot in position 3 5\n\nAdd a box in position 3 5\n";
    let mut out = Vec::new();
    chat_loop(&client, None, input.as_bytes(), &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert!(text.contains("bot> Added robot1 at (3,5)"), "{text}");
    assert!(text.contains("bot> !! Sorry"), "{text}");
    assert!(text.contains("[false] add_object on user_intent"), "{text}");
    assert!(text.contains("5  . . . R"), "{text}");
}

#[test]
fn chat_loop_reports_connection_loss() {
    let client = ChatClient::new("http://127.0.0.1:9");
    let err = chat_loop(&client, None, "hi\n".as_bytes(), Vec::new()).unwrap_err();
    assert!(matches!(err, ClientError::Unreachable { .. }));
}
