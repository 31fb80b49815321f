use std::collections::BTreeSet;
use std::path::Path;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use chatguard::chatbot::{
    replay, user_event, BotAction, EventKind, FloorObject, NluResult, Outcome,
};
use chatguard::harness::{
    run_test, BenchReport, ChatClient, Expectation, Stack, StackConfig, TestOptions,
};
use chatguard::monitor::Level;
use chatguard::rml::oracle::{check_viability, corpus_alphabet, corpus_spec, gen, CORPUS};
use chatguard::rml::{parse, print_spec, MonitorState, Verdict};
use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::TestRunner;

mod common;
use common::*;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("took {t:?}, limit {limit:?}"))
}

fn verdict_names(vs: &[Option<Verdict>]) -> Vec<&'static str> {
    vs.iter()
        .map(|v| v.map_or("none", |v| v.as_str()))
        .collect()
}

fn c1_occupied_position() -> Check {
    let start = Instant::now();
    let mut conv = local_conversation(scenario("factory"), Level::Real);
    let t = replay(
        &mut conv,
        &[
            "Add a robot in position 3 5",
            "Add a robot in position 2 1",
            "Add a robot in position 3 5",
        ],
    );
    let verdicts: Vec<_> = t.steps.iter().map(|s| s.turn.verdict()).collect();
    let want = [
        Some(Verdict::Inconclusive),
        Some(Verdict::Inconclusive),
        Some(Verdict::False),
    ];
    ensure(verdicts == want, || {
        format!("verdicts {:?}", verdict_names(&verdicts))
    })?;
    let third = &t.steps[2].turn;
    ensure(
        matches!(third.action, BotAction::Error { .. }) && third.reply.starts_with("Sorry"),
        || format!("message 3 replied {:?}", third.reply),
    )?;
    ensure(conv.state().len() == 2, || {
        format!("{} objects on the floor", conv.state().len())
    })?;
    within(start, Duration::from_secs(1))?;
    Ok(format!(
        "verdicts {:?}, error reply, 2 objects",
        verdict_names(&verdicts)
    ))
}

#[derive(serde::Deserialize)]
struct ExpectedStep {
    message: String,
    floor: Vec<FloorObject>,
}

fn as_set(objects: &[FloorObject]) -> BTreeSet<(String, String, i64, i64)> {
    objects
        .iter()
        .map(|o| (o.id.clone(), o.object_type.clone(), o.x, o.y))
        .collect()
}

fn c2_conversation_replay() -> Check {
    let start = Instant::now();
    let fixture: Vec<ExpectedStep> = serde_json::from_str(
        &std::fs::read_to_string(crate_path("tests/fixtures/conversation_floors.json")).unwrap(),
    )
    .map_err(|e| e.to_string())?;
    let messages = messages("test_input.txt");
    ensure(messages.len() == 12 && fixture.len() == 12, || {
        "expected 12 messages".into()
    })?;
    let stack = Stack::start(StackConfig::new(scenario("factory_script"), Level::Real))
        .map_err(|e| e.to_string())?;
    let client = ChatClient::new(stack.chatbot_url());
    let conv = client.open(None).map_err(|e| e.to_string())?;
    for (i, (text, expected)) in messages.iter().zip(&fixture).enumerate() {
        ensure(*text == expected.message, || {
            format!("fixture message {} is {:?}", i + 1, expected.message)
        })?;
        let reply = client
            .send(&conv.id, text)
            .map_err(|e| e.to_string())?
            .value;
        ensure(!reply.turn.any_false(), || {
            format!(
                "message {} got a false verdict: {}",
                i + 1,
                reply.turn.reply
            )
        })?;
        ensure(reply.turn.verdicts.len() == 6, || {
            format!(
                "message {} has {} verdicts",
                i + 1,
                reply.turn.verdicts.len()
            )
        })?;
        ensure(
            as_set(&reply.floor.objects) == as_set(&expected.floor),
            || {
                format!(
                    "floor after message {} is {:?}",
                    i + 1,
                    as_set(&reply.floor.objects)
                )
            },
        )?;
    }
    within(start, Duration::from_secs(5))?;
    Ok("12 messages, no false verdicts, floors match the hand simulation".into())
}

fn c3_confidence_threshold() -> Check {
    let start = Instant::now();
    let path = crate_path("properties/factory/confidence.prop");
    let text = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
    ensure(
        text.contains("strictly greater than") && text.contains("exactly 0.6 violates"),
        || "property file does not document the strict bound".into(),
    )?;
    let spec = Arc::new(parse(&text).map_err(|e| e.to_string())?);
    let verdict_at = |confidence: f64| {
        let nlu = NluResult {
            intent: "add_object".into(),
            confidence,
            slots: Default::default(),
        };
        MonitorState::new(spec.clone())
            .advance(&user_event(&nlu))
            .map(|o| o.verdict)
    };
    let got: Vec<Verdict> = [0.59, 0.60, 0.61]
        .iter()
        .map(|c| verdict_at(*c))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    ensure(
        got[0] == Verdict::False && got[1] == Verdict::False && got[2] != Verdict::False,
        || format!("verdicts {got:?}"),
    )?;

    let mut sc = (*scenario("factory")).clone();
    sc.properties.retain(|p| p.name == "confidence");
    let mut conv = local_conversation(Arc::new(sc), Level::Real);
    let nlu = NluResult {
        intent: "add_object".into(),
        confidence: 0.55,
        slots: [("object_type".to_string(), "table".into())]
            .into_iter()
            .collect(),
    };
    let turn = conv.execute("add a table maybe", nlu);
    ensure(turn.outcome == Outcome::BlockedAtIntent, || {
        format!("0.55 gave {:?}", turn.outcome)
    })?;
    ensure(
        turn.verdicts
            .iter()
            .all(|v| v.event == EventKind::UserIntent),
        || "an action event was sent".into(),
    )?;
    ensure(conv.state().is_empty(), || "floor changed".into())?;
    within(start, Duration::from_secs(1))?;
    Ok(format!(
        "0.59 {}, 0.60 {} (strict bound), 0.61 {}",
        got[0].as_str(),
        got[1].as_str(),
        got[2].as_str()
    ))
}

fn c4_reference_validity() -> Check {
    let start = Instant::now();
    let run = |msgs: &[&str]| {
        let mut conv = local_conversation(scenario("factory"), Level::Real);
        replay(&mut conv, msgs)
    };
    let removed = run(&["Add a table", "Remove table0", "Add a box right of table0"]);
    ensure(removed.violations() == [3], || {
        format!("violations {:?}", removed.violations())
    })?;
    let blocked = &removed.steps[2].turn;
    ensure(
        blocked.outcome == Outcome::BlockedAtIntent
            && blocked
                .verdicts
                .iter()
                .any(|v| v.property == "relative_add" && v.report.verdict == Verdict::False),
        || format!("message 3 outcome {:?}", blocked.outcome),
    )?;
    let kept = run(&["Add a table", "Add a box right of table0"]);
    ensure(kept.violations().is_empty(), || {
        format!("violations without removal {:?}", kept.violations())
    })?;
    within(start, Duration::from_secs(1))?;
    Ok("false at message 3 after removal, none without it".into())
}

fn c5_oracle_agreement() -> Check {
    let start = Instant::now();
    ensure(CORPUS.len() >= 20, || {
        format!("corpus has {} specs", CORPUS.len())
    })?;
    let alphabet = corpus_alphabet();
    ensure(alphabet.len() <= 4, || "alphabet too large".into())?;
    let mut traces = 0;
    for i in 0..CORPUS.len() {
        traces += check_viability(&corpus_spec(i), &alphabet, 6, 2, 16)
            .map_err(|e| format!("spec {i}: {e:?}"))?;
    }
    within(start, Duration::from_secs(60))?;
    Ok(format!(
        "{} specs, {traces} traces, 100% agreement in {:.1?}",
        CORPUS.len(),
        start.elapsed()
    ))
}

fn c6_overhead() -> Check {
    let messages = messages("test_input.txt");
    let out = tempfile::tempdir().map_err(|e| e.to_string())?;
    let sc = scenario("factory_script");
    for level in Level::ALL {
        let stack = Stack::start(StackConfig::new(sc.clone(), level)).map_err(|e| e.to_string())?;
        let client = ChatClient::new(stack.chatbot_url());
        let opts = TestOptions {
            iterations: 20,
            level,
            out_dir: out.path().into(),
            expect: Expectation::NoViolations,
        };
        let run = run_test(&client, &messages, &opts).map_err(|e| e.to_string())?;
        ensure(run.passed && run.deterministic, || {
            format!("{level} run failed:\n{run}")
        })?;
        stack.stop();
    }
    let report = BenchReport::load(out.path()).map_err(|e| e.to_string())?;
    let overhead = report.overhead_vs_none_ms().ok_or("missing levels")?;
    let ratio = report.ratio_vs_dummy().ok_or("missing levels")?;
    ensure(overhead <= 50.0 && ratio <= 2.0, || {
        format!("real-none {overhead:.3} ms, real/dummy {ratio:.3}\n{report}")
    })?;
    Ok(format!(
        "real-none {overhead:.3} ms, real/dummy {ratio:.3} (medians excluding message 1, n=20)"
    ))
}

fn shipped_props(dir: &Path, out: &mut Vec<std::path::PathBuf>) {
    for entry in std::fs::read_dir(dir).unwrap().flatten() {
        let p = entry.path();
        if p.is_dir() {
            shipped_props(&p, out);
        } else if p.extension().is_some_and(|e| e == "prop") {
            out.push(p);
        }
    }
}

fn c7_parser_stability() -> Check {
    let mut files = Vec::new();
    shipped_props(&crate_path("properties"), &mut files);
    ensure(!files.is_empty(), || "no property files".into())?;
    for f in &files {
        let spec = parse(&std::fs::read_to_string(f).unwrap())
            .map_err(|e| format!("{}: {e}", f.display()))?;
        let printed = print_spec(&spec);
        ensure(parse(&printed).as_ref() == Ok(&spec), || {
            format!("{} does not round trip", f.display())
        })?;
        ensure(print_spec(&parse(&printed).unwrap()) == printed, || {
            format!("{} printing is unstable", f.display())
        })?;
    }
    let mut runner = TestRunner::deterministic();
    let strategy = gen::arb_spec(4);
    for i in 0..100 {
        let spec = strategy
            .new_tree(&mut runner)
            .map_err(|e| e.to_string())?
            .current();
        let printed = print_spec(&spec);
        ensure(parse(&printed).as_ref() == Ok(&spec), || {
            format!("random term {i} does not round trip:\n{printed}")
        })?;
    }
    Ok(format!(
        "{} shipped files and 100 random terms round trip",
        files.len()
    ))
}

fn utterances(n: usize) -> Vec<String> {
    use proptest::prelude::*;
    let ty = prop::sample::select(vec!["table", "box", "robot", "chair"]);
    let side = prop::sample::select(vec!["left", "right", "front", "behind"]);
    let half = prop::sample::select(vec!["front", "behind"]);
    let lr = prop::sample::select(vec!["left", "right"]);
    let word = prop::sample::select(vec![
        "add", "a", "remove", "the", "in", "position", "of", "please", "on", "hello", "3", "table1",
    ]);
    let s = prop_oneof![
        ty.clone().prop_map(|t| format!("Add a {t}")),
        (ty.clone(), 0i32..12, 0i32..12)
            .prop_map(|(t, x, y)| format!("Add a {t} in position {x} {y}")),
        (ty.clone(), side, ty.clone(), 0u32..10)
            .prop_map(|(t, s, r, i)| format!("Add a {t} {s} of {r}{i}")),
        (ty.clone(), half, lr).prop_map(|(t, h, s)| format!("Add a {t} in {h} on the {s}")),
        (ty.clone(), 0u32..10).prop_map(|(t, i)| format!("Remove {t}{i}")),
        ty.prop_map(|t| format!("please add a {t} now")),
        prop::collection::vec(word, 0..7).prop_map(|w| w.join(" ")),
    ];
    let mut runner = TestRunner::deterministic();
    (0..n)
        .map(|_| s.new_tree(&mut runner).unwrap().current())
        .collect()
}

fn fuzz(name: &str) -> Check {
    let sc = scenario(name);
    let properties = sc.properties.len();
    let mut conv = local_conversation(sc, Level::Real);
    let (mut added, mut removed, mut blocked) = (0usize, 0usize, 0usize);
    for (i, text) in utterances(500).iter().enumerate() {
        let before = conv.floor();
        let turn = conv.handle(text);
        let after = conv.floor();
        ensure((before != after) == turn.mutated, || {
            format!("message {i} {text:?}: mutation flag disagrees with the floor")
        })?;
        if turn.mutated {
            let per_kind = |k: EventKind| {
                turn.verdicts
                    .iter()
                    .filter(|v| v.event == k && v.report.verdict != Verdict::False)
                    .count()
            };
            ensure(!turn.any_false(), || {
                format!("message {i} {text:?} mutated the floor despite a false verdict")
            })?;
            ensure(
                per_kind(EventKind::UserIntent) == properties
                    && per_kind(EventKind::BotAction) == properties,
                || format!("message {i} {text:?} mutated without a full set of verdicts"),
            )?;
            match turn.action {
                BotAction::AddObject { .. } | BotAction::AddRelative { .. } => added += 1,
                BotAction::RemoveObject { .. } => removed += 1,
                _ => return Err(format!("message {i}: {:?} mutated the floor", turn.action)),
            }
        }
        if turn.any_false() {
            blocked += 1;
        }
        conv.state()
            .check_invariants()
            .map_err(|e| format!("message {i} {text:?}: {e}"))?;
        ensure(conv.state().len() == added - removed, || {
            format!("message {i}: object count drifted")
        })?;
    }
    Ok(format!(
        "{name}: {added} adds, {removed} removals, {blocked} blocked"
    ))
}

fn c8_safety_gate() -> Check {
    let a = fuzz("factory")?;
    let b = fuzz("demo")?;
    Ok(format!(
        "500 utterances per scenario, invariants held; {a}; {b}"
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("double add at an occupied position", c1_occupied_position),
        ("12-message conversation replay", c2_conversation_replay),
        ("confidence threshold boundary", c3_confidence_threshold),
        (
            "relative add needs a present reference",
            c4_reference_validity,
        ),
        (
            "derivative and oracle agree on prefix viability",
            c5_oracle_agreement,
        ),
        ("monitor overhead", c6_overhead),
        ("parser round trip", c7_parser_stability),
        ("safety gate under fuzzing", c8_safety_gate),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
