use chatguard_rml::oracle::{check_viability, corpus_alphabet, corpus_spec, CORPUS};

#[test]
fn monitor_agrees_with_oracle_on_corpus() {
    let alphabet = corpus_alphabet();
    for (i, src) in CORPUS.iter().enumerate() {
        let spec = corpus_spec(i);
        if let Err(e) = check_viability(&spec, &alphabet, 6, 2, 16) {
            panic!("{src}: {e}");
        }
    }
}

#[test]
fn corpus_is_non_recursive_and_covers_every_operator() {
    let all = CORPUS.join("\n");
    for op in ["\\/", "/\\", "|", "*", "let", "!", " "] {
        assert!(all.contains(op), "{op}");
    }
    assert!(CORPUS.len() >= 20);
}
