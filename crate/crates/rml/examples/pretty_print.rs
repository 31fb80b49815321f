//! Parses a specification and prints it in normal form.
//!
//! ```text
//! cargo run -p chatguard-rml --example pretty_print -- path/to/spec.prop
//! ```

use chatguard_rml::{parse, print_spec};

const SPEC: &str = r#"
type a(x) matches {v:x,w:{}}; type b matches {};
Q = ((a(1) b) | ((b*)*)) ;
"#;

fn main() {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}")),
        None => SPEC.to_string(),
    };
    match parse(&text) {
        Ok(spec) => {
            let printed = print_spec(&spec);
            print!("{printed}");
            assert_eq!(
                parse(&printed).as_ref(),
                Ok(&spec),
                "printed form must parse back"
            );
        }
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(1);
        }
    }
}
