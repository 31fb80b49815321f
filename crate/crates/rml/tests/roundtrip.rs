use chatguard_rml::oracle::gen::arb_spec;
use chatguard_rml::{parse, print_spec};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn print_then_parse_is_identity(spec in arb_spec(4)) {
        let printed = print_spec(&spec);
        let back = parse(&printed).map_err(|e| TestCaseError::fail(format!("{e}\n{printed}")))?;
        prop_assert_eq!(&back, &spec);
        prop_assert_eq!(print_spec(&back), printed);
    }
}

#[test]
fn printing_is_a_normal_form() {
    let src = r#"
        type b matches {};
        type a(x) matches { "v": x, w: {} };
        Q = ((a(1)) (b)) | (b*)*;
        main Q;
    "#;
    let once = print_spec(&parse(src).unwrap());
    let twice = print_spec(&parse(&once).unwrap());
    assert_eq!(once, twice);
    assert_eq!(
        once,
        "type a(x) matches { v: x, w: {} };\ntype b matches {};\n\nQ = a(1) b | b**;\nmain Q;\n"
    );
}
