mod common;

use std::sync::OnceLock;

use common::props;
use trihex::field::FieldSpec;
use trihex::hexagon::Hexagon;

fn t82() -> &'static Hexagon {
    static H: OnceLock<Hexagon> = OnceLock::new();
    H.get_or_init(|| Hexagon::build(&FieldSpec::twisted(2).unwrap()).unwrap())
}

fn pass(outcome: props::Outcome) {
    match outcome {
        Ok(n) => assert!(n >= props::RANDOM_CASES as u64),
        Err(e) => panic!("{e}"),
    }
}

#[test]
fn field_axioms() {
    pass(props::field_axioms());
}

#[test]
fn rref_is_canonical() {
    pass(props::rref_canonical());
}

#[test]
fn modular_dimension_law() {
    pass(props::modular_law());
}

#[test]
fn polarity_is_an_involution() {
    pass(props::polar_involution());
}

#[test]
fn sandwich_instances() {
    pass(props::sandwich(t82()));
}
