//! Runs the property suite on T(8,2): histograms, coverage and discrepancy probes.
//!
//! `cargo run --release --example verify_properties -- pt,pl,sd`

use trihex::field::FieldSpec;
use trihex::hexagon::Hexagon;
use trihex::subspaces::{verify_properties, PropertyId, VerifyOptions};

fn main() -> trihex::Result<()> {
    let list = std::env::args().nth(1).unwrap_or_else(|| "all".into());
    let pids = PropertyId::parse_list(&list)?;
    let h = Hexagon::build(&FieldSpec::twisted(2)?)?;
    let opts = VerifyOptions {
        classify: false,
        ..VerifyOptions::default()
    };
    let (reports, _) = verify_properties(h.geometry(), &pids, &opts)?;
    for r in &reports {
        println!(
            "{:>4}  {:?}  histogram {:?}  allowed {:?}  ({})",
            r.property.as_str(),
            r.verdict,
            r.histogram,
            r.allowed,
            r.coverage.note
        );
        for d in &r.discrepancies {
            println!(
                "      {}: observed {:?}, {} = {} ({}), {} = {} ({})",
                d.quantity,
                d.observed,
                d.adopted_formula,
                d.adopted_value,
                d.matches_adopted,
                d.competing_formula,
                d.competing_value,
                d.matches_competing
            );
        }
    }
    Ok(())
}
