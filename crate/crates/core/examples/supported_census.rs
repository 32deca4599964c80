//! Supported subspaces of T(q^3, q) by dimension, line count and class.
//!
//! `cargo run --release --example supported_census -- [max_dim] [budget] [q]`
//!
//! Set `NO_CLASSIFY` to skip classification.

use std::time::Instant;

use trihex::field::FieldSpec;
use trihex::hexagon::Hexagon;
use trihex::subspaces::{supported_census, ClosureConfig};

fn main() -> trihex::Result<()> {
    let mut args = std::env::args().skip(1);
    let max_dim: usize = args.next().map_or(6, |a| a.parse().expect("max_dim"));
    let budget: Option<usize> = args
        .next()
        .filter(|a| a != "-")
        .map(|a| a.parse().expect("budget"));
    let q: u32 = args.next().map_or(2, |a| a.parse().expect("q"));
    let h = Hexagon::build(&FieldSpec::twisted(q)?)?;
    let start = Instant::now();
    let cfg = ClosureConfig {
        budget,
        classify: std::env::var_os("NO_CLASSIFY").is_none(),
        ..ClosureConfig::exhaustive(max_dim)
    };
    let census = supported_census(&h, &cfg)?;
    println!("closure to dimension {max_dim} in {:.1?}", start.elapsed());
    for (dim, counts) in &census.line_counts {
        println!("dim {dim}: line counts {counts:?}");
        if let Some(classes) = census.classes.get(dim) {
            for (tag, n) in classes {
                println!("    {tag:<15} {n}");
            }
        }
    }
    println!("records with isolated points: {}", census.isolated_total());
    println!("unclassified records: {}", census.unclassified_total());
    for u in &census.unclassified {
        println!(
            "    dim {} with {} lines: {}",
            u.dim, u.line_count, u.detail
        );
    }
    if !census.summary.exhaustive() {
        println!("budget cut dimensions {:?}", census.summary.truncated_dims);
    }
    Ok(())
}
