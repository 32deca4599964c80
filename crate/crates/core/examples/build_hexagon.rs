//! Builds T(q^3, q) by closure and prints its element counts and order.
//!
//! `cargo run --release --example build_hexagon -- 3`

use std::time::Instant;

use trihex::field::FieldSpec;
use trihex::hexagon::Hexagon;

fn main() -> trihex::Result<()> {
    let q: u32 = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(2);
    let start = Instant::now();
    let h = Hexagon::build(&FieldSpec::twisted(q)?)?;
    let (s, t) = h.order();
    println!(
        "T({s},{t}): {} points, {} lines, built in {:.2?}",
        h.num_points(),
        h.num_lines(),
        start.elapsed()
    );
    Ok(())
}
