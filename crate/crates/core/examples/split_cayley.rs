//! Extracts H(2) from T(8,2) inside x3 + x7 = 0 and checks it is ideal and blocking.
//!
//! `cargo run --release --example split_cayley`

use trihex::field::FieldSpec;
use trihex::hexagon::{blocking_checks, extract_split_cayley, is_ideal_in, Hexagon};

fn main() -> trihex::Result<()> {
    let h = Hexagon::build(&FieldSpec::twisted(2)?)?;
    let sc = extract_split_cayley(&h)?;
    println!(
        "H(2): {} points, {} lines, order {:?}",
        sc.num_points(),
        sc.num_lines(),
        sc.order()
    );
    println!("ideal in T(8,2): {}", is_ideal_in(&sc, &h));
    let ids: Vec<u32> = sc.lines().iter().filter_map(|l| h.line_id(l)).collect();
    let report = blocking_checks(&h, &ids);
    println!(
        "lines of T(8,2) meeting H(2): {} of {}",
        report.blocked, report.total_lines
    );
    let (girth, diameter) = sc.girth_and_diameter();
    println!("incidence graph of H(2): girth {girth:?}, diameter {diameter:?}");
    Ok(())
}
