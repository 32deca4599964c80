//! Hermitian spreads of T(8,2): supported 5-spaces whose 9 lines are pairwise
//! opposite, with the split Cayley 6-spaces through them.
//!
//! `cargo run --release --example hermitian_spreads -- 20`

use trihex::field::FieldSpec;
use trihex::hexagon::Hexagon;
use trihex::subspaces::find_hermitian_spreads;

fn main() -> trihex::Result<()> {
    let budget: Option<usize> = std::env::args().nth(1).and_then(|a| a.parse().ok());
    let h = Hexagon::build(&FieldSpec::twisted(2)?)?;
    let spreads = find_hermitian_spreads(&h, budget, 0)?;
    println!("{} spreads found", spreads.len());
    for s in spreads.iter().take(5) {
        println!(
            "lines {:?}: {} split Cayley 6-spaces, blocks them {}, no line opposite all {}",
            s.lines,
            s.split_cayley_spaces.len(),
            s.blocks_split_cayley,
            s.no_opposite_line
        );
    }
    Ok(())
}
