//! Distance-3-regularity of T(8,2), and opposition of points against the polar form.
//!
//! `cargo run --release --example distance_regularity`

use trihex::field::FieldSpec;
use trihex::forms::bilinear;
use trihex::hexagon::{DistanceOracle, Elem, Hexagon};

fn main() -> trihex::Result<()> {
    let h = Hexagon::build(&FieldSpec::twisted(2)?)?;
    let g = h.geometry();
    let o = DistanceOracle::new(g);
    let d3 = o.distance3_regularity(None, 0);
    println!(
        "distance-3-regular: {} ({} lines, {} points examined)",
        d3.regular, d3.lines_checked, d3.points_checked
    );
    let f = g.field();
    let mut disagreements = 0usize;
    for x in 0..g.num_points() as u32 {
        let row = o.row_of(Elem::Point(x));
        for y in 0..g.num_points() as u32 {
            let b = bilinear(f, g.point(x).coords(), g.point(y).coords());
            if (row[y as usize] == 6) == b.is_zero() {
                disagreements += 1;
            }
        }
    }
    println!("point pairs where opposition and B(x,y) != 0 disagree: {disagreements}");
    Ok(())
}
