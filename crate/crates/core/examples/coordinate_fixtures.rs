//! The coordinate hexagon of T(8,2): absolute unit points, the six-cycle of lines
//! e0e6, e6e1, e1e4, e4e2, e2e5, e5e0, and the solid of e0.
//!
//! `cargo run --example coordinate_fixtures`

use std::sync::Arc;

use trihex::field::Field;
use trihex::forms::Triality;
use trihex::projspace::{unit, ProjPoint, Subspace};

fn main() -> trihex::Result<()> {
    let f = Arc::new(Field::twisted(2)?);
    let t = Triality::new(f.clone());
    for i in 0..8 {
        println!(
            "e{i} absolute: {}",
            t.is_absolute_point(&ProjPoint::unit(i))?
        );
    }
    let cycle = [0, 6, 1, 4, 2, 5];
    for w in 0..6 {
        let (a, b) = (cycle[w], cycle[(w + 1) % 6]);
        let l = Subspace::from_vectors(&f, &[unit(a), unit(b)])?;
        println!(
            "e{a}e{b}: absolute line {}, fixed by the induced map {}",
            t.is_absolute_line(&l)?,
            t.induced_line_image(&l)? == l
        );
    }
    let solid = t.onepoint_to_solid(&unit(0))?;
    let eqs = Subspace::from_equations(&f, &[unit(1), unit(2), unit(4), unit(7)])?;
    println!(
        "solid of e0 is x1 = x2 = x4 = x7 = 0: {}",
        Some(solid) == eqs
    );
    let plane = t.absolute_plane(&ProjPoint::unit(0))?;
    println!(
        "lines through e0 span <e0, e5, e6>: {}",
        plane == Subspace::from_vectors(&f, &[unit(0), unit(5), unit(6)])?
    );
    Ok(())
}
