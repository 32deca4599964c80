//! The staged characterization on T(8,2), on a copy missing one line and on a copy
//! with one line replaced by a random line of PG(7,8).
//!
//! `cargo run --release --example characterize`

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use trihex::characterize::characterize;
use trihex::field::{Fe, FieldSpec};
use trihex::hexagon::{Geometry, Hexagon};
use trihex::projspace::{Subspace, Vec8, ZERO_VEC};
use trihex::subspaces::VerifyOptions;

fn show(name: &str, g: &Geometry) -> trihex::Result<()> {
    let v = characterize(g, &VerifyOptions::default())?;
    println!("{name}: {}", v.label());
    for s in &v.stages {
        println!(
            "  stage {} {:<10} {:<5} {}",
            s.stage, s.check, s.passed, s.detail
        );
    }
    Ok(())
}

fn main() -> trihex::Result<()> {
    let h = Hexagon::build(&FieldSpec::twisted(2)?)?;
    let g = h.geometry();
    let f = g.field().clone();

    let mut lines = g.lines().to_vec();
    lines.remove(0);
    show("minus one line", &Geometry::from_lines(f.clone(), lines)?)?;

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let random = loop {
        let mut vs = [ZERO_VEC; 2];
        for v in vs.iter_mut() {
            *v = std::array::from_fn(|_| Fe(rng.gen_range(0..8))) as Vec8;
        }
        match Subspace::from_vectors(&f, &vs) {
            Ok(l) if l.rank() == 2 && g.line_id(&l).is_none() => break l,
            _ => {}
        }
    };
    let mut lines = g.lines().to_vec();
    lines[0] = random;
    show(
        "one line replaced",
        &Geometry::from_lines(f.clone(), lines)?,
    )?;

    show("T(8,2)", g)
}
