//! GF(8) and GF(27) with their order-3 automorphism.
//!
//! `cargo run --example field_arithmetic`

use trihex::field::Field;

fn main() -> trihex::Result<()> {
    for q in [2, 3] {
        let f = Field::twisted(q)?;
        let g = f.generator();
        println!("{}  (q = {}, sigma: x -> x^{q})", f.spec().header(), f.q());
        let fixed: Vec<String> = f
            .elements()
            .filter(|&a| f.sigma(a) == a)
            .map(|a| a.to_string())
            .collect();
        println!("  fixed by sigma: {}", fixed.join(" "));
        let powers: Vec<String> = (0..f.order() as u64 - 1)
            .take(8)
            .map(|e| f.pow(g, e).to_string())
            .collect();
        println!("  generator powers: {} ...", powers.join(" "));
        let a = f.pow(g, 3);
        let b = f.pow(g, 5);
        println!(
            "  a = {a}, b = {b}: a+b = {}, ab = {}, a/b = {}, sigma(a) = {}",
            f.add(a, b),
            f.mul(a, b),
            f.div(a, b)?,
            f.sigma(a)
        );
    }
    Ok(())
}
