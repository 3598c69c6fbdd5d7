//! The four population shapes used in the simulations: CDF values and the
//! resulting population eigenvalues for κ = 10.
//!
//! cargo run --example population_shapes

use quest::sim::{ShapeSpec, SHAPES};

fn main() -> quest::Result<()> {
    println!("{:>5} {}", "x", SHAPES.map(|s| format!("{s:>8}")).join(""));
    for i in 0..=10 {
        let x = i as f64 / 10.0;
        let row: Vec<String> = SHAPES
            .iter()
            .map(|s| s.cdf(x).map(|v| format!("{v:>8.4}")))
            .collect::<quest::Result<_>>()?;
        println!("{x:>5.1} {}", row.join(""));
    }
    println!();
    for shape in SHAPES {
        let tau = ShapeSpec::new(shape, 10.0)?.population(8);
        println!("{shape}, p = 8: {:.3?}", tau);
    }
    Ok(())
}
