//! Watch the limiting sample spectrum split as the concentration drops.
//! The population has two eigenvalues, 1 and 2, each with multiplicity 50.
//!
//! cargo run --example support_separation

use quest::{quest_with, PopulationSpectrum, QuestOptions};

fn main() -> quest::Result<()> {
    let mut tau = vec![1.0; 50];
    tau.extend(vec![2.0; 50]);
    println!("{:>8} {:>6} {:>3}  x-support", "n", "c", "nu");
    for n in [200, 400, 800, 860, 870, 900, 2000] {
        let out = quest_with(
            &PopulationSpectrum::new(tau.clone(), n)?,
            &QuestOptions::values_only(),
        )?;
        let intervals: Vec<String> = out
            .x_support
            .iter()
            .zip(out.support.omega())
            .map(|((a, b), w)| format!("[{a:.4}, {b:.4}] ({w} eigenvalues)"))
            .collect();
        println!(
            "{n:>8} {:>6.4} {:>3}  {}",
            100.0 / n as f64,
            out.nu(),
            intervals.join(" ")
        );
    }
    Ok(())
}
