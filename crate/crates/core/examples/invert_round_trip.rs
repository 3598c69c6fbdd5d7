//! Recover population eigenvalues from QuEST output (exact round trip) and
//! from simulated sample eigenvalues (the estimation problem).
//!
//! cargo run --release --example invert_round_trip

use quest::sim::{nmse, sample_eigenvalues, Shape, ShapeSpec, Variate};
use quest::{invert, quest_with, InvertOptions, PopulationSpectrum, QuestOptions};

fn main() -> quest::Result<()> {
    let (p, n) = (30, 90);
    let tau = ShapeSpec::new(Shape::H1, 10.0)?.population(p);

    let lambda = quest_with(
        &PopulationSpectrum::new(tau.clone(), n)?,
        &QuestOptions::values_only(),
    )?
    .lambda;
    let res = invert(&lambda, n, &InvertOptions::default())?;
    println!(
        "round trip: NMSE {:.2e}, objective {:.2e}, {} iterations, converged {}",
        nmse(&res.tau_hat, &tau),
        res.objective,
        res.iterations,
        res.converged
    );

    let (p, n) = (100, 300);
    let tau = ShapeSpec::new(Shape::H1, 10.0)?.population(p);
    let sample = sample_eigenvalues(&tau, n, Variate::Gaussian, 7)?;
    let res = invert(&sample, n, &InvertOptions::default())?;
    println!("\nsample of size n = {n}, p = {p}:");
    println!("  NMSE of sample eigenvalues  {:.4e}", nmse(&sample, &tau));
    println!(
        "  NMSE of inverted estimate   {:.4e}",
        nmse(&res.tau_hat, &tau)
    );
    println!("\n  k    tau      sample   estimate");
    for k in (0..p).step_by(11) {
        println!(
            "{k:>3} {:>8.4} {:>8.4} {:>8.4}",
            tau[k], sample[k], res.tau_hat[k]
        );
    }
    Ok(())
}
