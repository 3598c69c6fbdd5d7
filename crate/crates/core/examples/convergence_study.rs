//! Monte Carlo NMSE of the inversion estimator as the dimension grows, with
//! the fitted log-log slope.
//!
//! cargo run --release --example convergence_study -- [reps] [h1|h2|h3|h4] [dist]

use quest::sim::{run_convergence, Shape, ShapeSpec, SimulationConfig, Variate};
use quest::InvertOptions;

fn main() -> quest::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let reps = args.get(1).map_or(Ok(20), |s| s.parse()).unwrap_or(20);
    let shape: Shape = args.get(2).map_or(Ok(Shape::H1), |s| s.parse())?;
    let variate: Variate = args.get(3).map_or(Ok(Variate::Gaussian), |s| s.parse())?;
    let config = SimulationConfig {
        shape: ShapeSpec::new(shape, 10.0)?,
        variate,
        concentration: 1.0 / 3.0,
        dims: vec![30, 60, 100, 200],
        reps,
        seed: 1,
        invert: InvertOptions::default(),
    };
    let report = run_convergence(&config)?;
    println!("shape {shape}, {variate} variates, c = 1/3, {reps} reps per dimension");
    for d in &report.summary.dims {
        println!(
            "p = {:>4}  n = {:>4}  mean NMSE {:.4e}  ({} reps used, {} not converged)",
            d.p, d.n, d.mean_nmse, d.reps_used, d.not_converged
        );
    }
    if let Some(slope) = report.summary.slope {
        println!("log-log slope {slope:.3}");
    }
    Ok(())
}
