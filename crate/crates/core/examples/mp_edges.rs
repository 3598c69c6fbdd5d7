//! Evaluate the QuEST function on an identity covariance and compare with
//! the closed-form Marchenko–Pastur law.
//!
//! cargo run --example mp_edges

use quest::{quest, PopulationSpectrum};

fn main() -> quest::Result<()> {
    let (p, n) = (120, 360);
    let c = p as f64 / n as f64;
    let out = quest(&PopulationSpectrum::new(vec![1.0; p], n)?)?;

    let (lo, hi) = out.x_support[0];
    let a = (1.0 - c.sqrt()).powi(2);
    let b = (1.0 + c.sqrt()).powi(2);
    println!("c = {c:.4}, support intervals: {}", out.nu());
    println!("computed support  [{lo:.10}, {hi:.10}]");
    println!("closed form       [{a:.10}, {b:.10}]");
    println!("mean of λ = {:.6} (population mean 1)", out.mean());
    println!("smallest λ: {:.6?}", &out.lambda[..4]);
    println!("largest λ:  {:.6?}", &out.lambda[p - 4..]);

    let density = &out.curves[0].density;
    println!("\nx, f(x), closed form");
    for j in (0..density.x.len()).step_by(20) {
        let x = density.x[j];
        let exact = ((b - x) * (x - a)).max(0.0).sqrt() / (2.0 * std::f64::consts::PI * c * x);
        println!("{x:.6}, {:.6}, {exact:.6}", density.f[j]);
    }
    Ok(())
}
