//! Compare the analytic Jacobian ∂λ/∂τ with central finite differences for
//! each population shape, and check Euler's identity J·τ = λ.
//!
//! cargo run --example jacobian_check

use nalgebra::DVector;
use quest::sim::{ShapeSpec, SHAPES};
use quest::{compare_jacobians, quest, quest_fd_jacobian, FdStep, PopulationSpectrum};

fn main() -> quest::Result<()> {
    for shape in SHAPES {
        let tau = ShapeSpec::new(shape, 10.0)?.population(10);
        let spec = PopulationSpectrum::new(tau, 30)?;
        let out = quest(&spec)?;
        let jac = out
            .jacobian
            .as_ref()
            .expect("Jacobian is computed by default");
        let fd = quest_fd_jacobian(&spec, FdStep::Relative(1e-6))?;
        let check = compare_jacobians(jac, &fd);
        let euler = (jac * DVector::from_column_slice(spec.tau())
            - DVector::from_vec(out.lambda.clone()))
        .amax();
        println!(
            "{shape}: max |J - J_fd| = {:.2e}, flagged columns = {}, max |J tau - lambda| = {euler:.2e}",
            check.max_abs,
            check.flagged.iter().filter(|f| **f).count()
        );
    }
    Ok(())
}
