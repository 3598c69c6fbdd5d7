//! Numerical inversion of the QuEST function.
//!
//! Minimizes `(1/p) Σ_i [q_i(t) − λ_i]²` over positive `t` with a
//! Levenberg–Marquardt iteration on `θ = log t`, using the analytic Jacobian.

use nalgebra::{DMatrix, DVector};

use crate::error::{QuestError, Result};
use crate::eval::{quest_with, QuestOptions};
use crate::spectrum::PopulationSpectrum;

#[derive(Debug, Clone, PartialEq)]
pub struct InvertOptions {
    /// Stop when `‖∇ objective‖∞ ≤ g_tol · mean(λ)²`.
    pub g_tol: f64,
    /// Stop when `objective ≤ f_tol · mean(λ)²`.
    pub f_tol: f64,
    pub max_iter: usize,
    /// Initial damping relative to the largest diagonal entry of `JᵀJ`.
    pub initial_damping: f64,
    pub group_tol: f64,
}

impl Default for InvertOptions {
    fn default() -> Self {
        Self {
            g_tol: 1e-10,
            f_tol: 1e-14,
            max_iter: 300,
            initial_damping: 1e-3,
            group_tol: crate::spectrum::DEFAULT_GROUP_TOL,
        }
    }
}

/// Number of support intervals observed at an accepted iterate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct SupportRecord {
    pub iteration: usize,
    pub nu: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InversionResult {
    /// Estimated population eigenvalues, ascending.
    pub tau_hat: Vec<f64>,
    /// `(1/p) Σ residual²` at `tau_hat`.
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub support_trace: Vec<SupportRecord>,
    /// Objective at the start point and after each accepted step.
    pub objective_trace: Vec<f64>,
}

struct Eval {
    residual: DVector<f64>,
    /// Jacobian with respect to θ = log t.
    jacobian: DMatrix<f64>,
    nu: usize,
}

impl Eval {
    fn half_sq(&self) -> f64 {
        0.5 * self.residual.norm_squared()
    }
}

struct Problem<'a> {
    observed: &'a DVector<f64>,
    n: usize,
    quest: QuestOptions,
}

impl Problem<'_> {
    fn eval(&self, theta: &[f64]) -> Result<Eval> {
        let t: Vec<f64> = theta.iter().map(|v| v.exp()).collect();
        let spec = PopulationSpectrum::new(t.clone(), self.n)?;
        let out = quest_with(&spec, &self.quest)?;
        let residual = DVector::from_vec(out.lambda) - self.observed;
        let mut jacobian = out.jacobian.expect("Jacobian requested");
        for (k, tk) in t.iter().enumerate() {
            jacobian.column_mut(k).scale_mut(*tk);
        }
        Ok(Eval {
            residual,
            jacobian,
            nu: out.support.nu(),
        })
    }
}

/// Validates observed eigenvalues: finite, not all zero. Tiny negative
/// values from a numerical eigensolver are snapped to zero.
fn prepare_observed(lambda: &[f64]) -> Result<Vec<f64>> {
    if lambda.is_empty() {
        return Err(QuestError::EmptySpectrum);
    }
    if let Some((index, &value)) = lambda.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(QuestError::InvalidEigenvalue { index, value });
    }
    let max = lambda.iter().cloned().fold(0.0f64, f64::max);
    if max <= 0.0 {
        return Err(QuestError::DegenerateSpectrum);
    }
    let floor = 1e-10 * max;
    let mut out = Vec::with_capacity(lambda.len());
    for (index, &v) in lambda.iter().enumerate() {
        if v < -floor {
            return Err(QuestError::InvalidEigenvalue { index, value: v });
        }
        out.push(if v <= floor { 0.0 } else { v });
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// Starting point: the observed eigenvalues. Zero entries (rank-deficient
/// samples) are replaced by a spread-out version of the nonzero ones so that
/// no two starting values tie, then rescaled to keep the mean.
fn starting_point(observed: &[f64], floor: f64) -> Vec<f64> {
    let p = observed.len();
    let nonzero: Vec<f64> = observed.iter().copied().filter(|&v| v > 0.0).collect();
    let mut start: Vec<f64> = if nonzero.len() == p {
        observed.to_vec()
    } else {
        let m = nonzero.len();
        (0..p)
            .map(|i| {
                // Linear interpolation of the nonzero empirical quantile function.
                let pos = (i as f64 + 0.5) / p as f64 * m as f64 - 0.5;
                let lo = pos.floor().clamp(0.0, (m - 1) as f64) as usize;
                let hi = (lo + 1).min(m - 1);
                let frac = (pos - lo as f64).clamp(0.0, 1.0);
                nonzero[lo] + frac * (nonzero[hi] - nonzero[lo])
            })
            .collect()
    };
    let target = observed.iter().sum::<f64>() / p as f64;
    let mean = start.iter().sum::<f64>() / p as f64;
    if mean > 0.0 && nonzero.len() != p {
        start.iter_mut().for_each(|v| *v *= target / mean);
    }
    start.iter_mut().for_each(|v| *v = v.max(floor));
    start
}

fn sorted(mut theta: Vec<f64>) -> Vec<f64> {
    theta.sort_by(f64::total_cmp);
    theta
}

/// Estimates population eigenvalues whose QuEST image best matches
/// `lambda_obs` in least squares.
pub fn invert(lambda_obs: &[f64], n: usize, opts: &InvertOptions) -> Result<InversionResult> {
    if n == 0 {
        return Err(QuestError::ZeroSampleSize);
    }
    let observed = prepare_observed(lambda_obs)?;
    let p = observed.len();
    let pf = p as f64;
    // The optimizer works on λ / mean(λ) so that its path does not depend
    // on the units of the input.
    let scale = observed.iter().sum::<f64>() / pf;
    let observed: Vec<f64> = observed.iter().map(|v| v / scale).collect();
    let floor = 1e-8;

    let target = DVector::from_vec(observed.clone());
    let problem = Problem {
        observed: &target,
        n,
        quest: QuestOptions {
            group_tol: opts.group_tol,
            ..QuestOptions::default()
        },
    };

    let mut theta = sorted(
        starting_point(&observed, floor)
            .iter()
            .map(|v| v.ln())
            .collect(),
    );
    let mut current = problem.eval(&theta)?;
    let mut support_trace = vec![SupportRecord {
        iteration: 0,
        nu: current.nu,
    }];
    let mut objective_trace = vec![2.0 * current.half_sq() / pf];

    let damping_for = |jac: &DMatrix<f64>| {
        let max_diag = jac
            .column_iter()
            .map(|c| c.norm_squared())
            .fold(0.0f64, f64::max);
        opts.initial_damping * max_diag.max(f64::MIN_POSITIVE)
    };
    let mut mu = damping_for(&current.jacobian);
    let mut growth = 2.0;
    let mut iterations = 0;
    let tolerances_met = |e: &Eval| {
        let objective = 2.0 * e.half_sq() / pf;
        let gradient = e.jacobian.tr_mul(&e.residual);
        (
            objective <= opts.f_tol,
            gradient.amax() * 2.0 / pf <= opts.g_tol,
        )
    };

    while iterations < opts.max_iter {
        let (small_objective, small_gradient) = tolerances_met(&current);
        if small_gradient || small_objective {
            break;
        }
        let gradient = current.jacobian.tr_mul(&current.residual);
        iterations += 1;

        let normal = current.jacobian.tr_mul(&current.jacobian);
        let max_diag = normal.diagonal().max();
        let diag = normal.diagonal().map(|d| d.max(1e-12 * max_diag));
        let mut system = normal.clone();
        for k in 0..p {
            system[(k, k)] += mu * diag[k];
        }
        let step = match system.cholesky() {
            Some(ch) => ch.solve(&(-&gradient)),
            None => {
                mu *= growth;
                growth *= 2.0;
                continue;
            }
        };
        let theta_norm = theta.iter().map(|v| v * v).sum::<f64>().sqrt();
        if step.norm() <= 1e-14 * (theta_norm + 1e-14) {
            break;
        }

        let trial: Vec<f64> = theta.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
        let trial = sorted(trial);
        let predicted = 0.5 * step.dot(&(mu * diag.component_mul(&step) - &gradient));
        match problem.eval(&trial) {
            Ok(next) if predicted > 0.0 => {
                let rho = (current.half_sq() - next.half_sq()) / predicted;
                if rho > 0.0 {
                    let nu_changed = next.nu != current.nu;
                    theta = trial;
                    current = next;
                    objective_trace.push(2.0 * current.half_sq() / pf);
                    if nu_changed {
                        support_trace.push(SupportRecord {
                            iteration: iterations,
                            nu: current.nu,
                        });
                        mu = damping_for(&current.jacobian);
                    } else {
                        mu *= (1.0 - (2.0 * rho - 1.0).powi(3)).max(1.0 / 3.0);
                    }
                    growth = 2.0;
                    continue;
                }
            }
            // Failed trial evaluations (including overflow of e^θ) count as
            // rejected steps.
            Ok(_) => {}
            Err(_) => {}
        }
        mu *= growth;
        growth *= 2.0;
        if !mu.is_finite() {
            break;
        }
    }

    let (small_objective, small_gradient) = tolerances_met(&current);
    let converged = small_objective || small_gradient;
    let unit2 = scale * scale;
    Ok(InversionResult {
        tau_hat: theta.iter().map(|v| scale * v.exp()).collect(),
        objective: unit2 * 2.0 * current.half_sq() / pf,
        iterations,
        converged,
        support_trace,
        objective_trace: objective_trace.iter().map(|v| unit2 * v).collect(),
    })
}
