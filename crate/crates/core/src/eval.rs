//! The QuEST function: population eigenvalues to limiting quantized sample
//! eigenvalues, with the analytic Jacobian.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::cdf::{self, CdfCurve};
use crate::density::{self, DensityCurve, MpSolution};
use crate::error::{QuestError, Result};
use crate::grid::{self, IntervalGrid};
use crate::spectrum::{group_spectrum, GroupedSpectrum, PopulationSpectrum, DEFAULT_GROUP_TOL};
use crate::support::{self, SupportU};

#[derive(Debug, Clone, PartialEq)]
pub struct QuestOptions {
    /// Relative tolerance for merging equal population eigenvalues.
    pub group_tol: f64,
    /// Interior grid points per population eigenvalue. `1` is the standard
    /// grid; larger values give a refined reference evaluation.
    pub grid_density: usize,
    /// Compute the p×p Jacobian.
    pub jacobian: bool,
}

impl Default for QuestOptions {
    fn default() -> Self {
        Self {
            group_tol: DEFAULT_GROUP_TOL,
            grid_density: 1,
            jacobian: true,
        }
    }
}

impl QuestOptions {
    pub fn values_only() -> Self {
        Self {
            jacobian: false,
            ..Self::default()
        }
    }
}

/// Intermediate curves of one support interval.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalCurves {
    pub grid: IntervalGrid,
    pub grid_jacobian: Option<DMatrix<f64>>,
    pub solution: MpSolution,
    pub dy: Option<DMatrix<f64>>,
    pub density: DensityCurve,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuestOutput {
    /// Quantized sample eigenvalues, ascending.
    pub lambda: Vec<f64>,
    /// `∂λ_κ/∂τ_k` (rows: λ index, columns: sorted τ index).
    pub jacobian: Option<DMatrix<f64>>,
    pub support: SupportU,
    /// Support intervals mapped to the real axis, `[x_0, x_{m+1}]` per interval.
    pub x_support: Vec<(f64, f64)>,
    /// Number of eigenvalues placed at exactly zero.
    pub zero_atoms: usize,
    /// Both `p > n` and zero population eigenvalues are present; the zero
    /// atom is then `max(p − n, #zeros)`.
    pub joint_zero_atom: bool,
    pub curves: Vec<IntervalCurves>,
    pub cdf: CdfCurve,
}

impl QuestOutput {
    pub fn nu(&self) -> usize {
        self.support.nu()
    }

    pub fn mean(&self) -> f64 {
        self.lambda.iter().sum::<f64>() / self.lambda.len() as f64
    }
}

/// Evaluates the QuEST function with its Jacobian.
pub fn quest(spec: &PopulationSpectrum) -> Result<QuestOutput> {
    quest_with(spec, &QuestOptions::default())
}

fn zero_atoms(spec: &PopulationSpectrum, g: &GroupedSpectrum) -> usize {
    spec.p().saturating_sub(spec.n()).max(g.zero_count())
}

pub fn quest_with(spec: &PopulationSpectrum, opts: &QuestOptions) -> Result<QuestOutput> {
    let p = spec.p();
    let c = spec.c();
    let tau = spec.tau();
    let g = group_spectrum(spec, opts.group_tol)?;
    let mut supp = support::find_support(&g, c)?;
    if opts.jacobian {
        supp.attach_jacobian(tau)?;
    }

    let mut curves = Vec::with_capacity(supp.nu());
    for i in 0..supp.nu() {
        let grid = grid::build_grid(&supp, i, opts.grid_density);
        let solution = density::solve_interval(&grid, &g, c)?;
        let mut density = density::density_curve(&solution, &g, c)?;
        let (grid_jacobian, dy) = match supp.endpoint_jacobian() {
            Some(sj) => {
                let gj = grid::grid_jacobian(&grid, i, sj);
                let jac = density::mp_jacobians(&gj, &solution, tau, c);
                density.dx = Some(jac.dx);
                density.df = Some(jac.df);
                (Some(gj), Some(jac.dy))
            }
            None => (None, None),
        };
        curves.push(IntervalCurves {
            grid,
            grid_jacobian,
            solution,
            dy,
            density,
        });
    }

    let zero = zero_atoms(spec, &g);
    let densities: Vec<DensityCurve> = curves.iter().map(|c| c.density.clone()).collect();
    let cdf = cdf::integrate_cdf(&densities, supp.omega(), zero, p)?;

    let mut lambda = vec![0.0; zero];
    let mut jacobian = opts.jacobian.then(|| DMatrix::zeros(p, p));
    for (curve, icdf) in curves.iter().zip(&cdf.intervals) {
        let x = &curve.density.x;
        let start = lambda.len();
        lambda.extend(cdf::quantize_interval(icdf, x, p));
        if let Some(jac) = jacobian.as_mut() {
            let dx = curve.density.dx.as_ref().expect("density Jacobian");
            for (r, row) in cdf::quantize_interval_jacobian(icdf, x, dx, p)
                .into_iter()
                .enumerate()
            {
                jac.row_mut(start + r).copy_from(&row.transpose());
            }
        }
    }
    if lambda.len() != p {
        return Err(QuestError::numerical(
            crate::error::Stage::Quantize,
            format!("produced {} eigenvalues, expected {p}", lambda.len()),
        ));
    }

    let x_support = curves
        .iter()
        .map(|c| (c.density.x[0], *c.density.x.last().unwrap()))
        .collect();
    Ok(QuestOutput {
        lambda,
        jacobian,
        support: supp,
        x_support,
        zero_atoms: zero,
        joint_zero_atom: spec.p() > spec.n() && g.zero_count() > 0,
        curves,
        cdf,
    })
}

/// Step size for finite differences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FdStep {
    Absolute(f64),
    /// `h · τ_k` (or `h · mean(τ)` for a zero eigenvalue).
    Relative(f64),
}

/// Central-difference Jacobian with per-column diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct FdJacobian {
    pub matrix: DMatrix<f64>,
    /// The number of support intervals differs between the perturbed
    /// evaluations and the base point; such columns are unreliable.
    pub flagged: Vec<bool>,
    /// A forward difference was used because `τ_k − h < 0`.
    pub one_sided: Vec<bool>,
}

fn support_count(tau: Vec<f64>, n: usize, opts: &QuestOptions) -> Result<(usize, Vec<f64>)> {
    let spec = PopulationSpectrum::new(tau, n)?;
    let out = quest_with(&spec, opts)?;
    Ok((out.nu(), out.lambda))
}

/// Finite-difference oracle for the QuEST Jacobian.
pub fn quest_fd_jacobian(spec: &PopulationSpectrum, step: FdStep) -> Result<FdJacobian> {
    let opts = QuestOptions::values_only();
    let p = spec.p();
    let n = spec.n();
    let tau = spec.tau();
    let base = quest_with(spec, &opts)?;
    let base_nu = base.nu();
    let mean = spec.mean();

    let columns: Vec<Result<(Vec<f64>, bool, bool)>> = (0..p)
        .into_par_iter()
        .map(|k| {
            let h = match step {
                FdStep::Absolute(h) => h,
                FdStep::Relative(h) if tau[k] > 0.0 => h * tau[k],
                FdStep::Relative(h) => h * mean,
            };
            let perturbed = |delta: f64| {
                let mut t = tau.to_vec();
                t[k] += delta;
                support_count(t, n, &opts)
            };
            let (nu_plus, plus) = perturbed(h)?;
            let one_sided = tau[k] - h < 0.0;
            let (nu_minus, minus, denom) = if one_sided {
                (base_nu, base.lambda.clone(), h)
            } else {
                let (nu, l) = perturbed(-h)?;
                (nu, l, 2.0 * h)
            };
            let col = plus
                .iter()
                .zip(&minus)
                .map(|(a, b)| (a - b) / denom)
                .collect();
            Ok((col, nu_plus != base_nu || nu_minus != base_nu, one_sided))
        })
        .collect();

    let mut matrix = DMatrix::zeros(p, p);
    let mut flagged = vec![false; p];
    let mut one_sided = vec![false; p];
    for (k, col) in columns.into_iter().enumerate() {
        let (values, flag, side) = col?;
        for (i, v) in values.into_iter().enumerate() {
            matrix[(i, k)] = v;
        }
        flagged[k] = flag;
        one_sided[k] = side;
    }
    Ok(FdJacobian {
        matrix,
        flagged,
        one_sided,
    })
}

/// Discrepancy between an analytic Jacobian and a finite-difference one.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobianCheck {
    /// Max absolute discrepancy over unflagged columns.
    pub max_abs: f64,
    /// Max absolute discrepancy per column.
    pub per_column: Vec<f64>,
    pub flagged: Vec<bool>,
}

pub fn compare_jacobians(analytic: &DMatrix<f64>, fd: &FdJacobian) -> JacobianCheck {
    let per_column: Vec<f64> = (0..analytic.ncols())
        .map(|k| {
            (analytic.column(k) - fd.matrix.column(k))
                .iter()
                .fold(0.0f64, |m, v| m.max(v.abs()))
        })
        .collect();
    let max_abs = per_column
        .iter()
        .zip(&fd.flagged)
        .filter(|(_, &f)| !f)
        .fold(0.0f64, |m, (v, _)| m.max(*v));
    JacobianCheck {
        max_abs,
        per_column,
        flagged: fd.flagged.clone(),
    }
}
