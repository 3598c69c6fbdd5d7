//! Arcsine grids over the u-space support intervals.

use std::f64::consts::FRAC_PI_2;

use nalgebra::DMatrix;

use crate::support::SupportU;

/// Grid over one support interval: `ξ_0 = u_{2i-1} < ξ_1 < … < ξ_{m+1} = u_{2i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalGrid {
    /// Grid points.
    pub xi: Vec<f64>,
    /// Interpolation fractions `s_j = sin²(πj / (2(m+1)))`, shared by the
    /// points and their derivatives.
    pub s: Vec<f64>,
}

impl IntervalGrid {
    /// Number of interior points.
    pub fn interior(&self) -> usize {
        self.xi.len() - 2
    }
}

/// Arcsine fractions for `interior` interior points, endpoints included.
pub fn arcsine_fractions(interior: usize) -> Vec<f64> {
    let m1 = (interior + 1) as f64;
    (0..=interior + 1)
        .map(|j| {
            if j == 0 {
                0.0
            } else if j == interior + 1 {
                1.0
            } else {
                (FRAC_PI_2 * j as f64 / m1).sin().powi(2)
            }
        })
        .collect()
}

/// Grid over `[lo, hi]` with `interior` interior points.
pub fn arcsine_grid(lo: f64, hi: f64, interior: usize) -> IntervalGrid {
    let s = arcsine_fractions(interior);
    let width = hi - lo;
    let mut xi: Vec<f64> = s.iter().map(|&s| lo + width * s).collect();
    xi[interior + 1] = hi;
    IntervalGrid { xi, s }
}

/// Grid over support interval `i` (0-based) with `ω_i · density` interior points.
pub fn build_grid(supp: &SupportU, i: usize, density: usize) -> IntervalGrid {
    let (lo, hi) = supp.interval(i);
    arcsine_grid(lo, hi, supp.omega()[i] * density.max(1))
}

/// `∂ξ_j/∂τ_k = (1 − s_j) ∂u_{2i-1}/∂τ_k + s_j ∂u_{2i}/∂τ_k`.
///
/// `support_jacobian` is the 2ν×p endpoint Jacobian.
pub fn grid_jacobian(
    grid: &IntervalGrid,
    i: usize,
    support_jacobian: &DMatrix<f64>,
) -> DMatrix<f64> {
    let p = support_jacobian.ncols();
    let lo = support_jacobian.row(2 * i);
    let hi = support_jacobian.row(2 * i + 1);
    DMatrix::from_fn(grid.s.len(), p, |j, k| {
        let s = grid.s[j];
        (1.0 - s) * lo[k] + s * hi[k]
    })
}
