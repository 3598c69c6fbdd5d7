//! Marčenko–Pastur equation in u-space and the limiting sample density.
//!
//! At each grid point ξ the imaginary part `y ≥ 0` solves
//! `Γ(y) = Σ_k w_k t_k² / ((t_k − ξ)² + y²) − 1/c = 0`. The complex number
//! `z = ξ + iy` is then mapped back to a density point
//! `x = z − c z m_LH(z)`, `f = Im[−1/z] / (cπ)` where
//! `m_LH(z) = (1/p) Σ τ_l / (τ_l − z)`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{QuestError, Result, Stage};
use crate::grid::IntervalGrid;
use crate::root::{self, Bracket, DEFAULT_MAX_ITER, DEFAULT_X_TOL};
use crate::spectrum::GroupedSpectrum;

/// Relative tolerance on the imaginary part of `x`.
const MANIFOLD_TOL: f64 = 1e-8;

/// `Γ(y)` at grid point `xi`.
pub fn gamma(y: f64, xi: f64, g: &GroupedSpectrum, c: f64) -> f64 {
    let y2 = y * y;
    let s: f64 = g
        .t()
        .iter()
        .zip(g.counts())
        .map(|(&t, &m)| {
            let d = t - xi;
            m as f64 * t * t / (d * d + y2)
        })
        .sum();
    s / g.p() as f64 - 1.0 / c
}

/// Unique `y > 0` with `Γ(y) = 0` at an interior grid point `xi`.
pub fn solve_mp_at(xi: f64, g: &GroupedSpectrum, c: f64) -> Result<f64> {
    // δ = min_k (t_k − ξ)², Ω = its argmin set.
    let delta = g
        .t()
        .iter()
        .map(|&t| (t - xi) * (t - xi))
        .fold(f64::INFINITY, f64::min);
    let near: f64 = (0..g.k())
        .filter(|&k| (g.t()[k] - xi).powi(2) == delta)
        .map(|k| g.weight(k) * g.t()[k] * g.t()[k])
        .sum();
    let lo = 0.5 * (c * near - delta).max(0.0).sqrt();
    let hi = (c * g.second_moment() - delta).max(0.0).sqrt() + 1.0;

    let f = |y: f64| gamma(y, xi, g, c);
    let f_lo = f(lo);
    if !(f_lo > 0.0) {
        return Err(QuestError::numerical(
            Stage::Solve,
            format!("Γ(y_lo) = {f_lo:e} ≤ 0 at ξ = {xi} (grid point outside the support?)"),
        ));
    }
    let bracket = Bracket {
        lo,
        hi,
        f_lo,
        f_hi: f(hi),
    };
    root::find_zero(f, bracket, DEFAULT_X_TOL, DEFAULT_MAX_ITER).map_err(|source| {
        QuestError::Root {
            stage: Stage::Solve,
            source,
        }
    })
}

/// Solutions `y_j` on one interval grid; zero at both endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct MpSolution {
    pub xi: Vec<f64>,
    pub y: Vec<f64>,
}

impl MpSolution {
    pub fn z(&self, j: usize) -> Complex64 {
        Complex64::new(self.xi[j], self.y[j])
    }

    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }
}

/// Solves the MP equation at every interior point of `grid`.
pub fn solve_interval(grid: &IntervalGrid, g: &GroupedSpectrum, c: f64) -> Result<MpSolution> {
    let last = grid.xi.len() - 1;
    let y = grid
        .xi
        .iter()
        .enumerate()
        .map(|(j, &xi)| {
            if j == 0 || j == last {
                Ok(0.0)
            } else {
                solve_mp_at(xi, g, c)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MpSolution {
        xi: grid.xi.clone(),
        y,
    })
}

/// `(1/p) Σ_k τ_k / (τ_k − z)` over the grouped spectrum (zeros contribute nothing).
fn m_lh(z: Complex64, g: &GroupedSpectrum) -> Complex64 {
    let s: Complex64 = g
        .t()
        .iter()
        .zip(g.counts())
        .map(|(&t, &m)| m as f64 * t / (t - z))
        .sum();
    s / g.p() as f64
}

fn map_point(z: Complex64, g: &GroupedSpectrum, c: f64, index: usize) -> Result<(f64, f64)> {
    let x = z - c * z * m_lh(z, g);
    let scale = x.re.abs().max(z.im).max(f64::MIN_POSITIVE);
    if x.im.abs() > MANIFOLD_TOL * scale {
        return Err(QuestError::OffManifold {
            index,
            residual: x.im,
        });
    }
    let f = if z.im == 0.0 {
        0.0
    } else {
        (-1.0 / z).im / (c * PI)
    };
    Ok((x.re, f))
}

/// Maps a solution point `z = ξ + iy` to the density point `(x, f)`.
pub fn map_to_density(z: Complex64, g: &GroupedSpectrum, c: f64) -> Result<(f64, f64)> {
    map_point(z, g, c, 0)
}

/// Density points `(x_j, f_j)` along one interval, with optional Jacobians.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityCurve {
    pub x: Vec<f64>,
    pub f: Vec<f64>,
    pub dx: Option<DMatrix<f64>>,
    pub df: Option<DMatrix<f64>>,
}

/// Maps every solution point of an interval; checks that `x` increases.
pub fn density_curve(sol: &MpSolution, g: &GroupedSpectrum, c: f64) -> Result<DensityCurve> {
    let mut x = Vec::with_capacity(sol.len());
    let mut f = Vec::with_capacity(sol.len());
    for j in 0..sol.len() {
        let (xj, fj) = map_point(sol.z(j), g, c, j)?;
        x.push(xj);
        f.push(fj);
    }
    if let Some(j) = x.windows(2).position(|w| !(w[0] < w[1])) {
        return Err(QuestError::numerical(
            Stage::Density,
            format!(
                "x not increasing along the grid at j = {j}: {} ≥ {}",
                x[j],
                x[j + 1]
            ),
        ));
    }
    Ok(DensityCurve {
        x,
        f,
        dx: None,
        df: None,
    })
}

/// Derivatives of `y`, `x`, `f` with respect to the raw eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct MpJacobians {
    pub dy: DMatrix<f64>,
    pub dx: DMatrix<f64>,
    pub df: DMatrix<f64>,
}

/// Chains the grid Jacobian `∂ξ/∂τ` through the MP solution and the
/// density mapping. Columns of zero eigenvalues are left at zero.
pub fn mp_jacobians(grid_jac: &DMatrix<f64>, sol: &MpSolution, tau: &[f64], c: f64) -> MpJacobians {
    let rows = sol.len();
    let p = tau.len();
    let pf = p as f64;
    let mut dy = DMatrix::zeros(rows, p);
    let mut dx = DMatrix::zeros(rows, p);
    let mut df = DMatrix::zeros(rows, p);

    let mut d = vec![0.0; p];
    for j in 0..rows {
        let xi = sol.xi[j];
        let y = sol.y[j];
        let z = sol.z(j);
        let interior = y > 0.0;

        // Raw-τ sums at this point.
        let mut m = Complex64::new(0.0, 0.0);
        let mut m_prime = Complex64::new(0.0, 0.0);
        let (mut s_y, mut s_xi) = (0.0, 0.0);
        for (l, &t) in tau.iter().enumerate() {
            let r = t - xi;
            d[l] = r * r + y * y;
            let inv = 1.0 / (t - z);
            m += t * inv;
            m_prime += t * inv * inv;
            let d2 = d[l] * d[l];
            s_y += t * t * y / d2;
            s_xi += t * t * r / d2;
        }
        m /= pf;
        m_prime /= pf;
        let dy_dxi = if interior { s_xi / s_y } else { 0.0 };
        let one_minus_cm = 1.0 - c * m;
        let inv_z2 = if interior {
            1.0 / (z * z)
        } else {
            Complex64::new(0.0, 0.0)
        };

        for (k, &t) in tau.iter().enumerate() {
            if t == 0.0 {
                continue;
            }
            let dxi = grid_jac[(j, k)];
            let dyk = if interior {
                let r = t - xi;
                let direct = (t / d[k] - t * t * r / (d[k] * d[k])) / s_y;
                direct + dy_dxi * dxi
            } else {
                0.0
            };
            let dz = Complex64::new(dxi, dyk);
            let tz = t - z;
            let dm = -z / (pf * tz * tz) + dz * m_prime;
            let dxk = dz * one_minus_cm - c * z * dm;
            dy[(j, k)] = dyk;
            dx[(j, k)] = dxk.re;
            if interior {
                df[(j, k)] = (dz * inv_z2).im / (c * PI);
            }
        }
    }
    MpJacobians { dy, dx, df }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;
    use crate::spectrum::GroupedSpectrum;
    use crate::support::find_support;

    fn single() -> GroupedSpectrum {
        GroupedSpectrum::from_parts(vec![1.0], vec![1], 0).unwrap()
    }

    /// Closed-form MP density for τ ≡ 1.
    fn mp_density(x: f64, c: f64) -> f64 {
        let a = (1.0 - c.sqrt()).powi(2);
        let b = (1.0 + c.sqrt()).powi(2);
        ((b - x) * (x - a)).max(0.0).sqrt() / (2.0 * PI * c * x)
    }

    #[test]
    fn unit_spectrum_center() {
        let c = 1.0 / 3.0;
        let y = solve_mp_at(1.0, &single(), c).unwrap();
        assert!((y - 1.0 / 3f64.sqrt()).abs() < 1e-12);
        let (x, f) = map_to_density(Complex64::new(1.0, y), &single(), c).unwrap();
        assert!((x - 4.0 / 3.0).abs() < 1e-12);
        assert!((f - mp_density(x, c)).abs() < 1e-12);
        assert!((f - 0.41350).abs() < 1e-5);
    }

    #[test]
    fn unit_spectrum_edges() {
        let c: f64 = 1.0 / 3.0;
        let r = c.sqrt();
        let (x, f) = map_to_density(Complex64::new(1.0 - r, 0.0), &single(), c).unwrap();
        assert!((x - (1.0 - r).powi(2)).abs() < 1e-12);
        assert!((x - 0.1786328).abs() < 1e-7);
        assert_eq!(f, 0.0);
        let (x, f) = map_to_density(Complex64::new(1.0 + r, 0.0), &single(), c).unwrap();
        assert!((x - 2.4880338).abs() < 1e-7);
        assert_eq!(f, 0.0);
        // y → 0 approaching the edges.
        let near = solve_mp_at(1.0 + r - 1e-8, &single(), c).unwrap();
        assert!(near < 1e-3);
    }

    #[test]
    fn off_manifold_rejected() {
        let err = map_to_density(Complex64::new(1.0, 0.3), &single(), 1.0 / 3.0).unwrap_err();
        assert!(matches!(err, QuestError::OffManifold { .. }));
    }

    #[test]
    fn density_matches_closed_form_on_grid() {
        let c = 0.25;
        let g = GroupedSpectrum::from_parts(vec![1.0], vec![40], 0).unwrap();
        let s = find_support(&g, c).unwrap();
        let grid = build_grid(&s, 0, 1);
        let sol = solve_interval(&grid, &g, c).unwrap();
        let curve = density_curve(&sol, &g, c).unwrap();
        for (&x, &f) in curve.x.iter().zip(&curve.f) {
            assert!(
                (f - mp_density(x, c)).abs() < 1e-8,
                "x={x}: {f} vs {}",
                mp_density(x, c)
            );
        }
    }

    #[test]
    fn two_cluster_residuals_and_positivity() {
        let c = 0.1;
        let g = GroupedSpectrum::from_parts(vec![1.0, 2.0], vec![5, 5], 0).unwrap();
        let s = find_support(&g, c).unwrap();
        for i in 0..s.nu() {
            let grid = build_grid(&s, i, 1);
            let sol = solve_interval(&grid, &g, c).unwrap();
            let curve = density_curve(&sol, &g, c).unwrap();
            let m = grid.interior();
            for j in 1..=m {
                assert!(gamma(sol.y[j], sol.xi[j], &g, c).abs() <= 1e-10);
                assert!(curve.f[j] > 0.0);
            }
            assert_eq!(curve.f[0], 0.0);
            assert_eq!(curve.f[m + 1], 0.0);
            // Γ is strictly decreasing in y.
            let xi = sol.xi[m / 2 + 1];
            let vals: Vec<f64> = (0..50).map(|q| gamma(q as f64 * 0.05, xi, &g, c)).collect();
            assert!(vals.windows(2).all(|w| w[1] < w[0]));
        }
    }
}
