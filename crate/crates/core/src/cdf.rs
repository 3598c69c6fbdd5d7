//! Limiting sample CDF by trapezoidal integration with per-interval
//! renormalization, and its quantization into p sample eigenvalues.

use nalgebra::{DMatrix, DVector};

use crate::density::DensityCurve;
use crate::error::{QuestError, Result};

/// CDF values along one support interval.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalCdf {
    /// Raw trapezoid values `F̃_j`.
    pub raw: Vec<f64>,
    /// Renormalized values `F_j`; `F_0` and `F_{m+1}` are the exact interval masses.
    pub values: Vec<f64>,
    /// `p · F_0` and `p · F_{m+1}`.
    pub start_count: usize,
    pub end_count: usize,
    pub jacobian: Option<DMatrix<f64>>,
}

impl IntervalCdf {
    pub fn start(&self) -> f64 {
        self.values[0]
    }

    pub fn end(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// Mass carried by the raw trapezoid rule, `F̃_{m+1} − F_0`.
    pub fn raw_mass(&self) -> f64 {
        self.raw.last().unwrap() - self.raw[0]
    }
}

/// Limiting CDF over all support intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct CdfCurve {
    pub intervals: Vec<IntervalCdf>,
    pub p: usize,
}

/// Integrates one interval's density from `F_0 = start_count / p` and
/// rescales so that the interval ends exactly at `end_count / p`.
pub fn integrate_interval(
    curve: &DensityCurve,
    start_count: usize,
    end_count: usize,
    p: usize,
    interval: usize,
) -> Result<IntervalCdf> {
    let start = start_count as f64 / p as f64;
    let end = end_count as f64 / p as f64;
    let (x, f) = (&curve.x, &curve.f);
    let mut raw = Vec::with_capacity(x.len());
    raw.push(start);
    let mut acc = start;
    for l in 1..x.len() {
        acc += 0.5 * (x[l] - x[l - 1]) * (f[l] + f[l - 1]);
        raw.push(acc);
    }
    let raw_end = acc;
    if !(raw_end > start) || !(end > start) {
        return Err(QuestError::DegenerateInterval { interval });
    }
    let ratio = (end - start) / (raw_end - start);
    let last = raw.len() - 1;
    let values = raw
        .iter()
        .enumerate()
        .map(|(j, &r)| match j {
            0 => start,
            j if j == last => end,
            _ => start + (r - start) * ratio,
        })
        .collect();
    Ok(IntervalCdf {
        raw,
        values,
        start_count,
        end_count,
        jacobian: None,
    })
}

/// `∂F_j/∂τ_k` for one interval. Requires `curve.dx` and `curve.df`.
pub fn cdf_jacobian(curve: &DensityCurve, cdf: &IntervalCdf) -> DMatrix<f64> {
    let dx = curve.dx.as_ref().expect("density Jacobian required");
    let df = curve.df.as_ref().expect("density Jacobian required");
    let (x, f) = (&curve.x, &curve.f);
    let rows = x.len();
    let p = dx.ncols();

    // Raw trapezoid derivatives, accumulated row by row.
    let mut draw = DMatrix::<f64>::zeros(rows, p);
    for l in 1..rows {
        let fs = 0.5 * (f[l] + f[l - 1]);
        let h = 0.5 * (x[l] - x[l - 1]);
        for k in 0..p {
            draw[(l, k)] = draw[(l - 1, k)]
                + (dx[(l, k)] - dx[(l - 1, k)]) * fs
                + h * (df[(l, k)] + df[(l - 1, k)]);
        }
    }

    let start = cdf.start();
    let mass = cdf.end() - start;
    let raw_mass = cdf.raw_mass();
    let last = rows - 1;
    let mut jac = DMatrix::zeros(rows, p);
    for j in 1..last {
        let rel = cdf.raw[j] - start;
        for k in 0..p {
            jac[(j, k)] =
                mass * (draw[(j, k)] * raw_mass - rel * draw[(last, k)]) / (raw_mass * raw_mass);
        }
    }
    jac
}

/// Integrates every interval. `zero_atoms` eigenvalues sit at 0 and the
/// interval masses follow the cumulative counts in `omega`.
pub fn integrate_cdf(
    curves: &[DensityCurve],
    omega: &[usize],
    zero_atoms: usize,
    p: usize,
) -> Result<CdfCurve> {
    let mut start_count = zero_atoms;
    let mut cumulative = 0;
    let mut intervals = Vec::with_capacity(curves.len());
    for (i, (curve, &w)) in curves.iter().zip(omega).enumerate() {
        cumulative += w;
        let mut cdf = integrate_interval(curve, start_count, cumulative, p, i)?;
        if curve.dx.is_some() {
            cdf.jacobian = Some(cdf_jacobian(curve, &cdf));
        }
        start_count = cumulative;
        intervals.push(cdf);
    }
    Ok(CdfCurve { intervals, p })
}

/// One trapezoid piece `∫_s^e L(v) dv` of the piecewise-linear inverse CDF
/// on segment `[F_l, F_{l+1}]`, where `L(F_l) = x_l`, `L(F_{l+1}) = x_{l+1}`.
struct Piece {
    l: usize,
    s: f64,
    e: f64,
    s_is_node: bool,
    e_is_node: bool,
}

impl Piece {
    fn value(&self, fv: &[f64], x: &[f64]) -> f64 {
        let l = self.l;
        let width = fv[l + 1] - fv[l];
        let a = self.e - fv[l];
        let b = self.s - fv[l];
        (self.e - self.s) * x[l] + (x[l + 1] - x[l]) * (a * a - b * b) / (2.0 * width)
    }

    /// Adds `scale · ∂/∂τ` of the piece to `out`.
    fn add_derivative(
        &self,
        fv: &[f64],
        x: &[f64],
        dfv: &DMatrix<f64>,
        dx: &DMatrix<f64>,
        scale: f64,
        out: &mut DVector<f64>,
    ) {
        let l = self.l;
        let width = fv[l + 1] - fv[l];
        let gap = x[l + 1] - x[l];
        let a = self.e - fv[l];
        let b = self.s - fv[l];
        let quad = (a * a - b * b) / (2.0 * width);
        for k in 0..out.len() {
            let dfl = dfv[(l, k)];
            let dfr = dfv[(l + 1, k)];
            let ds = if self.s_is_node { dfl } else { 0.0 };
            let de = if self.e_is_node { dfr } else { 0.0 };
            let dgap = dx[(l + 1, k)] - dx[(l, k)];
            let da = de - dfl;
            let db = ds - dfl;
            let dwidth = dfr - dfl;
            let d = (de - ds) * x[l]
                + (self.e - self.s) * dx[(l, k)]
                + dgap * quad
                + gap * (a * da - b * db) / width
                - gap * quad * dwidth / width;
            out[k] += scale * d;
        }
    }
}

/// Pieces of `[a, b]` on the nodes `fv`, skipping CDF plateaus.
fn pieces(fv: &[f64], a: f64, b: f64, cursor: &mut usize) -> Vec<Piece> {
    let mut out = Vec::new();
    while *cursor + 1 < fv.len() && fv[*cursor + 1] <= a {
        *cursor += 1;
    }
    let mut l = *cursor;
    while l + 1 < fv.len() && fv[l] < b {
        if fv[l + 1] > fv[l] && fv[l + 1] > a {
            let s_is_node = fv[l] > a;
            let e_is_node = fv[l + 1] < b;
            out.push(Piece {
                l,
                s: if s_is_node { fv[l] } else { a },
                e: if e_is_node { fv[l + 1] } else { b },
                s_is_node,
                e_is_node,
            });
        }
        l += 1;
    }
    out
}

/// Sample eigenvalues `λ_κ = p ∫_{(κ−1)/p}^{κ/p} F⁻¹(v) dv` for the
/// quantiles falling in one interval, using the piecewise-linear `F⁻¹`.
pub fn quantize_interval(cdf: &IntervalCdf, x: &[f64], p: usize) -> Vec<f64> {
    let pf = p as f64;
    let fv = &cdf.values;
    let mut cursor = 0;
    (cdf.start_count + 1..=cdf.end_count)
        .map(|kappa| {
            let a = (kappa - 1) as f64 / pf;
            let b = kappa as f64 / pf;
            pf * pieces(fv, a, b, &mut cursor)
                .iter()
                .map(|pc| pc.value(fv, x))
                .sum::<f64>()
        })
        .collect()
}

/// Rows `∂λ_κ/∂τ` matching [`quantize_interval`].
pub fn quantize_interval_jacobian(
    cdf: &IntervalCdf,
    x: &[f64],
    dx: &DMatrix<f64>,
    p: usize,
) -> Vec<DVector<f64>> {
    let pf = p as f64;
    let fv = &cdf.values;
    let dfv = cdf.jacobian.as_ref().expect("CDF Jacobian required");
    let mut cursor = 0;
    (cdf.start_count + 1..=cdf.end_count)
        .map(|kappa| {
            let a = (kappa - 1) as f64 / pf;
            let b = kappa as f64 / pf;
            let mut row = DVector::zeros(dx.ncols());
            for pc in pieces(fv, a, b, &mut cursor) {
                pc.add_derivative(fv, x, dfv, dx, pf, &mut row);
            }
            row
        })
        .collect()
}
