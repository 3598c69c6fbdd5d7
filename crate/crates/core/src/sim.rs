//! Monte Carlo harness: population shapes, sample eigenvalue draws, and NMSE
//! convergence sweeps for the inversion estimator.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal, StudentT};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{QuestError, Result};
use crate::invert::{invert, InvertOptions};

/// Population eigenvalue shape on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    /// Kumaraswamy(3, 3)-type CDF `1 − (1 − x³)^{1/3}`, mass near 1.
    H1,
    /// Reflection of `H1`: `1 − H1(1 − x)`, mass near 0.
    H2,
    /// Symmetric bimodal: `H2` on the lower half, `H1` on the upper half.
    H3,
    /// Symmetric unimodal: `H1` on the lower half, `H2` on the upper half.
    H4,
}

pub const SHAPES: [Shape; 4] = [Shape::H1, Shape::H2, Shape::H3, Shape::H4];

fn h1(x: f64) -> f64 {
    1.0 - (1.0 - x.powi(3)).cbrt()
}

fn h1_inv(q: f64) -> f64 {
    (1.0 - (1.0 - q).powi(3)).cbrt()
}

fn h2(x: f64) -> f64 {
    1.0 - h1(1.0 - x)
}

fn h2_inv(q: f64) -> f64 {
    1.0 - h1_inv(1.0 - q)
}

fn check_unit(v: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(QuestError::InvalidArgument(format!(
            "argument {v} outside [0, 1]"
        )))
    }
}

impl Shape {
    /// Cumulative distribution function on `[0, 1]`.
    pub fn cdf(self, x: f64) -> Result<f64> {
        let x = check_unit(x)?;
        Ok(match self {
            Shape::H1 => h1(x),
            Shape::H2 => h2(x),
            Shape::H3 if x <= 0.5 => 0.5 * h2(2.0 * x),
            Shape::H3 => 0.5 + 0.5 * h1(2.0 * x - 1.0),
            Shape::H4 if x <= 0.5 => 0.5 * h1(2.0 * x),
            Shape::H4 => 0.5 + 0.5 * h2(2.0 * x - 1.0),
        })
    }

    /// Exact inverse of [`Shape::cdf`].
    pub fn quantile(self, q: f64) -> Result<f64> {
        let q = check_unit(q)?;
        Ok(match self {
            Shape::H1 => h1_inv(q),
            Shape::H2 => h2_inv(q),
            Shape::H3 if q <= 0.5 => 0.5 * h2_inv(2.0 * q),
            Shape::H3 => 0.5 + 0.5 * h1_inv(2.0 * q - 1.0),
            Shape::H4 if q <= 0.5 => 0.5 * h1_inv(2.0 * q),
            Shape::H4 => 0.5 + 0.5 * h2_inv(2.0 * q - 1.0),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Shape::H1 => "h1",
            Shape::H2 => "h2",
            Shape::H3 => "h3",
            Shape::H4 => "h4",
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Shape {
    type Err = QuestError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "h1" => Ok(Shape::H1),
            "h2" => Ok(Shape::H2),
            "h3" => Ok(Shape::H3),
            "h4" => Ok(Shape::H4),
            _ => Err(QuestError::InvalidArgument(format!("unknown shape `{s}`"))),
        }
    }
}

/// Shape plus condition number `κ ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShapeSpec {
    pub shape: Shape,
    pub kappa: f64,
}

impl ShapeSpec {
    pub fn new(shape: Shape, kappa: f64) -> Result<Self> {
        if !(kappa.is_finite() && kappa >= 1.0) {
            return Err(QuestError::InvalidArgument(format!(
                "condition number must be finite and >= 1, got {kappa}"
            )));
        }
        Ok(Self { shape, kappa })
    }

    /// `τ_i = 1 + (κ − 1) · Q((i − 0.5)/p)`, ascending.
    pub fn population(&self, p: usize) -> Vec<f64> {
        (1..=p)
            .map(|i| {
                let q = (i as f64 - 0.5) / p as f64;
                1.0 + (self.kappa - 1.0) * self.shape.quantile(q).expect("q in (0, 1)")
            })
            .collect()
    }
}

/// Standardized variate distribution (mean 0, variance 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variate {
    Gaussian,
    /// Student t with 5 degrees of freedom, scaled by `√(3/5)`.
    Student5,
    /// `±1` with equal probability.
    Coin,
    /// `Exp(1) − 1`.
    Exponential,
}

pub const VARIATES: [Variate; 4] = [
    Variate::Gaussian,
    Variate::Student5,
    Variate::Coin,
    Variate::Exponential,
];

impl Variate {
    pub fn name(self) -> &'static str {
        match self {
            Variate::Gaussian => "gaussian",
            Variate::Student5 => "student5",
            Variate::Coin => "coin",
            Variate::Exponential => "exponential",
        }
    }
}

impl fmt::Display for Variate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variate {
    type Err = QuestError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" => Ok(Variate::Gaussian),
            "student5" => Ok(Variate::Student5),
            "coin" => Ok(Variate::Coin),
            "exponential" => Ok(Variate::Exponential),
            _ => Err(QuestError::InvalidArgument(format!(
                "unknown distribution `{s}`"
            ))),
        }
    }
}

/// Independent RNG stream for one `(p, rep)` cell of a sweep.
pub fn stream_rng(seed: u64, p: usize, rep: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((p as u64) << 32) ^ rep as u64);
    rng
}

fn standardized_matrix<R: Rng>(n: usize, p: usize, dist: Variate, rng: &mut R) -> DMatrix<f64> {
    let student = StudentT::new(5.0).expect("valid degrees of freedom");
    let t_scale = (3.0f64 / 5.0).sqrt();
    // Filled column by column so that draws do not depend on storage order.
    DMatrix::from_fn(n, p, |_, _| match dist {
        Variate::Gaussian => StandardNormal.sample(rng),
        Variate::Student5 => t_scale * student.sample(rng),
        Variate::Coin => {
            if rng.random::<bool>() {
                1.0
            } else {
                -1.0
            }
        }
        Variate::Exponential => {
            let e: f64 = Exp1.sample(rng);
            e - 1.0
        }
    })
}

/// Eigenvalues (ascending) of `(1/n) Yᵀ Y`, where `Y` is `n × p` with
/// i.i.d. standardized entries and column `j` scaled by `√τ_j`.
pub fn sample_covariance_eigenvalues<R: Rng>(
    tau: &[f64],
    n: usize,
    dist: Variate,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(QuestError::ZeroSampleSize);
    }
    if tau.is_empty() {
        return Err(QuestError::EmptySpectrum);
    }
    let p = tau.len();
    let mut y = standardized_matrix(n, p, dist, rng);
    for (j, t) in tau.iter().enumerate() {
        y.column_mut(j).scale_mut(t.sqrt());
    }
    let s = y.tr_mul(&y) / n as f64;
    let mut eig: Vec<f64> = s.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

/// Like [`sample_covariance_eigenvalues`], with the `p − n` structurally zero
/// eigenvalues of a rank-deficient sample set to exactly zero.
pub fn sample_eigenvalues(tau: &[f64], n: usize, dist: Variate, seed: u64) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut eig = sample_covariance_eigenvalues(tau, n, dist, &mut rng)?;
    let rank_gap = tau.len().saturating_sub(n);
    eig.iter_mut().take(rank_gap).for_each(|v| *v = 0.0);
    Ok(eig)
}

/// Normalized mean squared error `mean((est − truth)²) / mean(truth)²`.
pub fn nmse(estimate: &[f64], truth: &[f64]) -> f64 {
    assert_eq!(estimate.len(), truth.len(), "length mismatch");
    let p = truth.len() as f64;
    let mse = estimate
        .iter()
        .zip(truth)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / p;
    let mean = truth.iter().sum::<f64>() / p;
    mse / (mean * mean)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub shape: ShapeSpec,
    pub variate: Variate,
    /// Concentration `c = p / n`; `n = round(p / c)`.
    pub concentration: f64,
    pub dims: Vec<usize>,
    pub reps: usize,
    pub seed: u64,
    pub invert: InvertOptions,
}

impl SimulationConfig {
    pub fn sample_size(&self, p: usize) -> usize {
        ((p as f64 / self.concentration).round() as usize).max(1)
    }

    fn validate(&self) -> Result<()> {
        if !(self.concentration.is_finite() && self.concentration > 0.0) {
            return Err(QuestError::InvalidArgument(format!(
                "concentration must be positive, got {}",
                self.concentration
            )));
        }
        if self.dims.is_empty() || self.dims.contains(&0) {
            return Err(QuestError::InvalidArgument(
                "dimensions must be nonempty and positive".into(),
            ));
        }
        if self.reps == 0 {
            return Err(QuestError::InvalidArgument(
                "reps must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationRecord {
    pub shape: Shape,
    pub dist: Variate,
    pub p: usize,
    pub n: usize,
    pub rep: usize,
    pub seed: u64,
    /// `NaN` when the inversion returned an error.
    pub nmse: f64,
    pub converged: bool,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionSummary {
    pub p: usize,
    pub n: usize,
    pub mean_nmse: f64,
    /// Reps with a finite NMSE, which enter the mean.
    pub reps_used: usize,
    /// Reps whose optimizer stopped without meeting its tolerance.
    pub not_converged: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationSummary {
    pub dims: Vec<DimensionSummary>,
    /// Least-squares slope of `log(mean NMSE)` on `log(p)`; needs two or more
    /// dimensions with positive mean NMSE.
    pub slope: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationReport {
    pub records: Vec<SimulationRecord>,
    pub summary: SimulationSummary,
}

/// Runs one `(p, rep)` cell: population, sample draw, inversion, NMSE.
pub fn run_rep(config: &SimulationConfig, p: usize, rep: usize) -> Result<SimulationRecord> {
    let start = Instant::now();
    let n = config.sample_size(p);
    let tau = config.shape.population(p);
    let mut rng = stream_rng(config.seed, p, rep);
    let mut lambda = sample_covariance_eigenvalues(&tau, n, config.variate, &mut rng)?;
    lambda
        .iter_mut()
        .take(p.saturating_sub(n))
        .for_each(|v| *v = 0.0);
    let (nmse_value, converged) = match invert(&lambda, n, &config.invert) {
        Ok(res) => (nmse(&res.tau_hat, &tau), res.converged),
        Err(_) => (f64::NAN, false),
    };
    Ok(SimulationRecord {
        shape: config.shape.shape,
        dist: config.variate,
        p,
        n,
        rep,
        seed: config.seed,
        nmse: nmse_value,
        converged,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Least-squares slope of `y` on `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() < 2 || x.len() != y.len() {
        return None;
    }
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

pub fn summarize(records: &[SimulationRecord], dims: &[usize]) -> SimulationSummary {
    let mut unique = dims.to_vec();
    unique.sort_unstable();
    unique.dedup();
    let dims: Vec<DimensionSummary> = unique
        .iter()
        .map(|&p| {
            let cell: Vec<&SimulationRecord> = records.iter().filter(|r| r.p == p).collect();
            let finite: Vec<f64> = cell
                .iter()
                .map(|r| r.nmse)
                .filter(|v| v.is_finite())
                .collect();
            DimensionSummary {
                p,
                n: cell.first().map_or(0, |r| r.n),
                mean_nmse: if finite.is_empty() {
                    f64::NAN
                } else {
                    finite.iter().sum::<f64>() / finite.len() as f64
                },
                reps_used: finite.len(),
                not_converged: cell.iter().filter(|r| !r.converged).count(),
            }
        })
        .collect();
    let (lx, ly): (Vec<f64>, Vec<f64>) = dims
        .iter()
        .filter(|d| d.mean_nmse > 0.0)
        .map(|d| ((d.p as f64).ln(), d.mean_nmse.ln()))
        .unzip();
    SimulationSummary {
        slope: fit_slope(&lx, &ly),
        dims,
    }
}

/// Runs every `(p, rep)` cell in parallel. Records come back sorted by
/// `(p, rep)` regardless of scheduling.
pub fn run_convergence(config: &SimulationConfig) -> Result<SimulationReport> {
    config.validate()?;
    let mut dims = config.dims.clone();
    dims.sort_unstable();
    dims.dedup();
    let jobs: Vec<(usize, usize)> = dims
        .iter()
        .flat_map(|&p| (0..config.reps).map(move |rep| (p, rep)))
        .collect();
    let mut records = jobs
        .par_iter()
        .map(|&(p, rep)| run_rep(config, p, rep))
        .collect::<Result<Vec<_>>>()?;
    records.sort_by_key(|r| (r.p, r.rep));
    let summary = summarize(&records, &dims);
    Ok(SimulationReport { records, summary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{prop_assert, proptest};

    #[test]
    fn shape_values() {
        assert_eq!(Shape::H1.cdf(0.0).unwrap(), 0.0);
        assert_eq!(Shape::H1.cdf(1.0).unwrap(), 1.0);
        let expected = 1.0 - 0.875f64.cbrt();
        assert!((Shape::H1.cdf(0.5).unwrap() - expected).abs() < 1e-15);
        assert!((Shape::H1.cdf(0.5).unwrap() - 0.0435344).abs() < 1e-6);
        assert!((Shape::H3.cdf(0.5).unwrap() - 0.5).abs() < 1e-15);
        assert!((Shape::H4.cdf(0.5).unwrap() - 0.5).abs() < 1e-15);
        assert!(Shape::H2.cdf(1.5).is_err());
        assert!(Shape::H2.quantile(-0.1).is_err());
    }

    #[test]
    fn shapes_are_continuous_at_midpoint() {
        for s in SHAPES {
            let eps = 1e-12f64;
            let a = s.cdf(0.5 - eps).unwrap();
            let b = s.cdf(0.5 + eps).unwrap();
            // Cube-root cusps: |H(½ ± ε) − ½| ≤ (6ε)^{1/3}.
            assert!((a - b).abs() <= 2.0 * (6.0 * eps).cbrt(), "{s}");
        }
        for s in [Shape::H3, Shape::H4] {
            assert!((s.quantile(0.5).unwrap() - 0.5).abs() < 1e-15, "{s}");
        }
    }

    #[test]
    fn symmetric_shapes() {
        for s in [Shape::H3, Shape::H4] {
            for x in [0.1, 0.2, 0.37, 0.45] {
                let lhs = s.cdf(x).unwrap();
                let rhs = 1.0 - s.cdf(1.0 - x).unwrap();
                assert!((lhs - rhs).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn population_examples() {
        let flat = ShapeSpec::new(Shape::H1, 1.0).unwrap().population(7);
        assert!(flat.iter().all(|&t| t == 1.0));
        let spec = ShapeSpec::new(Shape::H1, 10.0).unwrap();
        let tau = spec.population(4);
        for (t, q) in tau.iter().zip([0.125, 0.375, 0.625, 0.875]) {
            assert!((t - (1.0 + 9.0 * h1_inv(q))).abs() < 1e-14);
            assert!((1.0..=10.0).contains(t));
        }
        assert!(tau.windows(2).all(|w| w[0] < w[1]));
        // The bimodal shape has thin tails at both ends, so its extreme
        // quantiles reach the ends of [1, κ] quickly.
        let tau = ShapeSpec::new(Shape::H3, 10.0).unwrap().population(1000);
        assert!((tau[999] / tau[0] - 10.0).abs() / 10.0 < 0.02);
        // Elsewhere a cube-root tail makes the ratio approach κ slowly.
        for s in SHAPES {
            let ratio = |p: usize| {
                let t = ShapeSpec::new(s, 10.0).unwrap().population(p);
                t[p - 1] / t[0]
            };
            assert!(
                ratio(10) < ratio(100) && ratio(100) < ratio(1000) && ratio(1000) <= 10.0,
                "{s}"
            );
        }
        let lo = 1.0 + 9.0 * (1.0 - (1.0 - 0.0005f64).powi(3)).cbrt();
        let tau = ShapeSpec::new(Shape::H1, 10.0).unwrap().population(1000);
        assert!((tau[0] - lo).abs() < 1e-12);
        assert!(ShapeSpec::new(Shape::H1, 0.5).is_err());
    }

    #[test]
    fn parse_tags() {
        assert_eq!("H3".parse::<Shape>().unwrap(), Shape::H3);
        assert_eq!("coin".parse::<Variate>().unwrap(), Variate::Coin);
        assert!("cauchy".parse::<Variate>().is_err());
        assert!("h5".parse::<Shape>().is_err());
    }

    #[test]
    fn variates_are_standardized() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for d in VARIATES {
            let m = standardized_matrix(200_000, 1, d, &mut rng);
            let mean = m.mean();
            let var = m.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / m.len() as f64;
            assert!(mean.abs() < 0.02, "{d}: mean {mean}");
            assert!((var - 1.0).abs() < 0.05, "{d}: var {var}");
        }
    }

    #[test]
    fn trace_concentration() {
        // The sample mean eigenvalue has mean mean(τ) and relative standard
        // deviation sqrt(2 mean(τ²) / (n p)) / mean(τ) for Gaussian variates.
        let (p, n) = (100usize, 300usize);
        let tau = ShapeSpec::new(Shape::H1, 10.0).unwrap().population(p);
        let mean_tau = tau.iter().sum::<f64>() / p as f64;
        let mean_sq = tau.iter().map(|t| t * t).sum::<f64>() / p as f64;
        let sd = (2.0 * mean_sq / (n * p) as f64).sqrt() / mean_tau;
        let bound = 3.0 / ((n * p) as f64).sqrt();
        let errs: Vec<f64> = (0..100)
            .map(|seed| {
                let eig = sample_eigenvalues(&tau, n, Variate::Gaussian, seed).unwrap();
                (eig.iter().sum::<f64>() / p as f64 - mean_tau) / mean_tau
            })
            .collect();
        let mean_err = errs.iter().sum::<f64>() / 100.0;
        let rms = (errs.iter().map(|e| e * e).sum::<f64>() / 100.0).sqrt();
        assert!(mean_err.abs() <= 3.0 * sd / 10.0, "bias {mean_err}");
        assert!((rms / sd - 1.0).abs() < 0.2, "rms {rms} vs sd {sd}");
        let outside = errs.iter().filter(|e| e.abs() > bound).count();
        assert!(outside <= 5, "{outside} of 100 seeds outside 3/sqrt(np)");
    }

    #[test]
    fn rank_deficient_sample() {
        let tau = ShapeSpec::new(Shape::H2, 10.0).unwrap().population(40);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let raw = sample_covariance_eigenvalues(&tau, 25, Variate::Gaussian, &mut rng).unwrap();
        let max = raw[39];
        assert!(raw[..15].iter().all(|v| v.abs() <= 1e-10 * max));
        assert!(raw[15] > 1e-6 * max);
        let snapped = sample_eigenvalues(&tau, 25, Variate::Gaussian, 9).unwrap();
        assert_eq!(snapped.iter().filter(|&&v| v == 0.0).count(), 15);
    }

    #[test]
    fn sampling_is_deterministic() {
        let tau = ShapeSpec::new(Shape::H4, 5.0).unwrap().population(20);
        for d in VARIATES {
            let a = sample_eigenvalues(&tau, 60, d, 42).unwrap();
            let b = sample_eigenvalues(&tau, 60, d, 42).unwrap();
            assert_eq!(a, b);
            let c = sample_eigenvalues(&tau, 60, d, 43).unwrap();
            assert_ne!(a, c);
        }
    }

    #[test]
    fn nmse_examples() {
        let tau = vec![1.0; 5];
        assert_eq!(nmse(&tau, &tau), 0.0);
        let doubled: Vec<f64> = tau.iter().map(|t| 2.0 * t).collect();
        assert_eq!(nmse(&doubled, &tau), 1.0);
    }

    #[test]
    fn slope_fit() {
        let x: Vec<f64> = [1.0f64, 2.0, 3.0].iter().map(|v| v.ln()).collect();
        let y: Vec<f64> = x.iter().map(|v| 0.3 - 0.8 * v).collect();
        assert!((fit_slope(&x, &y).unwrap() + 0.8).abs() < 1e-12);
        assert!(fit_slope(&x[..1], &y[..1]).is_none());
    }

    #[test]
    fn streams_differ_per_cell() {
        let a: u64 = stream_rng(1, 30, 0).random();
        let b: u64 = stream_rng(1, 30, 1).random();
        let c: u64 = stream_rng(1, 31, 0).random();
        assert!(a != b && a != c && b != c);
    }

    proptest! {
        #[test]
        fn quantile_inverts_cdf(q in 0.0f64..=1.0, k in 0usize..4) {
            let s = SHAPES[k];
            let x = s.quantile(q).unwrap();
            prop_assert!((0.0..=1.0).contains(&x));
            prop_assert!((s.cdf(x).unwrap() - q).abs() < 1e-9);
        }

        #[test]
        fn nmse_scale_invariant(v in proptest::collection::vec(0.1f64..10.0, 2..20), s in 0.01f64..100.0) {
            let truth: Vec<f64> = v.iter().map(|x| x * 1.1 + 0.3).collect();
            let a = nmse(&v, &truth);
            let sv: Vec<f64> = v.iter().map(|x| s * x).collect();
            let st: Vec<f64> = truth.iter().map(|x| s * x).collect();
            prop_assert!((nmse(&sv, &st) - a).abs() <= 1e-12 * a.max(1e-300));
        }
    }
}
