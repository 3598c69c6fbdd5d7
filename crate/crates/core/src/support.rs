//! Support of the limiting sample spectral distribution in u-space.
//!
//! Endpoints are the solutions of `φ(u) = 1/c` with
//! `φ(u) = Σ_j w_j t_j² / (t_j − u)²`. Between two consecutive distinct
//! population eigenvalues φ is strictly convex; the support separates there
//! exactly when its minimum drops below `1/c`.

use nalgebra::DMatrix;

use crate::error::{QuestError, Result, Stage};
use crate::root::{self, Bracket, RootError, DEFAULT_MAX_ITER, DEFAULT_X_TOL};
use crate::spectrum::GroupedSpectrum;

/// Support intervals in u-space.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportU {
    endpoints: Vec<f64>,
    omega: Vec<usize>,
    separations: Vec<usize>,
    endpoint_jacobian: Option<DMatrix<f64>>,
}

impl SupportU {
    /// Number of disjoint intervals ν.
    pub fn nu(&self) -> usize {
        self.omega.len()
    }

    /// `u_1 < u_2 < … < u_{2ν}`.
    pub fn endpoints(&self) -> &[f64] {
        &self.endpoints
    }

    /// Endpoints `(u_{2i-1}, u_{2i})` of interval `i` (0-based).
    pub fn interval(&self, i: usize) -> (f64, f64) {
        (self.endpoints[2 * i], self.endpoints[2 * i + 1])
    }

    /// Population eigenvalue count attached to each interval; sums to p.
    pub fn omega(&self) -> &[usize] {
        &self.omega
    }

    /// Gap indices `k` (0-based, between `t[k]` and `t[k+1]`) where the
    /// support separates.
    pub fn separations(&self) -> &[usize] {
        &self.separations
    }

    /// `∂u_i/∂τ_k`, a 2ν×p matrix, once attached.
    pub fn endpoint_jacobian(&self) -> Option<&DMatrix<f64>> {
        self.endpoint_jacobian.as_ref()
    }

    /// Computes and stores the endpoint Jacobian for the raw eigenvalues `tau`.
    pub fn attach_jacobian(&mut self, tau: &[f64]) -> Result<&DMatrix<f64>> {
        let jac = support_jacobian(self, tau)?;
        Ok(self.endpoint_jacobian.insert(jac))
    }
}

#[inline]
fn term(g: &GroupedSpectrum, j: usize, u: f64) -> f64 {
    let t = g.t()[j];
    let d = t - u;
    g.weight(j) * t * t / (d * d)
}

#[inline]
fn term_prime(g: &GroupedSpectrum, j: usize, u: f64) -> f64 {
    let t = g.t()[j];
    let d = t - u;
    2.0 * g.weight(j) * t * t / (d * d * d)
}

fn check_pole(u: f64, g: &GroupedSpectrum) -> Result<()> {
    if g.t().iter().any(|&t| t == u) {
        Err(QuestError::Pole {
            stage: Stage::Support,
            u,
        })
    } else {
        Ok(())
    }
}

fn phi_unchecked(u: f64, g: &GroupedSpectrum) -> f64 {
    (0..g.k()).map(|j| term(g, j, u)).sum()
}

fn phi_prime_unchecked(u: f64, g: &GroupedSpectrum) -> f64 {
    (0..g.k()).map(|j| term_prime(g, j, u)).sum()
}

/// `φ(u) = Σ_j w_j t_j² / (t_j − u)²`.
pub fn phi(u: f64, g: &GroupedSpectrum) -> Result<f64> {
    check_pole(u, g)?;
    Ok(phi_unchecked(u, g))
}

/// `φ'(u) = 2 Σ_j w_j t_j² / (t_j − u)³`.
pub fn phi_prime(u: f64, g: &GroupedSpectrum) -> Result<f64> {
    check_pole(u, g)?;
    Ok(phi_prime_unchecked(u, g))
}

fn check_gap(k: usize, g: &GroupedSpectrum) -> Result<()> {
    if k + 1 >= g.k() {
        Err(QuestError::IndexOutOfRange {
            stage: Stage::Support,
            index: k,
            len: g.k().saturating_sub(1),
        })
    } else {
        Ok(())
    }
}

/// Minimizer over `(t_k, t_{k+1})` of the two-term part
/// `θ_k(u) = w_k t_k²/(t_k−u)² + w_{k+1} t_{k+1}²/(t_{k+1}−u)²` of φ.
///
/// `k` is 0-based.
pub fn theta_minimizer(k: usize, g: &GroupedSpectrum) -> Result<f64> {
    check_gap(k, g)?;
    let (t0, t1) = (g.t()[k], g.t()[k + 1]);
    // θ'_k = 0 ⇔ (u − t_k)/(t_{k+1} − u) = (w_k t_k² / (w_{k+1} t_{k+1}²))^{1/3}.
    let a = g.weight(k).cbrt() * t0.powf(2.0 / 3.0);
    let b = g.weight(k + 1).cbrt() * t1.powf(2.0 / 3.0);
    Ok((b * t0 + a * t1) / (a + b))
}

/// Walks from `from` towards `pole` (halving the distance) until `pred`
/// holds; used when an analytic bracket fails by rounding.
fn approach_pole<F: Fn(f64) -> bool>(pole: f64, from: f64, pred: F) -> Option<f64> {
    let mut dist = from - pole;
    for _ in 0..200 {
        dist *= 0.5;
        let x = pole + dist;
        if x == pole {
            return None;
        }
        if pred(x) {
            return Some(x);
        }
    }
    None
}

fn root_err(source: RootError) -> QuestError {
    QuestError::Root {
        stage: Stage::Support,
        source,
    }
}

/// Solves `f = 0` on `[lo, hi]`, where `f(lo)` should carry `lo_sign` and
/// `f(hi)` the opposite. If the analytic bracket fails by rounding, the side
/// adjacent to a pole is pulled towards that pole until the sign is right.
fn solve_with_poles<F: Fn(f64) -> f64>(
    f: F,
    mut lo: f64,
    mut hi: f64,
    lo_positive: bool,
    lo_pole: Option<f64>,
    hi_pole: Option<f64>,
) -> Result<f64> {
    let right_sign = |x: f64, positive: bool| {
        let v = f(x);
        if positive {
            v > 0.0
        } else {
            v < 0.0
        }
    };
    if !right_sign(lo, lo_positive) {
        if let Some(pole) = lo_pole {
            lo = approach_pole(pole, hi, |x| right_sign(x, lo_positive)).unwrap_or(lo);
        }
    }
    if !right_sign(hi, !lo_positive) {
        if let Some(pole) = hi_pole {
            hi = approach_pole(pole, lo, |x| right_sign(x, !lo_positive)).unwrap_or(hi);
        }
    }
    let bracket = Bracket::new(&f, lo, hi).map_err(root_err)?;
    root::find_zero(&f, bracket, DEFAULT_X_TOL, DEFAULT_MAX_ITER).map_err(root_err)
}

/// Keeps `x` strictly inside `(a, b)`.
fn nudge(x: f64, a: f64, b: f64) -> f64 {
    let eta = 1e-12 * (b - a);
    x.clamp(a + eta, b - eta)
}

/// Minimizer of φ over `(t_k, t_{k+1})`.
fn phi_minimizer(k: usize, g: &GroupedSpectrum) -> Result<f64> {
    let (t0, t1) = (g.t()[k], g.t()[k + 1]);
    let (w0, w1) = (g.weight(k), g.weight(k + 1));
    let xhat = theta_minimizer(k, g)?;
    let dphi = phi_prime_unchecked(xhat, g);
    if dphi == 0.0 {
        return Ok(xhat);
    }
    let (lo, hi) = if dphi < 0.0 {
        let denom = -2.0 * w0 * t0 * t0 / (t0 - xhat).powi(3) - dphi;
        let hi = t1 - (2.0 * w1 * t1 * t1 / denom).cbrt();
        (xhat, nudge(hi, xhat, t1))
    } else {
        let denom = 2.0 * w1 * t1 * t1 / (t1 - xhat).powi(3) + dphi;
        let lo = t0 + (2.0 * w0 * t0 * t0 / denom).cbrt();
        (nudge(lo, t0, xhat), xhat)
    };
    let f = |u: f64| phi_prime_unchecked(u, g);
    solve_with_poles(f, lo, hi, false, Some(t0), Some(t1))
}

/// Tests for spectral separation between `t_k` and `t_{k+1}` (0-based `k`).
///
/// Returns the minimizer `x*_k` of φ on the gap when `φ(x*_k) < 1/c`.
pub fn spectral_separation(k: usize, g: &GroupedSpectrum, c: f64) -> Result<Option<f64>> {
    check_gap(k, g)?;
    let inv_c = 1.0 / c;
    let t = g.t();
    let xhat = theta_minimizer(k, g)?;

    // Lower bound of φ on the gap: θ_k at its minimum, the left tail at
    // t_{k+1}, the right tail at t_k.
    let bound = term(g, k, xhat)
        + term(g, k + 1, xhat)
        + (0..k).map(|j| term(g, j, t[k + 1])).sum::<f64>()
        + (k + 2..g.k()).map(|j| term(g, j, t[k])).sum::<f64>();
    if bound >= inv_c {
        return Ok(None);
    }

    let xstar = phi_minimizer(k, g)?;
    if phi_unchecked(xstar, g) < inv_c {
        Ok(Some(xstar))
    } else {
        Ok(None)
    }
}

/// Support endpoints on both sides of a separating gap `k` with minimizer `xstar`.
fn gap_endpoints(k: usize, xstar: f64, g: &GroupedSpectrum, c: f64) -> Result<(f64, f64)> {
    let inv_c = 1.0 / c;
    let t = g.t();
    let (t0, t1) = (t[k], t[k + 1]);
    let slack = inv_c - phi_unchecked(xstar, g);
    let f = |u: f64| phi_unchecked(u, g) - inv_c;

    let a0 = g.weight(k) * t0 * t0;
    let right_shift: f64 = (k + 1..g.k())
        .map(|j| term(g, j, xstar) - term(g, j, t0))
        .sum();
    let d_left = a0 / (t0 - xstar).powi(2) + slack + right_shift;
    let lo = nudge(t0 + (a0 / d_left).sqrt(), t0, xstar);
    let left = solve_with_poles(f, lo, xstar, true, Some(t0), None)?;

    let a1 = g.weight(k + 1) * t1 * t1;
    let left_shift: f64 = (0..=k).map(|j| term(g, j, xstar) - term(g, j, t1)).sum();
    let d_right = a1 / (t1 - xstar).powi(2) + slack + left_shift;
    let hi = nudge(t1 - (a1 / d_right).sqrt(), xstar, t1);
    let right = solve_with_poles(f, xstar, hi, false, None, Some(t1))?;

    Ok((left, right))
}

/// Finds all u-space support intervals and their eigenvalue counts.
///
/// Zero population eigenvalues are added to the count of the first interval.
pub fn find_support(g: &GroupedSpectrum, c: f64) -> Result<SupportU> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(QuestError::InvalidArgument(format!(
            "concentration ratio must be positive and finite, got {c}"
        )));
    }
    let inv_c = 1.0 / c;
    let t = g.t();
    let kk = g.k();
    let f = |u: f64| phi_unchecked(u, g) - inv_c;
    let spread = (c * g.second_moment()).sqrt();

    let (t_first, t_last) = (t[0], t[kk - 1]);
    let lo = t_first - spread - 1.0;
    let hi = t_first - (c * g.weight(0)).sqrt() * t_first / 2.0;
    let lower = solve_with_poles(f, lo, hi, false, None, Some(t_first))?;

    let lo = t_last + (c * g.weight(kk - 1)).sqrt() * t_last / 2.0;
    let hi = t_last + spread + 1.0;
    let upper = solve_with_poles(f, lo, hi, true, Some(t_last), None)?;

    let mut endpoints = vec![lower];
    let mut separations = Vec::new();
    for k in 0..kk.saturating_sub(1) {
        if let Some(xstar) = spectral_separation(k, g, c)? {
            let (left, right) = gap_endpoints(k, xstar, g, c)?;
            endpoints.push(left);
            endpoints.push(right);
            separations.push(k);
        }
    }
    endpoints.push(upper);

    let mut omega = Vec::with_capacity(separations.len() + 1);
    let mut start = 0;
    for &k in separations.iter().chain(std::iter::once(&(kk - 1))) {
        omega.push(g.counts()[start..=k].iter().sum::<usize>());
        start = k + 1;
    }
    omega[0] += g.zero_count();

    if endpoints.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(QuestError::numerical(
            Stage::Support,
            format!("support endpoints not strictly increasing: {endpoints:?}"),
        ));
    }

    Ok(SupportU {
        endpoints,
        omega,
        separations,
        endpoint_jacobian: None,
    })
}

/// `∂u_i/∂τ_k = [τ_k u_i/(τ_k−u_i)³] / Σ_j τ_j²/(τ_j−u_i)³`, a 2ν×p matrix.
pub fn support_jacobian(supp: &SupportU, tau: &[f64]) -> Result<DMatrix<f64>> {
    let p = tau.len();
    let mut jac = DMatrix::zeros(supp.endpoints.len(), p);
    for (i, &u) in supp.endpoints.iter().enumerate() {
        if tau.iter().any(|&t| t == u) {
            return Err(QuestError::Pole {
                stage: Stage::Support,
                u,
            });
        }
        let denom: f64 = tau.iter().map(|&t| t * t / (t - u).powi(3)).sum();
        for (k, &t) in tau.iter().enumerate() {
            if t != 0.0 {
                jac[(i, k)] = t * u / (t - u).powi(3) / denom;
            }
        }
    }
    Ok(jac)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{group_spectrum, PopulationSpectrum, DEFAULT_GROUP_TOL};

    fn two_point() -> GroupedSpectrum {
        GroupedSpectrum::from_parts(vec![1.0, 2.0], vec![1, 1], 0).unwrap()
    }

    fn single() -> GroupedSpectrum {
        GroupedSpectrum::from_parts(vec![1.0], vec![1], 0).unwrap()
    }

    #[test]
    fn phi_values() {
        assert_eq!(phi(0.5, &single()).unwrap(), 4.0);
        assert_eq!(phi(3.0, &single()).unwrap(), 0.25);
        assert!((phi(1.3865, &two_point()).unwrap() - 8.6609).abs() < 1e-3);
        assert!(matches!(phi(1.0, &single()), Err(QuestError::Pole { .. })));
    }

    #[test]
    fn phi_prime_values() {
        assert_eq!(phi_prime(0.5, &single()).unwrap(), 16.0);
        assert_eq!(phi_prime(2.0, &single()).unwrap(), -2.0);
        assert!(phi_prime(1.38650, &two_point()).unwrap().abs() < 1e-2);
    }

    #[test]
    fn theta_minimizer_equal_weights() {
        let x = theta_minimizer(0, &two_point()).unwrap();
        let closed = (2f64).powf(2.0 / 3.0) * (1.0 + 2f64.cbrt()) / (1.0 + 2f64.powf(2.0 / 3.0));
        assert!((x - closed).abs() < 1e-14);
        assert!((x - 1.38650).abs() < 1e-4);
    }

    #[test]
    fn theta_minimizer_close_values() {
        let eps = 1e-6;
        let g = GroupedSpectrum::from_parts(vec![1.0, 1.0 + eps], vec![3, 3], 0).unwrap();
        let x = theta_minimizer(0, &g).unwrap();
        assert!(x > 1.0 && x < 1.0 + eps);
        assert!((x - (1.0 + eps / 2.0)).abs() < 0.01 * eps);
    }

    #[test]
    fn theta_minimizer_wide_gap() {
        let g = GroupedSpectrum::from_parts(vec![1.0, 10.0], vec![1, 1], 0).unwrap();
        let x = theta_minimizer(0, &g).unwrap();
        assert!(x > 1.0 && x < 10.0);
        // K = 2, so θ_k = φ and the derivative vanishes.
        let d = phi_prime(x, &g).unwrap();
        let scale = 2.0 * 0.5 / (x - 1.0).powi(3).abs();
        assert!(d.abs() / scale < 1e-8, "θ'(x̂) = {d}");
        assert!(theta_minimizer(1, &g).is_err());
    }

    #[test]
    fn separation_threshold() {
        let g = two_point();
        assert_eq!(spectral_separation(0, &g, 1.0 / 3.0).unwrap(), None);
        let xs = spectral_separation(0, &g, 0.1).unwrap().expect("separates");
        assert!((xs - 1.3865).abs() < 1e-4);
        assert!((phi(xs, &g).unwrap() - 8.6609).abs() < 1e-3);
        assert!(spectral_separation(0, &single(), 0.1).is_err());
    }

    #[test]
    fn single_cluster_support_closed_form() {
        let g = GroupedSpectrum::from_parts(vec![1.0], vec![12], 0).unwrap();
        let c = 1.0 / 3.0;
        let s = find_support(&g, c).unwrap();
        assert_eq!(s.nu(), 1);
        assert_eq!(s.omega(), &[12]);
        let r = c.sqrt();
        assert!((s.endpoints()[0] - (1.0 - r)).abs() < 1e-8);
        assert!((s.endpoints()[1] - (1.0 + r)).abs() < 1e-8);
        assert!((s.endpoints()[0] - 0.4226497).abs() < 1e-7);
        assert!((s.endpoints()[1] - 1.5773503).abs() < 1e-7);
    }

    /// Sign changes of φ − 1/c located by a brute-force scan.
    fn scan_crossings(g: &GroupedSpectrum, c: f64, lo: f64, hi: f64, steps: usize) -> Vec<f64> {
        let f = |u: f64| phi_unchecked(u, g) - 1.0 / c;
        let mut out = Vec::new();
        let h = (hi - lo) / steps as f64;
        let mut prev = f(lo);
        for s in 1..=steps {
            let u = lo + s as f64 * h;
            let v = f(u);
            if v.is_finite() && prev.is_finite() && (v > 0.0) != (prev > 0.0) {
                out.push(u - h / 2.0);
            }
            prev = v;
        }
        out
    }

    #[test]
    fn two_cluster_split_matches_scan() {
        let g = GroupedSpectrum::from_parts(vec![1.0, 2.0], vec![5, 5], 0).unwrap();
        let s = find_support(&g, 0.1).unwrap();
        assert_eq!(s.nu(), 2);
        assert_eq!(s.omega(), &[5, 5]);
        let e = s.endpoints();
        assert!(e[1] < 1.3865 && e[2] > 1.3865);
        // Scan with a step that never lands on a pole.
        let crossings = scan_crossings(&g, 0.1, 0.0, 3.0, 3_000_001);
        assert_eq!(crossings.len(), 4);
        for (a, b) in crossings.iter().zip(e) {
            assert!((a - b).abs() < 2e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn two_cluster_no_split() {
        let g = GroupedSpectrum::from_parts(vec![1.0, 2.0], vec![3, 3], 0).unwrap();
        let s = find_support(&g, 1.0 / 3.0).unwrap();
        assert_eq!(s.nu(), 1);
        assert_eq!(s.omega(), &[6]);
    }

    #[test]
    fn zero_eigenvalues_augment_first_interval() {
        let spec = PopulationSpectrum::new(vec![0.0, 0.0, 1.0, 1.0, 10.0, 10.0], 600).unwrap();
        let g = group_spectrum(&spec, DEFAULT_GROUP_TOL).unwrap();
        let s = find_support(&g, spec.c()).unwrap();
        assert_eq!(s.nu(), 2);
        assert_eq!(s.omega(), &[4, 2]);
    }

    #[test]
    fn monotone_in_c() {
        let g = two_point();
        // Threshold 1/φ(x*) ≈ 0.11546.
        assert_eq!(find_support(&g, 0.1160).unwrap().nu(), 1);
        assert_eq!(find_support(&g, 0.1150).unwrap().nu(), 2);
        let mut prev = usize::MAX;
        for c in [0.05, 0.1, 0.115, 0.116, 0.2, 0.5, 1.0, 2.0] {
            let nu = find_support(&g, c).unwrap().nu();
            assert!(nu <= prev);
            prev = nu;
        }
    }

    #[test]
    fn jacobian_euler_identity_and_fd() {
        let tau = vec![1.0, 1.0, 2.0, 2.0];
        let spec = PopulationSpectrum::new(tau.clone(), 40).unwrap();
        let g = group_spectrum(&spec, DEFAULT_GROUP_TOL).unwrap();
        let mut s = find_support(&g, spec.c()).unwrap();
        assert_eq!(s.nu(), 2);
        let jac = s.attach_jacobian(&tau).unwrap().clone();
        for (i, &u) in s.endpoints().iter().enumerate() {
            let euler: f64 = (0..4).map(|k| tau[k] * jac[(i, k)]).sum();
            assert!((euler - u).abs() < 1e-8);
        }
        let h = 1e-6;
        for k in 0..4 {
            let mut plus = tau.clone();
            let mut minus = tau.clone();
            plus[k] += h;
            minus[k] -= h;
            let ends = |v: Vec<f64>| {
                let sp = PopulationSpectrum::new(v, 40).unwrap();
                let g = group_spectrum(&sp, DEFAULT_GROUP_TOL).unwrap();
                find_support(&g, sp.c()).unwrap().endpoints().to_vec()
            };
            let (ep, em) = (ends(plus), ends(minus));
            for i in 0..4 {
                let fd = (ep[i] - em[i]) / (2.0 * h);
                assert!(
                    (fd - jac[(i, k)]).abs() < 1e-5,
                    "i={i} k={k}: {fd} vs {}",
                    jac[(i, k)]
                );
            }
        }
    }

    #[test]
    fn jacobian_single_cluster_scale() {
        let tau = vec![1.0, 1.0];
        let spec = PopulationSpectrum::new(tau.clone(), 6).unwrap();
        let g = group_spectrum(&spec, DEFAULT_GROUP_TOL).unwrap();
        let s = find_support(&g, spec.c()).unwrap();
        let jac = support_jacobian(&s, &tau).unwrap();
        let r = spec.c().sqrt();
        assert!((jac.row(0).sum() - (1.0 - r)).abs() < 1e-10);
        assert!((jac.row(1).sum() - (1.0 + r)).abs() < 1e-10);
        assert!((jac[(0, 0)] - jac[(0, 1)]).abs() < 1e-14);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn grouped_strategy() -> impl Strategy<Value = (Vec<f64>, usize)> {
            (prop::collection::vec(0.5f64..20.0, 1..25), 1usize..200).prop_map(|(v, n)| (v, n))
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn endpoints_solve_phi((tau, n) in grouped_strategy()) {
                let spec = PopulationSpectrum::new(tau, n).unwrap();
                let g = group_spectrum(&spec, DEFAULT_GROUP_TOL).unwrap();
                let s = find_support(&g, spec.c()).unwrap();
                let inv_c = 1.0 / spec.c();
                for &u in s.endpoints() {
                    let v = phi(u, &g).unwrap();
                    prop_assert!((v - inv_c).abs() <= 1e-8 * inv_c, "φ(u)={v}, 1/c={inv_c}");
                }
                prop_assert_eq!(s.omega().iter().sum::<usize>(), spec.p());
                prop_assert!(s.endpoints()[0] < g.t()[0]);
                prop_assert!(*s.endpoints().last().unwrap() > *g.t().last().unwrap());
                if spec.c() < 1.0 {
                    prop_assert!(s.endpoints()[0] > 0.0);
                }
                for k in 0..g.k().saturating_sub(1) {
                    if let Some(xs) = spectral_separation(k, &g, spec.c()).unwrap() {
                        let d = phi_prime(xs, &g).unwrap();
                        let scale: f64 = (0..g.k()).map(|j| term_prime(&g, j, xs).abs()).sum();
                        prop_assert!(d.abs() <= 1e-10 * scale);
                        let xh = theta_minimizer(k, &g).unwrap();
                        prop_assert!(phi(xs, &g).unwrap() <= phi(xh, &g).unwrap() * (1.0 + 1e-14));
                    }
                }
            }

            #[test]
            fn scaling_equivariance((tau, n) in grouped_strategy(), s in prop::sample::select(vec![0.1, 7.0])) {
                let spec = PopulationSpectrum::new(tau, n).unwrap();
                let scaled = spec.scaled(s).unwrap();
                let g1 = group_spectrum(&spec, DEFAULT_GROUP_TOL).unwrap();
                let g2 = group_spectrum(&scaled, DEFAULT_GROUP_TOL).unwrap();
                let a = find_support(&g1, spec.c()).unwrap();
                let b = find_support(&g2, spec.c()).unwrap();
                prop_assert_eq!(a.omega(), b.omega());
                for (x, y) in a.endpoints().iter().zip(b.endpoints()) {
                    prop_assert!((s * x - y).abs() <= 1e-9 * y.abs().max(s));
                }
            }
        }
    }
}
