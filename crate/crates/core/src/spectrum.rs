//! Population spectra and their grouped (distinct value, multiplicity) form.

use crate::error::{QuestError, Result};

/// Default relative tolerance under which two population eigenvalues are
/// treated as equal when grouping.
pub const DEFAULT_GROUP_TOL: f64 = 1e-9;

/// Population eigenvalues together with the sample size.
///
/// The eigenvalues are stored sorted ascending; `c = p / n` is the
/// concentration ratio.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationSpectrum {
    tau: Vec<f64>,
    n: usize,
}

impl PopulationSpectrum {
    /// Validates and sorts `tau`. Entries must be finite and nonnegative.
    pub fn new(mut tau: Vec<f64>, n: usize) -> Result<Self> {
        if tau.is_empty() {
            return Err(QuestError::EmptySpectrum);
        }
        if n == 0 {
            return Err(QuestError::ZeroSampleSize);
        }
        if let Some((index, &value)) = tau
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(QuestError::InvalidEigenvalue { index, value });
        }
        tau.sort_by(f64::total_cmp);
        Ok(Self { tau, n })
    }

    pub fn tau(&self) -> &[f64] {
        &self.tau
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.tau.len()
    }

    /// Concentration ratio `p / n`.
    pub fn c(&self) -> f64 {
        self.p() as f64 / self.n as f64
    }

    pub fn mean(&self) -> f64 {
        self.tau.iter().sum::<f64>() / self.p() as f64
    }

    /// Same spectrum with every eigenvalue multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::new(self.tau.iter().map(|t| t * s).collect(), self.n)
    }
}

/// Distinct nonzero population eigenvalues `t` with integer multiplicities.
///
/// Weights are `counts[k] / p`; the zero eigenvalues are tracked separately in
/// `zero_count`. Keeping integer counts makes the interval bookkeeping exact.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupedSpectrum {
    t: Vec<f64>,
    counts: Vec<usize>,
    zero_count: usize,
    p: usize,
}

impl GroupedSpectrum {
    /// Builds a grouped spectrum directly from distinct values and counts.
    pub fn from_parts(t: Vec<f64>, counts: Vec<usize>, zero_count: usize) -> Result<Self> {
        if t.len() != counts.len() {
            return Err(QuestError::InvalidArgument(
                "values and counts differ in length".into(),
            ));
        }
        if t.is_empty() {
            return Err(QuestError::DegenerateSpectrum);
        }
        if t.windows(2).any(|w| w[0] >= w[1]) || t.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(QuestError::InvalidArgument(
                "grouped values must be positive and strictly increasing".into(),
            ));
        }
        if counts.iter().any(|&m| m == 0) {
            return Err(QuestError::InvalidArgument("zero multiplicity".into()));
        }
        let p = counts.iter().sum::<usize>() + zero_count;
        Ok(Self {
            t,
            counts,
            zero_count,
            p,
        })
    }

    /// Distinct nonzero eigenvalues, strictly increasing.
    pub fn t(&self) -> &[f64] {
        &self.t
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Number of distinct nonzero eigenvalues.
    pub fn k(&self) -> usize {
        self.t.len()
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn zero_count(&self) -> usize {
        self.zero_count
    }

    pub fn weight(&self, k: usize) -> f64 {
        self.counts[k] as f64 / self.p as f64
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.k()).map(|k| self.weight(k)).collect()
    }

    pub fn zero_weight(&self) -> f64 {
        self.zero_count as f64 / self.p as f64
    }

    /// `Σ w_k t_k^2`.
    pub fn second_moment(&self) -> f64 {
        (0..self.k())
            .map(|k| self.weight(k) * self.t[k] * self.t[k])
            .sum()
    }

    /// Expands back to a sorted eigenvalue list of length `p`.
    pub fn expand(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.zero_count];
        for (&t, &m) in self.t.iter().zip(&self.counts) {
            out.extend(std::iter::repeat(t).take(m));
        }
        out
    }
}

/// Merges consecutive eigenvalues that differ by at most `rel_tol * max(tau)`.
///
/// Eigenvalues at or below `rel_tol * max(tau)` count as zero. Each cluster is
/// represented by the mean of its members.
pub fn group_spectrum(spec: &PopulationSpectrum, rel_tol: f64) -> Result<GroupedSpectrum> {
    if !(rel_tol >= 0.0) {
        return Err(QuestError::InvalidArgument(format!(
            "grouping tolerance must be nonnegative, got {rel_tol}"
        )));
    }
    let tau = spec.tau();
    let max = *tau.last().ok_or(QuestError::EmptySpectrum)?;
    if max <= 0.0 {
        return Err(QuestError::DegenerateSpectrum);
    }
    let tol = rel_tol * max;
    let zero_count = tau.iter().take_while(|&&v| v <= tol).count();

    let mut t = Vec::new();
    let mut counts = Vec::new();
    let mut start = zero_count;
    while start < tau.len() {
        let anchor = tau[start];
        let mut end = start + 1;
        while end < tau.len() && tau[end] - anchor <= tol {
            end += 1;
        }
        let cluster = &tau[start..end];
        t.push(cluster.iter().sum::<f64>() / cluster.len() as f64);
        counts.push(cluster.len());
        start = end;
    }
    GroupedSpectrum::from_parts(t, counts, zero_count)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grouped(tau: &[f64], n: usize) -> GroupedSpectrum {
        let spec = PopulationSpectrum::new(tau.to_vec(), n).unwrap();
        group_spectrum(&spec, DEFAULT_GROUP_TOL).unwrap()
    }

    #[test]
    fn duplicates_merge() {
        let g = grouped(&[1.0, 1.0, 2.0], 9);
        assert_eq!(g.t(), &[1.0, 2.0]);
        assert_eq!(g.weights(), vec![2.0 / 3.0, 1.0 / 3.0]);
        assert_eq!(g.zero_weight(), 0.0);
    }

    #[test]
    fn zeros_collected() {
        let g = grouped(&[0.0, 1.0, 1.0], 9);
        assert_eq!(g.t(), &[1.0]);
        assert_eq!(g.weights(), vec![2.0 / 3.0]);
        assert!((g.zero_weight() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn single_cluster() {
        let g = grouped(&[1.0, 1.0, 1.0], 3);
        assert_eq!(g.k(), 1);
        assert_eq!(g.t(), &[1.0]);
        assert_eq!(g.weights(), vec![1.0]);
    }

    #[test]
    fn near_duplicates_merge() {
        let g = grouped(&[1.0, 1.0 + 1e-12, 3.0], 10);
        assert_eq!(g.counts(), &[2, 1]);
    }

    #[test]
    fn rejects_degenerate_and_empty() {
        let spec = PopulationSpectrum::new(vec![0.0, 0.0], 4).unwrap();
        assert!(matches!(
            group_spectrum(&spec, DEFAULT_GROUP_TOL),
            Err(QuestError::DegenerateSpectrum)
        ));
        assert!(matches!(
            PopulationSpectrum::new(vec![], 4),
            Err(QuestError::EmptySpectrum)
        ));
        assert!(matches!(
            PopulationSpectrum::new(vec![1.0, -1.0], 4),
            Err(QuestError::InvalidEigenvalue { index: 1, .. })
        ));
        assert!(PopulationSpectrum::new(vec![1.0], 0).is_err());
    }

    #[test]
    fn new_sorts() {
        let spec = PopulationSpectrum::new(vec![3.0, 1.0, 2.0], 6).unwrap();
        assert_eq!(spec.tau(), &[1.0, 2.0, 3.0]);
        assert_eq!(spec.c(), 0.5);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn spectrum() -> impl Strategy<Value = Vec<f64>> {
            // Small integer-valued grid so that duplicates and zeros are common.
            prop::collection::vec(0u32..6, 1..40)
                .prop_filter("not all zero", |v| v.iter().any(|&x| x > 0))
                .prop_map(|v| v.into_iter().map(|x| x as f64 * 0.5).collect())
        }

        proptest! {
            #[test]
            fn idempotent(tau in spectrum()) {
                let g = grouped(&tau, 7);
                let again = grouped(&g.expand(), 7);
                prop_assert_eq!(g, again);
            }

            #[test]
            fn counts_cover_p(tau in spectrum()) {
                let g = grouped(&tau, 7);
                prop_assert_eq!(g.counts().iter().sum::<usize>() + g.zero_count(), tau.len());
                let total: f64 = g.weights().iter().sum::<f64>() + g.zero_weight();
                prop_assert!((total - 1.0).abs() <= 1e-12);
            }
        }
    }
}
