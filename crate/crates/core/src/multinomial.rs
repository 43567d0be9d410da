//! Single-detector outcome laws, click configurations and the multinomial
//! probability of a configuration.
//!
//! With `N` identical detectors that each report outcome `k` with
//! probability `p_k`, the number of detectors `N_k` sharing each outcome is
//! multinomially distributed:
//!
//! ```text
//! c(N_0, …, N_K) = N! / (N_0! ⋯ N_K!) · p_0^{N_0} ⋯ p_K^{N_K}
//! ```

use std::fmt;

use statrs::function::factorial::{ln_binomial, ln_factorial};

use crate::error::{Error, Result};

/// Tolerance on the normalization of probability vectors and tables.
pub const PROBABILITY_TOL: f64 = 1e-9;

/// Outcome probabilities `(p_0, …, p_K)` of a single detector.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeProbabilities {
    probs: Vec<f64>,
}

impl OutcomeProbabilities {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::InvalidProbabilities(format!(
                "need at least two outcome bins, got {}",
                probs.len()
            )));
        }
        if let Some(bad) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidProbabilities(format!(
                "entry {bad} is negative or not finite"
            )));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROBABILITY_TOL {
            return Err(Error::InvalidProbabilities(format!(
                "entries sum to {sum}, expected 1"
            )));
        }
        Ok(Self { probs })
    }

    /// Number of outcome bins, `K + 1`.
    pub fn outcome_count(&self) -> usize {
        self.probs.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }
}

/// Counts `(N_0, …, N_K)` of detectors reporting each outcome in one shot.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClickConfiguration(Vec<u32>);

impl ClickConfiguration {
    pub fn new(counts: Vec<u32>) -> Self {
        Self(counts)
    }

    /// Tallies a per-detector outcome tuple `(k_1, …, k_N)`.
    pub fn from_outcomes(outcomes: &[u16], outcome_count: usize) -> Result<Self> {
        let mut counts = vec![0u32; outcome_count];
        for &k in outcomes {
            let slot = counts.get_mut(k as usize).ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "outcome {k} outside 0..={}",
                    outcome_count.saturating_sub(1)
                ))
            })?;
            *slot += 1;
        }
        Ok(Self(counts))
    }

    pub fn counts(&self) -> &[u32] {
        &self.0
    }

    pub fn outcome_count(&self) -> usize {
        self.0.len()
    }

    /// Number of detectors, `Σ_k N_k`.
    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub(crate) fn check(&self, n_detectors: u32, outcome_count: usize) -> Result<()> {
        if self.0.len() != outcome_count {
            return Err(Error::DimensionMismatch {
                expected: outcome_count,
                found: self.0.len(),
            });
        }
        if self.total() != n_detectors {
            return Err(Error::ConfigurationSum {
                expected: n_detectors,
                found: self.total(),
            });
        }
        Ok(())
    }
}

impl fmt::Display for ClickConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// All compositions of `total` into `parts` nonnegative parts, in ascending
/// lexicographic order of `(N_0, …, N_K)`.
pub fn compositions(total: u32, parts: usize) -> Vec<ClickConfiguration> {
    let mut out = Vec::new();
    if parts == 0 {
        return out;
    }
    let mut current = vec![0u32; parts];
    fill_compositions(total, 0, &mut current, &mut out);
    out
}

fn fill_compositions(
    remaining: u32,
    index: usize,
    current: &mut Vec<u32>,
    out: &mut Vec<ClickConfiguration>,
) {
    if index + 1 == current.len() {
        current[index] = remaining;
        out.push(ClickConfiguration(current.clone()));
        return;
    }
    for value in 0..=remaining {
        current[index] = value;
        fill_compositions(remaining - value, index + 1, current, out);
    }
}

/// Multinomial probability of `config` for `n_detectors` detectors that
/// independently follow `p`. Assembled in log space.
pub fn multinomial_pmf(
    p: &OutcomeProbabilities,
    n_detectors: u32,
    config: &ClickConfiguration,
) -> Result<f64> {
    config.check(n_detectors, p.outcome_count())?;
    let mut log_prob = ln_factorial(n_detectors as u64);
    for (&count, &prob) in config.counts().iter().zip(p.as_slice()) {
        if count == 0 {
            continue;
        }
        if prob == 0.0 {
            return Ok(0.0);
        }
        log_prob += count as f64 * prob.ln() - ln_factorial(count as u64);
    }
    Ok(log_prob.exp())
}

/// Binomial probability of `successes` out of `trials` at success rate `p`.
pub(crate) fn binomial_pmf(trials: usize, successes: usize, p: f64) -> f64 {
    if successes > trials {
        return 0.0;
    }
    let failures = trials - successes;
    if p == 0.0 {
        return if successes == 0 { 1.0 } else { 0.0 };
    }
    if p == 1.0 {
        return if failures == 0 { 1.0 } else { 0.0 };
    }
    (ln_binomial(trials as u64, successes as u64)
        + successes as f64 * p.ln()
        + failures as f64 * (1.0 - p).ln())
    .exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn probs(v: &[f64]) -> OutcomeProbabilities {
        OutcomeProbabilities::new(v.to_vec()).unwrap()
    }

    /// Sums `Π p_{k_i}` over all `(K+1)^N` detector tuples that tally to `config`.
    fn tuple_enumeration(p: &[f64], n: u32, config: &[u32]) -> f64 {
        let k1 = p.len();
        let mut total = 0.0;
        let tuples = k1.pow(n);
        for code in 0..tuples {
            let mut rest = code;
            let mut counts = vec![0u32; k1];
            let mut weight = 1.0;
            for _ in 0..n {
                let k = rest % k1;
                rest /= k1;
                counts[k] += 1;
                weight *= p[k];
            }
            if counts == config {
                total += weight;
            }
        }
        total
    }

    #[test]
    fn deterministic_outcome() {
        let pmf = multinomial_pmf(&probs(&[1.0, 0.0]), 3, &ClickConfiguration::new(vec![3, 0]));
        assert_eq!(pmf.unwrap(), 1.0);
    }

    #[test]
    fn fair_pair() {
        let pmf =
            multinomial_pmf(&probs(&[0.5, 0.5]), 2, &ClickConfiguration::new(vec![1, 1])).unwrap();
        assert!((pmf - 0.5).abs() < 1e-15);
    }

    #[test]
    fn three_bins_matches_tuple_enumeration() {
        let p = [0.2, 0.3, 0.5];
        let oracle = tuple_enumeration(&p, 4, &[1, 1, 2]);
        // 12 tuples, each 0.2 * 0.3 * 0.25
        assert!((oracle - 0.18).abs() < 1e-15);
        let pmf = multinomial_pmf(&probs(&p), 4, &ClickConfiguration::new(vec![1, 1, 2])).unwrap();
        assert!((pmf - 0.18).abs() < 1e-12);
    }

    #[test]
    fn large_detector_count_does_not_overflow() {
        let p = probs(&[0.5, 0.5]);
        let pmf = multinomial_pmf(&p, 400, &ClickConfiguration::new(vec![200, 200])).unwrap();
        // C(400, 200) / 2^400 ≈ sqrt(2 / (π · 400))
        assert!(pmf.is_finite());
        assert!((pmf - 0.039_86).abs() < 1e-4);
    }

    #[test]
    fn rejects_bad_configuration() {
        let p = probs(&[0.5, 0.5]);
        assert_eq!(
            multinomial_pmf(&p, 3, &ClickConfiguration::new(vec![1, 1])),
            Err(Error::ConfigurationSum {
                expected: 3,
                found: 2
            })
        );
        assert!(matches!(
            multinomial_pmf(&p, 2, &ClickConfiguration::new(vec![1, 1, 0])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn rejects_invalid_probabilities() {
        assert!(OutcomeProbabilities::new(vec![1.0]).is_err());
        assert!(OutcomeProbabilities::new(vec![0.7, 0.7]).is_err());
        assert!(OutcomeProbabilities::new(vec![1.5, -0.5]).is_err());
        assert!(OutcomeProbabilities::new(vec![f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn compositions_are_lexicographic_and_complete() {
        let all = compositions(3, 3);
        assert_eq!(all.len(), 10);
        assert_eq!(all.first().unwrap().counts(), &[0, 0, 3]);
        assert_eq!(all.last().unwrap().counts(), &[3, 0, 0]);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        assert!(all.iter().all(|c| c.total() == 3));
    }

    fn simplex(max_bins: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0f64..1.0, 2..=max_bins).prop_map(|w| {
            let s: f64 = w.iter().sum::<f64>() + 1e-12;
            w.iter().map(|x| (x + 1e-12 / w.len() as f64) / s).collect()
        })
    }

    proptest! {
        #[test]
        fn pmf_sums_to_one(p in simplex(4), n in 1u32..=5) {
            let p = OutcomeProbabilities::new(p).unwrap();
            let total: f64 = compositions(n, p.outcome_count())
                .iter()
                .map(|c| multinomial_pmf(&p, n, c).unwrap())
                .sum();
            prop_assert!((total - 1.0).abs() < 1e-9);
        }

        #[test]
        fn pmf_matches_enumeration(p in simplex(3), n in 1u32..=4) {
            let dist = OutcomeProbabilities::new(p.clone()).unwrap();
            for c in compositions(n, p.len()) {
                let oracle = tuple_enumeration(&p, n, c.counts());
                prop_assert!((multinomial_pmf(&dist, n, &c).unwrap() - oracle).abs() < 1e-12);
            }
        }
    }
}
