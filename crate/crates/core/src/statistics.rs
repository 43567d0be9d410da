//! Click statistics tables, classical mixtures of multinomials and their
//! first and second moments.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::multinomial::{
    compositions, multinomial_pmf, ClickConfiguration, OutcomeProbabilities, PROBABILITY_TOL,
};

/// Probability distribution `c(N_0, …, N_K)` over click configurations for
/// fixed detector count `N` and outcome count `K + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClickStatistics {
    detector_count: u32,
    outcome_count: usize,
    table: BTreeMap<ClickConfiguration, f64>,
}

impl ClickStatistics {
    /// Validates and wraps a table. Configurations missing from `table` have
    /// probability zero.
    pub fn new(
        detector_count: u32,
        outcome_count: usize,
        table: BTreeMap<ClickConfiguration, f64>,
    ) -> Result<Self> {
        if detector_count < 2 {
            return Err(Error::InvalidParameter(format!(
                "need at least 2 detectors, got {detector_count}"
            )));
        }
        if outcome_count < 2 {
            return Err(Error::InvalidParameter(format!(
                "need at least 2 outcome bins, got {outcome_count}"
            )));
        }
        let mut sum = 0.0;
        for (config, &prob) in &table {
            config.check(detector_count, outcome_count)?;
            if !prob.is_finite() || prob < 0.0 {
                return Err(Error::InvalidProbabilities(format!(
                    "configuration ({config}) has probability {prob}"
                )));
            }
            sum += prob;
        }
        if (sum - 1.0).abs() > PROBABILITY_TOL {
            return Err(Error::InvalidProbabilities(format!(
                "table sums to {sum}, expected 1"
            )));
        }
        Ok(Self {
            detector_count,
            outcome_count,
            table,
        })
    }

    /// A table that puts all weight on one configuration.
    pub fn point(detector_count: u32, config: ClickConfiguration) -> Result<Self> {
        let outcome_count = config.outcome_count();
        Self::new(
            detector_count,
            outcome_count,
            BTreeMap::from([(config, 1.0)]),
        )
    }

    pub fn detector_count(&self) -> u32 {
        self.detector_count
    }

    pub fn outcome_count(&self) -> usize {
        self.outcome_count
    }

    pub fn probability(&self, config: &ClickConfiguration) -> f64 {
        self.table.get(config).copied().unwrap_or(0.0)
    }

    /// Entries in lexicographic configuration order.
    pub fn iter(&self) -> impl Iterator<Item = (&ClickConfiguration, f64)> {
        self.table.iter().map(|(c, &p)| (c, p))
    }

    pub fn total_probability(&self) -> f64 {
        self.table.values().sum()
    }

    /// Largest absolute difference between two tables over the union of
    /// their configurations.
    pub fn max_abs_difference(&self, other: &ClickStatistics) -> f64 {
        let mut worst: f64 = 0.0;
        for (c, p) in self.iter() {
            worst = worst.max((p - other.probability(c)).abs());
        }
        for (c, p) in other.iter() {
            worst = worst.max((p - self.probability(c)).abs());
        }
        worst
    }

    /// Means, raw second moments and covariances of the counts `N_k`.
    pub fn moments(&self) -> ClickMoments {
        weighted_moments(
            self.outcome_count,
            self.iter().map(|(c, p)| (c.counts(), p)),
        )
    }
}

/// Moments of configuration counts under the given `(counts, weight)` pairs.
/// Weights are used as supplied (they should sum to one).
pub(crate) fn weighted_moments<'a>(
    dim: usize,
    entries: impl Iterator<Item = (&'a [u32], f64)>,
) -> ClickMoments {
    let mut means = DVector::zeros(dim);
    let mut second = DMatrix::zeros(dim, dim);
    for (counts, prob) in entries {
        if prob == 0.0 {
            continue;
        }
        for k in 0..dim {
            let nk = counts[k] as f64;
            if nk == 0.0 {
                continue;
            }
            means[k] += prob * nk;
            for l in 0..dim {
                second[(k, l)] += prob * nk * counts[l] as f64;
            }
        }
    }
    let covariances = &second - &means * means.transpose();
    ClickMoments {
        means,
        second_moments: second,
        covariances,
    }
}

/// First and second moments of the configuration counts.
#[derive(Debug, Clone, PartialEq)]
pub struct ClickMoments {
    /// `mean(N_k)`
    pub means: DVector<f64>,
    /// `mean(N_k N_k')`
    pub second_moments: DMatrix<f64>,
    /// `mean(ΔN_k ΔN_k')`
    pub covariances: DMatrix<f64>,
}

/// Discrete classical mixing distribution over single-detector outcome laws.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalEnsemble {
    components: Vec<(f64, OutcomeProbabilities)>,
}

impl ClassicalEnsemble {
    pub fn new(components: Vec<(f64, OutcomeProbabilities)>) -> Result<Self> {
        let first = components.first().ok_or(Error::EmptyEnsemble)?;
        let outcome_count = first.1.outcome_count();
        let mut total = 0.0;
        for (weight, probs) in &components {
            if probs.outcome_count() != outcome_count {
                return Err(Error::DimensionMismatch {
                    expected: outcome_count,
                    found: probs.outcome_count(),
                });
            }
            if !weight.is_finite() || !(0.0..=1.0).contains(weight) {
                return Err(Error::InvalidProbabilities(format!(
                    "mixture weight {weight} outside [0, 1]"
                )));
            }
            total += weight;
        }
        if (total - 1.0).abs() > PROBABILITY_TOL {
            return Err(Error::InvalidProbabilities(format!(
                "mixture weights sum to {total}, expected 1"
            )));
        }
        Ok(Self { components })
    }

    /// A coherent (single-component) ensemble.
    pub fn pure(probs: OutcomeProbabilities) -> Self {
        Self {
            components: vec![(1.0, probs)],
        }
    }

    pub fn components(&self) -> &[(f64, OutcomeProbabilities)] {
        &self.components
    }

    pub fn outcome_count(&self) -> usize {
        self.components[0].1.outcome_count()
    }

    /// Weighted mean `⟨p_k⟩` and covariance `⟨Δp_k Δp_k'⟩` of the outcome
    /// laws over the ensemble.
    pub fn outcome_moments(&self) -> (DVector<f64>, DMatrix<f64>) {
        let dim = self.outcome_count();
        let mut mean = DVector::zeros(dim);
        for (w, p) in &self.components {
            mean += DVector::from_column_slice(p.as_slice()) * *w;
        }
        let mut cov = DMatrix::zeros(dim, dim);
        for (w, p) in &self.components {
            let delta = DVector::from_column_slice(p.as_slice()) - &mean;
            cov += &delta * delta.transpose() * *w;
        }
        (mean, cov)
    }
}

/// Click statistics of a classical mixture: every configuration's
/// probability is the weight-averaged multinomial probability.
pub fn mixture_click_statistics(
    ensemble: &ClassicalEnsemble,
    n_detectors: u32,
) -> Result<ClickStatistics> {
    if n_detectors < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 detectors, got {n_detectors}"
        )));
    }
    let outcome_count = ensemble.outcome_count();
    let mut table = BTreeMap::new();
    for config in compositions(n_detectors, outcome_count) {
        let mut prob = 0.0;
        for (w, p) in ensemble.components() {
            prob += w * multinomial_pmf(p, n_detectors, &config)?;
        }
        table.insert(config, prob);
    }
    ClickStatistics::new(n_detectors, outcome_count, table)
}
