//! Passive multiplexing of an input state onto `N` detectors and the
//! resulting click statistics.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::multinomial::{binomial_pmf, compositions, ClickConfiguration, OutcomeProbabilities};
use crate::photon::detector::DetectorResponse;
use crate::photon::states::{poisson_pmf, PhotonStatistics};
use crate::statistics::{ClassicalEnsemble, ClickStatistics};
use crate::witness::{witness_from_moments, WitnessReport};

const RATIO_SUM_TOL: f64 = 1e-12;

/// Intensity fractions `q_1 … q_N` delivered to each detector.
#[derive(Debug, Clone, PartialEq)]
pub struct SplittingTree {
    ratios: Vec<f64>,
}

impl SplittingTree {
    pub fn new(ratios: Vec<f64>) -> Result<Self> {
        if ratios.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "splitting tree needs at least 2 outputs, got {}",
                ratios.len()
            )));
        }
        if ratios.iter().any(|q| !q.is_finite() || *q <= 0.0) {
            return Err(Error::InvalidParameter(
                "splitting ratios must be positive".into(),
            ));
        }
        let sum: f64 = ratios.iter().sum();
        if (sum - 1.0).abs() > RATIO_SUM_TOL {
            return Err(Error::InvalidParameter(format!(
                "splitting ratios sum to {sum}, expected 1"
            )));
        }
        Ok(Self { ratios })
    }

    /// Balanced tree, e.g. a cascade of 50/50 beam splitters.
    pub fn uniform(n_detectors: usize) -> Result<Self> {
        if n_detectors < 2 {
            return Err(Error::InvalidParameter(format!(
                "need at least 2 detectors, got {n_detectors}"
            )));
        }
        Ok(Self {
            ratios: vec![1.0 / n_detectors as f64; n_detectors],
        })
    }

    pub fn ratios(&self) -> &[f64] {
        &self.ratios
    }

    pub fn n_detectors(&self) -> usize {
        self.ratios.len()
    }

    pub fn is_uniform(&self) -> bool {
        let target = 1.0 / self.ratios.len() as f64;
        self.ratios
            .iter()
            .all(|q| (q - target).abs() <= RATIO_SUM_TOL)
    }
}

/// Exact click statistics of `state` split by `tree` onto detectors that
/// each respond through `response`.
///
/// For each photon number the photons are partitioned multinomially among
/// the arms; this is evaluated as a sequence of binomial splits (arm `i`
/// takes each remaining photon with probability `q_i / Σ_{j≥i} q_j`) while
/// accumulating the configuration counts of the arms already resolved. The
/// result is renormalized by the retained mass `1 − tail_mass`.
pub fn click_statistics_from_state(
    state: &PhotonStatistics,
    tree: &SplittingTree,
    response: &DetectorResponse,
) -> Result<ClickStatistics> {
    let n_max = state.n_max();
    if response.max_photons() < n_max {
        return Err(Error::InvalidParameter(format!(
            "response covers up to {} photons but the state reaches {n_max}",
            response.max_photons()
        )));
    }
    let outcomes = response.outcome_count();
    let arms = tree.n_detectors();

    // weights[r * configs + c]: r photons still unassigned, partial configuration c
    let mut configs = compositions(0, outcomes);
    let mut weights: Vec<f64> = state.probs().to_vec();
    let mut remaining_ratio = 1.0;

    for (arm, &q) in tree.ratios().iter().enumerate() {
        let last = arm + 1 == arms;
        let take = if last {
            1.0
        } else {
            (q / remaining_ratio).min(1.0)
        };
        remaining_ratio -= q;

        let next_configs = compositions(arm as u32 + 1, outcomes);
        let index: HashMap<&ClickConfiguration, usize> = next_configs
            .iter()
            .enumerate()
            .map(|(i, c)| (c, i))
            .collect();
        let successor: Vec<Vec<usize>> = configs
            .iter()
            .map(|c| {
                (0..outcomes)
                    .map(|k| {
                        let mut counts = c.counts().to_vec();
                        counts[k] += 1;
                        index[&ClickConfiguration::new(counts)]
                    })
                    .collect()
            })
            .collect();

        let width = next_configs.len();
        let mut next = vec![0.0; (n_max + 1) * width];
        for r in 0..=n_max {
            let row = &weights[r * configs.len()..(r + 1) * configs.len()];
            if row.iter().all(|&w| w == 0.0) {
                continue;
            }
            let m_range = if last { r..=r } else { 0..=r };
            for m in m_range {
                let split = binomial_pmf(r, m, take);
                if split == 0.0 {
                    continue;
                }
                let outcome_law = response.row(m);
                let base = (r - m) * width;
                for (c, &w) in row.iter().enumerate() {
                    if w == 0.0 {
                        continue;
                    }
                    let wm = w * split;
                    for (k, &rk) in outcome_law.iter().enumerate() {
                        if rk != 0.0 {
                            next[base + successor[c][k]] += wm * rk;
                        }
                    }
                }
            }
        }
        configs = next_configs;
        weights = next;
    }

    // every photon is assigned after the last arm, so only the r = 0 block is populated
    let kept = 1.0 - state.tail_mass();
    let width = configs.len();
    let table: BTreeMap<ClickConfiguration, f64> = configs
        .into_iter()
        .zip(&weights[..width])
        .map(|(c, &w)| (c, w / kept))
        .collect();
    ClickStatistics::new(arms as u32, outcomes, table)
}

/// Exact witness of `state` behind `tree` and `response`.
pub fn state_witness(
    state: &PhotonStatistics,
    tree: &SplittingTree,
    response: &DetectorResponse,
) -> Result<WitnessReport> {
    let stats = click_statistics_from_state(state, tree, response)?;
    witness_from_moments(&stats.moments(), stats.detector_count())
}

/// Single-detector outcome laws of an ensemble of coherent fields with
/// the given `(weight, mean photon number)` pairs behind a uniform tree.
///
/// Each detector sees a Poisson field of mean `μ / N`, so
/// `p_k = Σ_m Poisson(m; μ/N) · R(k|m)`.
pub fn classical_ensemble_from_intensities(
    intensities: &[(f64, f64)],
    tree: &SplittingTree,
    response: &DetectorResponse,
    tail_tol: f64,
) -> Result<ClassicalEnsemble> {
    if !tree.is_uniform() {
        return Err(Error::NonUniformTree);
    }
    let n = tree.n_detectors() as f64;
    let components = intensities
        .iter()
        .map(|&(weight, mean)| {
            if !mean.is_finite() || mean < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "mean photon number {mean} must be finite and nonnegative"
                )));
            }
            let arm_mean = mean / n;
            let mut law = vec![0.0; response.outcome_count()];
            let mut kept = 0.0;
            for m in 0..=response.max_photons() {
                let pm = poisson_pmf(m, arm_mean);
                kept += pm;
                for (slot, r) in law.iter_mut().zip(response.row(m)) {
                    *slot += pm * r;
                }
            }
            let tail = (1.0 - kept).max(0.0);
            if tail > tail_tol {
                return Err(Error::Truncation {
                    tail,
                    tolerance: tail_tol,
                    n_max: response.max_photons(),
                });
            }
            law.iter_mut().for_each(|p| *p /= kept);
            Ok((weight, OutcomeProbabilities::new(law)?))
        })
        .collect::<Result<Vec<_>>>()?;
    ClassicalEnsemble::new(components)
}
