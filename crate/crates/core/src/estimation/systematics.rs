//! Systematic shift of the exact minimal eigenvalue under splitting
//! imbalance.

use crate::error::{Error, Result};
use crate::photon::{state_witness, DetectorResponse, PhotonStatistics, SplittingTree};

/// Largest absolute change of the exact minimal eigenvalue when the balanced
/// tree `q_i = 1/N` is perturbed to `q_i ∝ 1/N + s_i · imbalance` over every
/// sign pattern `s ∈ {−1, +1}^N`.
///
/// Cost grows as `2^N` exact evaluations.
pub fn splitting_systematics(
    state: &PhotonStatistics,
    response: &DetectorResponse,
    n_detectors: usize,
    imbalance: f64,
) -> Result<f64> {
    if n_detectors < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 detectors, got {n_detectors}"
        )));
    }
    if n_detectors > 16 {
        return Err(Error::InvalidParameter(format!(
            "exhaustive imbalance search is limited to 16 detectors, got {n_detectors}"
        )));
    }
    let balanced = 1.0 / n_detectors as f64;
    if !imbalance.is_finite() || imbalance < 0.0 || imbalance >= balanced {
        return Err(Error::InvalidParameter(format!(
            "imbalance {imbalance} must lie in [0, 1/N = {balanced})"
        )));
    }
    if imbalance == 0.0 {
        return Ok(0.0);
    }
    let reference =
        state_witness(state, &SplittingTree::uniform(n_detectors)?, response)?.min_eigenvalue;
    let mut worst: f64 = 0.0;
    for pattern in 0u32..(1 << n_detectors) {
        let raw: Vec<f64> = (0..n_detectors)
            .map(|i| {
                if pattern >> i & 1 == 1 {
                    balanced + imbalance
                } else {
                    balanced - imbalance
                }
            })
            .collect();
        let total: f64 = raw.iter().sum();
        let tree = SplittingTree::new(raw.iter().map(|q| q / total).collect())?;
        let shifted = state_witness(state, &tree, response)?.min_eigenvalue;
        worst = worst.max((shifted - reference).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::photon::{fock_statistics, pnr_response};

    #[test]
    fn no_imbalance_no_shift() {
        let r = pnr_response(2, 2, 1.0).unwrap();
        assert_eq!(
            splitting_systematics(&fock_statistics(2), &r, 2, 0.0).unwrap(),
            0.0
        );
    }

    #[test]
    fn vacuum_is_insensitive() {
        let r = pnr_response(0, 2, 0.9).unwrap();
        for n in 2..=4 {
            assert_eq!(
                splitting_systematics(&fock_statistics(0), &r, n, 0.05).unwrap(),
                0.0
            );
        }
    }

    #[test]
    fn imbalance_range() {
        let r = pnr_response(2, 2, 1.0).unwrap();
        assert!(splitting_systematics(&fock_statistics(2), &r, 2, 0.5).is_err());
        assert!(splitting_systematics(&fock_statistics(2), &r, 2, -0.1).is_err());
        assert!(splitting_systematics(&fock_statistics(2), &r, 1, 0.1).is_err());
    }
}
