//! Photon-number distributions of the input states.

use statrs::function::factorial::{ln_binomial, ln_factorial};

use crate::error::{Error, Result};
use crate::multinomial::PROBABILITY_TOL;

/// Default bound on the probability mass discarded by truncation.
pub const DEFAULT_TAIL_TOL: f64 = 1e-10;

/// Photon-number distribution truncated at `n_max`, with the discarded mass
/// above the cutoff tracked in `tail_mass`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonStatistics {
    probs: Vec<f64>,
    tail_mass: f64,
}

impl PhotonStatistics {
    /// Wraps `probs` (indexed by photon number), taking the tail as the mass
    /// missing from unity. Fails if that tail exceeds `tail_tol`.
    pub fn from_probs(probs: Vec<f64>, tail_tol: f64) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidProbabilities(
                "photon distribution is empty".into(),
            ));
        }
        if let Some(bad) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidProbabilities(format!(
                "photon probability {bad} is negative or not finite"
            )));
        }
        let sum: f64 = probs.iter().sum();
        if sum > 1.0 + PROBABILITY_TOL {
            return Err(Error::InvalidProbabilities(format!(
                "photon probabilities sum to {sum}"
            )));
        }
        let tail_mass = (1.0 - sum).max(0.0);
        if tail_mass > tail_tol {
            return Err(Error::Truncation {
                tail: tail_mass,
                tolerance: tail_tol,
                n_max: probs.len() - 1,
            });
        }
        Ok(Self { probs, tail_mass })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn n_max(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn probability(&self, n: usize) -> f64 {
        self.probs.get(n).copied().unwrap_or(0.0)
    }

    pub fn mean_photons(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(n, p)| n as f64 * p)
            .sum()
    }

    /// Weighted mixture of distributions; the result is truncated at the
    /// largest `n_max` among the components.
    pub fn mixture(components: &[(f64, PhotonStatistics)]) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::EmptyEnsemble);
        }
        let weight_sum: f64 = components.iter().map(|(w, _)| w).sum();
        if components.iter().any(|(w, _)| !(0.0..=1.0).contains(w))
            || (weight_sum - 1.0).abs() > PROBABILITY_TOL
        {
            return Err(Error::InvalidProbabilities(format!(
                "mixture weights must lie in [0, 1] and sum to 1 (sum {weight_sum})"
            )));
        }
        let n_max = components.iter().map(|(_, s)| s.n_max()).max().unwrap_or(0);
        let mut probs = vec![0.0; n_max + 1];
        let mut tail_mass = 0.0;
        for (w, stats) in components {
            for (slot, p) in probs.iter_mut().zip(stats.probs()) {
                *slot += w * p;
            }
            tail_mass += w * stats.tail_mass;
        }
        Ok(Self { probs, tail_mass })
    }
}

fn check_mean(mean_photons: f64) -> Result<()> {
    if !mean_photons.is_finite() || mean_photons < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "mean photon number {mean_photons} must be finite and nonnegative"
        )));
    }
    Ok(())
}

/// Poisson photon statistics of a coherent state.
pub fn coherent_statistics(
    mean_photons: f64,
    n_max: usize,
    tail_tol: f64,
) -> Result<PhotonStatistics> {
    check_mean(mean_photons)?;
    let probs = (0..=n_max).map(|n| poisson_pmf(n, mean_photons)).collect();
    PhotonStatistics::from_probs(probs, tail_tol)
}

pub(crate) fn poisson_pmf(n: usize, mean: f64) -> f64 {
    if mean == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    (n as f64 * mean.ln() - mean - ln_factorial(n as u64)).exp()
}

/// Geometric photon statistics `μⁿ / (1 + μ)^{n+1}` of a thermal state.
pub fn thermal_statistics(
    mean_photons: f64,
    n_max: usize,
    tail_tol: f64,
) -> Result<PhotonStatistics> {
    check_mean(mean_photons)?;
    let ratio = mean_photons / (1.0 + mean_photons);
    let probs = (0..=n_max)
        .map(|n| (1.0 - ratio) * ratio.powi(n as i32))
        .collect();
    PhotonStatistics::from_probs(probs, tail_tol)
}

/// Photon-number eigenstate `|n⟩`.
pub fn fock_statistics(photon_number: usize) -> PhotonStatistics {
    let mut probs = vec![0.0; photon_number + 1];
    probs[photon_number] = 1.0;
    PhotonStatistics {
        probs,
        tail_mass: 0.0,
    }
}

/// Two-mode squeezed vacuum with photon-number correlations
/// `p(n, n') = (1 − λ) λⁿ δ_{n n'}`, `λ = tanh² r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoModeSqueezedVacuum {
    lambda: f64,
}

impl TwoModeSqueezedVacuum {
    pub fn from_lambda(lambda: f64) -> Result<Self> {
        if !lambda.is_finite() || !(0.0..1.0).contains(&lambda) {
            return Err(Error::InvalidParameter(format!(
                "squeezing parameter lambda = {lambda} must lie in [0, 1)"
            )));
        }
        Ok(Self { lambda })
    }

    pub fn from_squeezing(r: f64) -> Result<Self> {
        if !r.is_finite() || r < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "squeezing r = {r} must be finite and nonnegative"
            )));
        }
        Self::from_lambda(r.tanh().powi(2))
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Joint probability `p(n, n')`.
    pub fn joint_probability(&self, signal: usize, idler: usize) -> f64 {
        if signal != idler {
            return 0.0;
        }
        (1.0 - self.lambda) * self.lambda.powi(signal as i32)
    }

    /// Probability `𝒩_k` that an ideal PNR herald of efficiency `η̃`
    /// registers `k` counts.
    pub fn herald_probability(&self, herald_efficiency: f64, herald_bin: usize) -> Result<f64> {
        check_efficiency(herald_efficiency)?;
        let lambda = self.lambda;
        let k = herald_bin as i32;
        let loss = 1.0 - lambda * (1.0 - herald_efficiency);
        Ok((1.0 - lambda) * (lambda * herald_efficiency).powi(k) / loss.powi(k + 1))
    }
}

fn check_efficiency(efficiency: f64) -> Result<()> {
    if !(efficiency > 0.0 && efficiency <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "efficiency {efficiency} must lie in (0, 1]"
        )));
    }
    Ok(())
}

/// Signal-arm photon statistics conditioned on the herald registering `k`
/// counts, together with the heralding probability `𝒩_k`.
///
/// The conditional law is
/// `p(n|k) = C(n,k) η̃^k (1−η̃)^{n−k} (1−λ) λⁿ / 𝒩_k` for `n ≥ k`, which is a
/// negative binomial in `n − k` with ratio `λ(1 − η̃)`.
pub fn heralded_statistics(
    source: &TwoModeSqueezedVacuum,
    herald_efficiency: f64,
    herald_bin: usize,
    n_max: usize,
    tail_tol: f64,
) -> Result<(PhotonStatistics, f64)> {
    let herald_probability = source.herald_probability(herald_efficiency, herald_bin)?;
    if herald_probability <= 0.0 {
        return Err(Error::HeraldImpossible { bin: herald_bin });
    }
    let ratio = source.lambda() * (1.0 - herald_efficiency);
    let k = herald_bin;
    let log_norm = (k as f64 + 1.0) * (1.0 - ratio).ln();
    let probs = (0..=n_max)
        .map(|n| {
            if n < k {
                0.0
            } else if ratio == 0.0 {
                if n == k {
                    1.0
                } else {
                    0.0
                }
            } else {
                (ln_binomial(n as u64, k as u64) + log_norm + (n - k) as f64 * ratio.ln()).exp()
            }
        })
        .collect();
    let state = PhotonStatistics::from_probs(probs, tail_tol)?;
    Ok((state, herald_probability))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coherent_vacuum() {
        let s = coherent_statistics(0.0, 5, DEFAULT_TAIL_TOL).unwrap();
        assert_eq!(s.probs()[0], 1.0);
        assert_eq!(s.tail_mass(), 0.0);
    }

    #[test]
    fn coherent_unit_mean() {
        let s = coherent_statistics(1.0, 20, DEFAULT_TAIL_TOL).unwrap();
        // direct series: e^{-1} · 1^n / n!
        let mut term = (-1.0f64).exp();
        for n in 0..=20 {
            assert!((s.probs()[n] - term).abs() < 1e-15);
            term /= (n + 1) as f64;
        }
        assert!((s.probs()[0] - 0.367_879_441_171).abs() < 1e-12);
        assert!(s.tail_mass() < 1e-15);
    }

    #[test]
    fn coherent_truncation_failure() {
        assert!(matches!(
            coherent_statistics(4.0, 2, DEFAULT_TAIL_TOL),
            Err(Error::Truncation { n_max: 2, .. })
        ));
        assert!(coherent_statistics(-1.0, 2, DEFAULT_TAIL_TOL).is_err());
    }

    #[test]
    fn thermal_closed_form() {
        let vac = thermal_statistics(0.0, 3, DEFAULT_TAIL_TOL).unwrap();
        assert_eq!(vac.probs(), &[1.0, 0.0, 0.0, 0.0]);
        let s = thermal_statistics(1.0, 60, DEFAULT_TAIL_TOL).unwrap();
        assert_eq!(s.probs()[0], 0.5);
        assert_eq!(s.probs()[1], 0.25);
        assert!((s.mean_photons() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn fock_point_masses() {
        assert_eq!(fock_statistics(0).probs(), &[1.0]);
        assert_eq!(fock_statistics(1).probs(), &[0.0, 1.0]);
        assert_eq!(fock_statistics(3).probability(3), 1.0);
        assert_eq!(fock_statistics(3).n_max(), 3);
    }

    #[test]
    fn squeezing_parameterizations_agree() {
        let from_r = TwoModeSqueezedVacuum::from_squeezing(0.5).unwrap();
        assert!((from_r.lambda() - 0.5f64.tanh().powi(2)).abs() < 1e-12);
        assert!(TwoModeSqueezedVacuum::from_lambda(1.0).is_err());
        assert!(TwoModeSqueezedVacuum::from_lambda(-0.1).is_err());
        let total: f64 = (0..200).map(|n| from_r.joint_probability(n, n)).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(from_r.joint_probability(1, 2), 0.0);
    }

    /// Unnormalized terms `C(n,k) η̃^k (1−η̃)^{n−k} (1−λ) λⁿ`, summed directly.
    fn unnormalized_series(lambda: f64, eta: f64, k: usize, terms: usize) -> Vec<f64> {
        (0..terms)
            .map(|n| {
                if n < k {
                    return 0.0;
                }
                let mut binom = 1.0;
                for i in 0..k {
                    binom *= (n - i) as f64 / (i + 1) as f64;
                }
                binom
                    * eta.powi(k as i32)
                    * (1.0 - eta).powi((n - k) as i32)
                    * (1.0 - lambda)
                    * lambda.powi(n as i32)
            })
            .collect()
    }

    #[test]
    fn herald_probability_matches_series() {
        let series = unnormalized_series(0.25, 0.9, 1, 200);
        let oracle: f64 = series.iter().sum();
        assert!((oracle - 0.177_514_792_899).abs() < 1e-11);
        let src = TwoModeSqueezedVacuum::from_lambda(0.25).unwrap();
        let (state, nk) = heralded_statistics(&src, 0.9, 1, 40, DEFAULT_TAIL_TOL).unwrap();
        assert!((nk - oracle).abs() < 1e-12);
        for (n, p) in state.probs().iter().enumerate() {
            assert!((p - series[n] / oracle).abs() < 1e-12);
        }
    }

    #[test]
    fn herald_zero_is_thermal() {
        let src = TwoModeSqueezedVacuum::from_lambda(0.4).unwrap();
        let eta = 0.7;
        let (state, _) = heralded_statistics(&src, eta, 0, 60, DEFAULT_TAIL_TOL).unwrap();
        let x = 0.4 * (1.0 - eta);
        let thermal = thermal_statistics(x / (1.0 - x), 60, DEFAULT_TAIL_TOL).unwrap();
        for (a, b) in state.probs().iter().zip(thermal.probs()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn vanishing_squeezing_heralds_vacuum() {
        let src = TwoModeSqueezedVacuum::from_lambda(0.0).unwrap();
        let (state, nk) = heralded_statistics(&src, 0.9, 0, 5, DEFAULT_TAIL_TOL).unwrap();
        assert_eq!(state.probs()[0], 1.0);
        assert_eq!(nk, 1.0);
        assert_eq!(
            heralded_statistics(&src, 0.9, 1, 5, DEFAULT_TAIL_TOL),
            Err(Error::HeraldImpossible { bin: 1 })
        );
    }

    #[test]
    fn perfect_herald_gives_fock() {
        let src = TwoModeSqueezedVacuum::from_lambda(0.3).unwrap();
        let (state, _) = heralded_statistics(&src, 1.0, 2, 4, DEFAULT_TAIL_TOL).unwrap();
        assert_eq!(state.probs(), &[0.0, 0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn herald_below_cutoff_fails() {
        let src = TwoModeSqueezedVacuum::from_lambda(0.3).unwrap();
        assert!(matches!(
            heralded_statistics(&src, 0.9, 5, 3, DEFAULT_TAIL_TOL),
            Err(Error::Truncation { .. })
        ));
        assert!(heralded_statistics(&src, 0.0, 1, 10, DEFAULT_TAIL_TOL).is_err());
    }

    #[test]
    fn mixture_of_states() {
        let a = coherent_statistics(1.0, 30, DEFAULT_TAIL_TOL).unwrap();
        let b = fock_statistics(2);
        let mix = PhotonStatistics::mixture(&[(0.5, a), (0.5, b)]).unwrap();
        assert_eq!(mix.n_max(), 30);
        assert!((mix.mean_photons() - 1.5).abs() < 1e-9);
        assert!(PhotonStatistics::mixture(&[]).is_err());
    }
}
