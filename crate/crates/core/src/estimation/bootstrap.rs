//! Witness estimation from shot records with nonparametric bootstrap
//! confidence intervals for the minimal eigenvalue.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimation::records::{configuration_counts, ShotRecords};
use crate::statistics::weighted_moments;
use crate::witness::{build_witness_matrix, WitnessReport};

pub const DEFAULT_BOOTSTRAP_RESAMPLES: usize = 1000;
pub const DEFAULT_CONFIDENCE: f64 = 0.95;

/// Separates the bootstrap key from the sampling key when both derive from
/// the records seed.
const BOOTSTRAP_KEY: u64 = 0xB007_5743_9E37_79B9;

/// Sample witness with a percentile bootstrap interval for its minimal
/// eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatedWitness {
    pub report: WitnessReport,
    pub shot_count: usize,
    pub bootstrap_resamples: usize,
    pub confidence: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub systematic_shift: Option<f64>,
}

impl EstimatedWitness {
    pub fn contains(&self, value: f64) -> bool {
        self.ci_low <= value && value <= self.ci_high
    }

    pub fn width(&self) -> f64 {
        self.ci_high - self.ci_low
    }

    /// Attaches a systematic shift, widening the interval by it on both sides.
    pub fn with_systematic_shift(mut self, shift: f64) -> Self {
        let shift = shift.abs();
        self.ci_low -= shift;
        self.ci_high += shift;
        self.systematic_shift = Some(shift);
        let margin = self.ci_high - self.report.min_eigenvalue;
        self.report = self.report.with_margin(margin);
        self
    }
}

/// [`estimate_witness_seeded`] with the bootstrap seed derived from the
/// records seed (zero when the records carry none).
pub fn estimate_witness(
    records: &ShotRecords,
    bootstrap_resamples: usize,
    confidence: f64,
) -> Result<EstimatedWitness> {
    let seed = records.seed().unwrap_or(0) ^ BOOTSTRAP_KEY;
    estimate_witness_seeded(records, bootstrap_resamples, confidence, seed)
}

/// Estimates `M` from sample moments (1/S normalization) and bootstraps
/// the minimal eigenvalue over shots.
///
/// Resampling `S` shots with replacement is drawn as a multinomial over the
/// observed configurations, one ChaCha stream per resample, so results do not
/// depend on the number of worker threads. The percentile interval is
/// widened if needed so it always contains the point estimate. The verdict
/// is nonclassical only when the whole interval lies below zero.
pub fn estimate_witness_seeded(
    records: &ShotRecords,
    bootstrap_resamples: usize,
    confidence: f64,
    seed: u64,
) -> Result<EstimatedWitness> {
    let shots = records.shot_count();
    if shots < 2 {
        return Err(Error::TooFewShots {
            required: 2,
            found: shots,
        });
    }
    if bootstrap_resamples == 0 {
        return Err(Error::InvalidParameter(
            "need at least one bootstrap resample".into(),
        ));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "confidence {confidence} must lie in (0, 1)"
        )));
    }
    let dim = records.outcome_count();
    let n_detectors = records.detector_count() as u32;
    let (configs, counts): (Vec<_>, Vec<_>) = configuration_counts(records).into_iter().unzip();
    let freqs: Vec<f64> = counts.iter().map(|&c| c as f64 / shots as f64).collect();

    let witness_of = |weights: &[f64]| -> Result<WitnessReport> {
        let moments = weighted_moments(
            dim,
            configs
                .iter()
                .map(|c| c.counts())
                .zip(weights.iter().copied()),
        );
        build_witness_matrix(&moments.means, &moments.covariances, n_detectors)
    };
    let report = witness_of(&freqs)?;

    let base = ChaCha8Rng::seed_from_u64(seed);
    let mut replicates = (0..bootstrap_resamples)
        .into_par_iter()
        .map(|b| {
            let mut rng = base.clone();
            rng.set_stream(b as u64);
            let resampled = multinomial_resample(&mut rng, shots as u64, &freqs)?;
            let weights: Vec<f64> = resampled.iter().map(|&c| c as f64 / shots as f64).collect();
            Ok(witness_of(&weights)?.min_eigenvalue)
        })
        .collect::<Result<Vec<f64>>>()?;
    replicates.sort_by(f64::total_cmp);

    let (lo, hi) = percentile_interval(&replicates, confidence);
    let estimate = report.min_eigenvalue;
    let ci_low = lo.min(estimate);
    let ci_high = hi.max(estimate);
    let mean = replicates.iter().sum::<f64>() / replicates.len() as f64;
    let var = replicates.iter().map(|x| (x - mean).powi(2)).sum::<f64>()
        / replicates.len().max(2).saturating_sub(1) as f64;
    let report = report
        .with_stderr(var.sqrt())
        .with_margin(ci_high - estimate);

    Ok(EstimatedWitness {
        report,
        shot_count: shots,
        bootstrap_resamples,
        confidence,
        ci_low,
        ci_high,
        systematic_shift: None,
    })
}

/// Counts of a multinomial draw of `trials` over `probs`, via sequential
/// conditional binomials.
fn multinomial_resample(rng: &mut ChaCha8Rng, trials: u64, probs: &[f64]) -> Result<Vec<u64>> {
    let mut counts = vec![0u64; probs.len()];
    let mut remaining = trials;
    let mut remaining_mass = 1.0;
    for (i, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if i + 1 == probs.len() {
            counts[i] = remaining;
            break;
        }
        let conditional = (p / remaining_mass).clamp(0.0, 1.0);
        let draw = Binomial::new(remaining, conditional)
            .map_err(|e| Error::Consistency(format!("bootstrap binomial: {e}")))?
            .sample(rng);
        counts[i] = draw;
        remaining -= draw;
        remaining_mass -= p;
    }
    Ok(counts)
}

/// Percentile interval of sorted replicates at the given confidence.
pub(crate) fn percentile_interval(sorted: &[f64], confidence: f64) -> (f64, f64) {
    let n = sorted.len();
    let alpha = (1.0 - confidence) / 2.0;
    let lo = ((alpha * n as f64).floor() as usize).min(n - 1);
    let hi = (((1.0 - alpha) * n as f64).ceil() as usize)
        .saturating_sub(1)
        .min(n - 1);
    (sorted[lo], sorted[hi])
}
