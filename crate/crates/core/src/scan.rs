//! Heralding-bin and pump-power scans of the exact and estimated witness.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimation::{
    estimate_witness, sample_records, splitting_systematics, EstimatedWitness,
};
use crate::photon::{
    click_statistics_from_state, heralded_statistics, DetectorResponse, SplittingTree,
    TwoModeSqueezedVacuum,
};
use crate::witness::{witness_from_moments, WitnessReport};

/// Measurement side of a scan: herald efficiency, multiplexing tree,
/// detector response and truncation.
#[derive(Debug, Clone)]
pub struct ScanModel {
    pub herald_efficiency: f64,
    pub tree: SplittingTree,
    pub response: DetectorResponse,
    pub n_max: usize,
    pub tail_tol: f64,
}

/// Finite-shot estimation attached to each scan point.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimationSettings {
    pub shots: usize,
    pub seed: u64,
    pub bootstrap: usize,
    pub confidence: f64,
    /// Splitting imbalance folded into the interval as a systematic shift.
    pub imbalance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanPoint {
    pub lambda: f64,
    pub bin: usize,
    pub herald_probability: f64,
    /// `None` when the heralding bin cannot occur.
    pub exact: Option<WitnessReport>,
    pub estimate: Option<EstimatedWitness>,
}

impl ScanPoint {
    pub fn min_eigenvalue(&self) -> Option<f64> {
        self.exact.as_ref().map(|r| r.min_eigenvalue)
    }
}

impl ScanModel {
    /// Exact (and optionally estimated) witness of the state heralded on
    /// `bin`. `index` decorrelates the sampling seeds of grid points.
    pub fn point(
        &self,
        source: &TwoModeSqueezedVacuum,
        bin: usize,
        index: usize,
        estimation: Option<&EstimationSettings>,
    ) -> Result<ScanPoint> {
        let herald_probability = source.herald_probability(self.herald_efficiency, bin)?;
        let mut point = ScanPoint {
            lambda: source.lambda(),
            bin,
            herald_probability,
            exact: None,
            estimate: None,
        };
        if herald_probability <= 0.0 {
            return Ok(point);
        }
        let (state, _) = heralded_statistics(
            source,
            self.herald_efficiency,
            bin,
            self.n_max,
            self.tail_tol,
        )?;
        let stats = click_statistics_from_state(&state, &self.tree, &self.response)?;
        point.exact = Some(witness_from_moments(
            &stats.moments(),
            stats.detector_count(),
        )?);
        if let Some(settings) = estimation {
            let seed = settings.seed.wrapping_add(index as u64);
            let records = sample_records(&stats, settings.shots, seed)?;
            let mut estimate = estimate_witness(&records, settings.bootstrap, settings.confidence)?;
            if let Some(imbalance) = settings.imbalance {
                if !self.tree.is_uniform() {
                    return Err(Error::InvalidParameter(
                        "imbalance systematics assume a uniform splitting tree".into(),
                    ));
                }
                let shift = splitting_systematics(
                    &state,
                    &self.response,
                    self.tree.n_detectors(),
                    imbalance,
                )?;
                estimate = estimate.with_systematic_shift(shift);
            }
            point.estimate = Some(estimate);
        }
        Ok(point)
    }

    /// One point per heralding bin, in the order given.
    pub fn herald_scan(
        &self,
        source: &TwoModeSqueezedVacuum,
        bins: &[usize],
        estimation: Option<&EstimationSettings>,
    ) -> Result<Vec<ScanPoint>> {
        bins.par_iter()
            .enumerate()
            .map(|(i, &bin)| self.point(source, bin, i, estimation))
            .collect()
    }

    /// Long-format grid over `(λ, bin)`, λ-major.
    pub fn power_scan(
        &self,
        lambdas: &[f64],
        bins: &[usize],
        estimation: Option<&EstimationSettings>,
    ) -> Result<Vec<ScanPoint>> {
        let sources = lambdas
            .iter()
            .map(|&l| TwoModeSqueezedVacuum::from_lambda(l))
            .collect::<Result<Vec<_>>>()?;
        let grid: Vec<(usize, usize)> = (0..sources.len())
            .flat_map(|s| (0..bins.len()).map(move |b| (s, b)))
            .collect();
        grid.par_iter()
            .enumerate()
            .map(|(i, &(s, b))| self.point(&sources[s], bins[b], i, estimation))
            .collect()
    }
}
