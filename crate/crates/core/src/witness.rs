//! The covariance witness matrix and the nonclassicality verdict.
//!
//! For `N` detectors with configuration means `mean_k` and covariances
//! `cov_kk'`, the witness is
//!
//! ```text
//! M_kk' = N · cov_kk' − mean_k · (N δ_kk' − mean_k')
//! ```
//!
//! For any classical field `M = N²(N−1) · ⟨Δp_k Δp_k'⟩`, which is positive
//! semidefinite. A negative eigenvalue of `M` therefore certifies
//! nonclassical light.

use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::statistics::{mixture_click_statistics, ClassicalEnsemble, ClickMoments};

/// Eigenvalues with magnitude below this fraction of `max(1, max|M_kk'|)` are
/// reported as exactly zero.
///
/// `M` always annihilates `(1, …, 1)` because `Σ_k N_k = N`; without the snap
/// that structural zero comes out as rounding noise of either sign.
pub const EIGENVALUE_ZERO_TOL: f64 = 1e-12;

/// Tolerance for the agreement of the two routes to `M` in
/// [`classical_bound_check`], relative to `max(1, max|M_kk'|)`.
pub const ROUTE_AGREEMENT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Nonclassical,
    ConsistentWithClassical,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Nonclassical => "nonclassical",
            Verdict::ConsistentWithClassical => "consistent-with-classical",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Verdict {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nonclassical" => Ok(Verdict::Nonclassical),
            "consistent-with-classical" => Ok(Verdict::ConsistentWithClassical),
            other => Err(Error::InvalidParameter(format!(
                "unknown verdict '{other}'"
            ))),
        }
    }
}

/// Witness matrix together with its spectrum and verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessReport {
    pub matrix_m: DMatrix<f64>,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub min_eigenvalue: f64,
    /// Unit eigenvector belonging to `min_eigenvalue`.
    pub min_eigenvector: DVector<f64>,
    pub min_eigenvalue_stderr: Option<f64>,
    /// Nonnegative amount the minimal eigenvalue must clear below zero.
    pub significance_margin: f64,
    pub verdict: Verdict,
}

impl WitnessReport {
    /// Re-derives the verdict requiring `min_eigenvalue + margin < 0`.
    pub fn with_margin(mut self, margin: f64) -> Self {
        self.significance_margin = margin.max(0.0);
        self.verdict = verdict_for(self.min_eigenvalue, self.significance_margin);
        self
    }

    pub fn with_stderr(mut self, stderr: f64) -> Self {
        self.min_eigenvalue_stderr = Some(stderr);
        self
    }

    pub fn dimension(&self) -> usize {
        self.eigenvalues.len()
    }
}

fn verdict_for(min_eigenvalue: f64, margin: f64) -> Verdict {
    if min_eigenvalue + margin < 0.0 {
        Verdict::Nonclassical
    } else {
        Verdict::ConsistentWithClassical
    }
}

/// Ascending eigen-decomposition of a symmetric matrix, snapping near-zero
/// eigenvalues to zero.
pub fn symmetric_spectrum(matrix: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let scale = matrix.amax().max(1.0);
    let eigen = SymmetricEigen::new(matrix.clone());
    let mut order: Vec<usize> = (0..eigen.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eigen.eigenvalues[a].total_cmp(&eigen.eigenvalues[b]));
    let values = order
        .iter()
        .map(|&i| {
            let v = eigen.eigenvalues[i];
            if v.abs() <= EIGENVALUE_ZERO_TOL * scale {
                0.0
            } else {
                v
            }
        })
        .collect();
    let vectors = DMatrix::from_fn(matrix.nrows(), order.len(), |r, c| {
        eigen.eigenvectors[(r, order[c])]
    });
    (values, vectors)
}

/// Builds `M` from configuration means and covariances and evaluates its
/// spectrum. The verdict uses a zero margin.
pub fn build_witness_matrix(
    means: &DVector<f64>,
    covariances: &DMatrix<f64>,
    n_detectors: u32,
) -> Result<WitnessReport> {
    let dim = means.len();
    if covariances.nrows() != dim || covariances.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: if covariances.nrows() != dim {
                covariances.nrows()
            } else {
                covariances.ncols()
            },
        });
    }
    if dim < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 outcome bins, got {dim}"
        )));
    }
    if n_detectors < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 detectors, got {n_detectors}"
        )));
    }
    let n = n_detectors as f64;
    let raw = DMatrix::from_fn(dim, dim, |k, l| {
        let delta = if k == l { n } else { 0.0 };
        n * covariances[(k, l)] - means[k] * (delta - means[l])
    });
    let matrix_m = (&raw + raw.transpose()) * 0.5;
    Ok(report_from_matrix(matrix_m))
}

/// Convenience wrapper over [`build_witness_matrix`] for precomputed moments.
pub fn witness_from_moments(moments: &ClickMoments, n_detectors: u32) -> Result<WitnessReport> {
    build_witness_matrix(&moments.means, &moments.covariances, n_detectors)
}

pub(crate) fn report_from_matrix(matrix_m: DMatrix<f64>) -> WitnessReport {
    let (eigenvalues, vectors) = symmetric_spectrum(&matrix_m);
    let min_eigenvalue = eigenvalues[0];
    let mut min_eigenvector = vectors.column(0).into_owned();
    // Fix the sign: the first component of largest magnitude is positive.
    let peak = min_eigenvector.amax();
    if let Some(lead) = min_eigenvector.iter().find(|x| x.abs() >= peak - 1e-12) {
        if *lead < 0.0 {
            min_eigenvector.neg_mut();
        }
    }
    WitnessReport {
        min_eigenvector,
        verdict: verdict_for(min_eigenvalue, 0.0),
        matrix_m,
        eigenvalues,
        min_eigenvalue,
        min_eigenvalue_stderr: None,
        significance_margin: 0.0,
    }
}

/// `N²(N−1) · ⟨Δp_k Δp_k'⟩` computed directly from the ensemble.
pub fn classical_witness_matrix(ensemble: &ClassicalEnsemble, n_detectors: u32) -> DMatrix<f64> {
    let n = n_detectors as f64;
    let (_, cov) = ensemble.outcome_moments();
    cov * (n * n * (n - 1.0))
}

/// Computes `M` for a classical ensemble both from its click statistics and
/// from the spread of its outcome laws, failing if the two disagree.
pub fn classical_bound_check(
    ensemble: &ClassicalEnsemble,
    n_detectors: u32,
) -> Result<WitnessReport> {
    let stats = mixture_click_statistics(ensemble, n_detectors)?;
    let report = witness_from_moments(&stats.moments(), n_detectors)?;
    let direct = classical_witness_matrix(ensemble, n_detectors);
    let scale = direct.amax().max(1.0);
    let deviation = (&report.matrix_m - &direct).amax();
    if deviation > ROUTE_AGREEMENT_TOL * scale {
        return Err(Error::Consistency(format!(
            "witness routes differ by {deviation:.3e}"
        )));
    }
    Ok(report)
}
