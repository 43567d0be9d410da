//! Detector-independent certification of nonclassical light from multiplexed
//! click-counting measurements.
//!
//! Light split onto `N` detectors with `K + 1` outcome bins produces, for any
//! classical field and any detector response, a mixture of multinomial
//! distributions over the click configurations `(N_0, …, N_K)`. The witness
//! matrix built from configuration means and covariances is then positive
//! semidefinite; a negative eigenvalue certifies nonclassical light.
//!
//! - [`multinomial`], [`statistics`], [`witness`]: measurement theory.
//! - [`photon`]: exact click statistics for quantum and classical inputs.
//! - [`estimation`]: finite-shot sampling, bootstrap inference, systematics.
//! - [`config`], [`format`], [`scan`]: plumbing behind the command-line tool.

pub mod config;
pub mod error;
pub mod estimation;
pub mod format;
pub mod multinomial;
pub mod photon;
pub mod scan;
pub mod statistics;
pub mod witness;

pub use error::{Error, Result};
pub use multinomial::{multinomial_pmf, ClickConfiguration, OutcomeProbabilities};
pub use statistics::{mixture_click_statistics, ClassicalEnsemble, ClickMoments, ClickStatistics};
pub use witness::{build_witness_matrix, classical_bound_check, Verdict, WitnessReport};
