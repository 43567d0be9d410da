//! Photon-number models of the input light, detector response maps and the
//! multiplexing tree that turns them into click statistics.

pub mod detector;
pub mod multiplex;
pub mod states;

pub use detector::{pnr_response, DetectorResponse};
pub use multiplex::{
    classical_ensemble_from_intensities, click_statistics_from_state, state_witness, SplittingTree,
};
pub use states::{
    coherent_statistics, fock_statistics, heralded_statistics, thermal_statistics,
    PhotonStatistics, TwoModeSqueezedVacuum, DEFAULT_TAIL_TOL,
};
