//! Finite-shot simulation and inference: sampling records, estimating the
//! witness with bootstrap intervals, and splitting-imbalance systematics.

pub mod bootstrap;
pub mod records;
pub mod systematics;

pub use bootstrap::{
    estimate_witness, estimate_witness_seeded, EstimatedWitness, DEFAULT_BOOTSTRAP_RESAMPLES,
    DEFAULT_CONFIDENCE,
};
pub use records::{
    configuration_counts, configurations_from_records, ingest_records, sample_records,
    IngestMapping, ShotRecords,
};
pub use systematics::splitting_systematics;
