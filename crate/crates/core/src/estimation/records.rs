//! Per-shot outcome records: synthetic sampling, the plain-text records
//! format and tallying into empirical click statistics.
//!
//! The records format is a header line `N=<int> K=<int> seed=<int|none>`
//! followed by one shot per line, written as `N` space-separated outcome
//! indices in `0..=K`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::multinomial::ClickConfiguration;
use crate::statistics::ClickStatistics;

/// Outcome tuples `(k_1, …, k_N)` of a sequence of shots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShotRecords {
    detector_count: usize,
    outcome_count: usize,
    /// Row-major, `detector_count` entries per shot.
    outcomes: Vec<u16>,
    seed: Option<u64>,
}

impl ShotRecords {
    pub fn new(
        detector_count: usize,
        outcome_count: usize,
        outcomes: Vec<u16>,
        seed: Option<u64>,
    ) -> Result<Self> {
        if detector_count < 2 {
            return Err(Error::InvalidParameter(format!(
                "need at least 2 detectors, got {detector_count}"
            )));
        }
        if outcome_count < 2 || outcome_count > u16::MAX as usize {
            return Err(Error::InvalidParameter(format!(
                "outcome count {outcome_count} out of range"
            )));
        }
        if !outcomes.len().is_multiple_of(detector_count) {
            return Err(Error::DimensionMismatch {
                expected: detector_count,
                found: outcomes.len() % detector_count,
            });
        }
        if let Some(bad) = outcomes.iter().find(|&&k| k as usize >= outcome_count) {
            return Err(Error::InvalidParameter(format!(
                "outcome {bad} outside 0..={}",
                outcome_count - 1
            )));
        }
        Ok(Self {
            detector_count,
            outcome_count,
            outcomes,
            seed,
        })
    }

    pub fn detector_count(&self) -> usize {
        self.detector_count
    }

    pub fn outcome_count(&self) -> usize {
        self.outcome_count
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn shot_count(&self) -> usize {
        self.outcomes.len() / self.detector_count
    }

    pub fn shot(&self, index: usize) -> &[u16] {
        let n = self.detector_count;
        &self.outcomes[index * n..(index + 1) * n]
    }

    pub fn shots(&self) -> impl Iterator<Item = &[u16]> {
        self.outcomes.chunks_exact(self.detector_count)
    }

    /// Serializes to the records text format.
    pub fn to_text(&self) -> String {
        let mut out = header_line(self.detector_count, self.outcome_count, self.seed);
        for shot in self.shots() {
            for (i, k) in shot.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                let _ = write!(out, "{k}");
            }
            out.push('\n');
        }
        out
    }

    /// Parses the records text format. Every invalid shot line is reported.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "empty records file".into(),
        })?;
        let header = parse_header(header)?;
        let n = header.detectors;
        let mut outcomes = Vec::new();
        let mut errors = Vec::new();
        for (index, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != n {
                errors.push((
                    index + 1,
                    format!("expected {n} outcomes, found {}", fields.len()),
                ));
                continue;
            }
            match parse_outcomes(&fields, header.max_outcome) {
                Ok(shot) => outcomes.extend(shot),
                Err(msg) => errors.push((index + 1, msg)),
            }
        }
        if !errors.is_empty() {
            return Err(Error::Rows(errors));
        }
        Self::new(n, header.max_outcome as usize + 1, outcomes, header.seed)
    }
}

fn header_line(detectors: usize, outcome_count: usize, seed: Option<u64>) -> String {
    let seed = seed.map_or_else(|| "none".to_string(), |s| s.to_string());
    format!("N={detectors} K={} seed={seed}\n", outcome_count - 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct RecordsHeader {
    pub detectors: usize,
    pub max_outcome: u16,
    pub seed: Option<u64>,
}

/// Parses `N=<int> K=<int> seed=<int|none>`.
pub(crate) fn parse_header(line: &str) -> Result<RecordsHeader> {
    let bad = |message: String| Error::Parse { line: 1, message };
    let fields: Vec<&str> = line.split_whitespace().collect();
    let [n, k, seed] = fields.as_slice() else {
        return Err(bad(format!(
            "expected header 'N=<int> K=<int> seed=<int|none>', found '{line}'"
        )));
    };
    let value = |field: &str, key: &str| -> Result<String> {
        field
            .strip_prefix(key)
            .and_then(|v| v.strip_prefix('='))
            .map(str::to_string)
            .ok_or_else(|| bad(format!("expected '{key}=…', found '{field}'")))
    };
    let detectors: usize = value(n, "N")?
        .parse()
        .map_err(|_| bad(format!("invalid detector count in '{n}'")))?;
    let max_outcome: u16 = value(k, "K")?
        .parse()
        .map_err(|_| bad(format!("invalid outcome bound in '{k}'")))?;
    let seed = match value(seed, "seed")?.as_str() {
        "none" => None,
        s => Some(s.parse().map_err(|_| bad(format!("invalid seed '{s}'")))?),
    };
    if detectors < 2 || max_outcome < 1 {
        return Err(bad("need N >= 2 and K >= 1".into()));
    }
    Ok(RecordsHeader {
        detectors,
        max_outcome,
        seed,
    })
}

fn parse_outcomes(fields: &[&str], max_outcome: u16) -> std::result::Result<Vec<u16>, String> {
    fields
        .iter()
        .map(|tok| {
            let k: u64 = tok
                .parse()
                .map_err(|_| format!("'{tok}' is not a nonnegative integer"))?;
            if k > max_outcome as u64 {
                return Err(format!("outcome {k} outside 0..={max_outcome}"));
            }
            Ok(k as u16)
        })
        .collect()
}

/// How raw per-shot rows map onto detector outcomes.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IngestMapping {
    /// Zero-based columns holding the detector outcomes, in detector order.
    /// All columns are used when absent.
    pub columns: Option<Vec<usize>>,
    /// Largest valid outcome `K`; required unless the input has a records header.
    pub max_outcome: Option<u16>,
}

/// Validates a raw per-shot file into records. Blank lines and `#` comments
/// are skipped. A leading records header supplies `N`, `K` and the seed.
/// All rejected rows are collected and reported together.
pub fn ingest_records(text: &str, mapping: &IngestMapping) -> Result<ShotRecords> {
    let mut content = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .peekable();

    let mut header = None;
    if let Some((index, first)) = content.peek() {
        if first.trim_start().starts_with("N=") {
            header = Some(parse_header(first).map_err(|e| match e {
                Error::Parse { message, .. } => Error::Parse {
                    line: index + 1,
                    message,
                },
                other => other,
            })?);
            content.next();
        }
    }
    let max_outcome = header
        .map(|h| h.max_outcome)
        .or(mapping.max_outcome)
        .ok_or_else(|| {
            Error::InvalidParameter("outcome bound K is required for headerless input".into())
        })?;

    let mut detectors = match (&mapping.columns, header) {
        (Some(cols), _) => Some(cols.len()),
        (None, Some(h)) => Some(h.detectors),
        (None, None) => None,
    };
    let mut outcomes = Vec::new();
    let mut errors = Vec::new();
    for (index, line) in content {
        let fields: Vec<&str> = line.split_whitespace().collect();
        let selected: Vec<&str> = match &mapping.columns {
            Some(cols) => {
                if let Some(&missing) = cols.iter().find(|&&c| c >= fields.len()) {
                    errors.push((
                        index + 1,
                        format!(
                            "column {missing} missing ({} columns present)",
                            fields.len()
                        ),
                    ));
                    continue;
                }
                cols.iter().map(|&c| fields[c]).collect()
            }
            None => fields,
        };
        let n = *detectors.get_or_insert(selected.len());
        if selected.len() != n {
            errors.push((
                index + 1,
                format!("expected {n} outcomes, found {}", selected.len()),
            ));
            continue;
        }
        match parse_outcomes(&selected, max_outcome) {
            Ok(shot) => outcomes.extend(shot),
            Err(msg) => errors.push((index + 1, msg)),
        }
    }
    if !errors.is_empty() {
        return Err(Error::Rows(errors));
    }
    let detectors = detectors
        .ok_or_else(|| Error::InvalidParameter("input contains no shots and no header".into()))?;
    ShotRecords::new(
        detectors,
        max_outcome as usize + 1,
        outcomes,
        header.and_then(|h| h.seed),
    )
}

/// Draws `shots` i.i.d. configurations from `stats` and assigns their
/// outcomes to detector labels in uniformly random order.
///
/// Shot `i` uses its own ChaCha stream (`i`) under the key derived from
/// `seed`, so the output is identical for any number of worker threads.
pub fn sample_records(stats: &ClickStatistics, shots: usize, seed: u64) -> Result<ShotRecords> {
    if shots == 0 {
        return Err(Error::TooFewShots {
            required: 1,
            found: 0,
        });
    }
    let n = stats.detector_count() as usize;
    let mut cumulative = Vec::new();
    let mut tuples: Vec<Vec<u16>> = Vec::new();
    let mut running = 0.0;
    for (config, p) in stats.iter() {
        if p <= 0.0 {
            continue;
        }
        running += p;
        cumulative.push(running);
        let mut tuple = Vec::with_capacity(n);
        for (k, &count) in config.counts().iter().enumerate() {
            tuple.extend(std::iter::repeat_n(k as u16, count as usize));
        }
        tuples.push(tuple);
    }
    let base = ChaCha8Rng::seed_from_u64(seed);
    let mut outcomes = vec![0u16; shots * n];
    outcomes
        .par_chunks_mut(n)
        .enumerate()
        .for_each(|(shot, slot)| {
            let mut rng = base.clone();
            rng.set_stream(shot as u64);
            let u: f64 = rng.random::<f64>() * running;
            let index = cumulative
                .partition_point(|&c| c <= u)
                .min(tuples.len() - 1);
            slot.copy_from_slice(&tuples[index]);
            slot.shuffle(&mut rng);
        });
    ShotRecords::new(n, stats.outcome_count(), outcomes, Some(seed))
}

/// Tallies each shot's configuration.
pub fn configuration_counts(records: &ShotRecords) -> BTreeMap<ClickConfiguration, u64> {
    let mut counts = BTreeMap::new();
    for shot in records.shots() {
        let config = ClickConfiguration::from_outcomes(shot, records.outcome_count())
            .expect("records hold validated outcomes");
        *counts.entry(config).or_insert(0) += 1;
    }
    counts
}

/// Empirical click statistics: relative frequency of each configuration.
pub fn configurations_from_records(records: &ShotRecords) -> Result<ClickStatistics> {
    let total = records.shot_count();
    if total == 0 {
        return Err(Error::TooFewShots {
            required: 1,
            found: 0,
        });
    }
    let table = configuration_counts(records)
        .into_iter()
        .map(|(c, n)| (c, n as f64 / total as f64))
        .collect();
    ClickStatistics::new(
        records.detector_count() as u32,
        records.outcome_count(),
        table,
    )
}
