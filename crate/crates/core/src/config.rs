//! Flat `section.key = value` experiment configuration.
//!
//! ```text
//! # heralded two-photon state on a balanced pair of PNR detectors
//! state.kind = heralded
//! state.lambda = 0.25
//! state.herald_efficiency = 0.98
//! state.herald_bin = 2
//! detector.kind = pnr
//! detector.efficiency = 1.0
//! detector.saturation_bin = 7
//! tree.detectors = 2
//! tree.ratios = uniform
//! truncation.n_max = 40
//! estimation.shots = 100000
//! estimation.seed = 7
//! scan.herald_bins = 0-5
//! scan.lambdas = 0.05 0.1 0.15
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::estimation::{DEFAULT_BOOTSTRAP_RESAMPLES, DEFAULT_CONFIDENCE};
use crate::photon::{
    click_statistics_from_state, coherent_statistics, fock_statistics, heralded_statistics,
    pnr_response, thermal_statistics, DetectorResponse, PhotonStatistics, SplittingTree,
    TwoModeSqueezedVacuum, DEFAULT_TAIL_TOL,
};
use crate::statistics::ClickStatistics;

pub const DEFAULT_N_MAX: usize = 40;
pub const DEFAULT_SATURATION_BIN: usize = 7;

const KNOWN_KEYS: &[&str] = &[
    "state.kind",
    "state.mean",
    "state.photons",
    "state.lambda",
    "state.r",
    "state.herald_efficiency",
    "state.herald_bin",
    "detector.kind",
    "detector.efficiency",
    "detector.saturation_bin",
    "detector.path",
    "tree.detectors",
    "tree.ratios",
    "truncation.n_max",
    "truncation.tail_tol",
    "estimation.shots",
    "estimation.seed",
    "estimation.bootstrap",
    "estimation.confidence",
    "estimation.imbalance",
    "scan.herald_bins",
    "scan.lambdas",
];

#[derive(Debug, Clone, PartialEq)]
pub enum StateSpec {
    Coherent {
        mean: f64,
    },
    Thermal {
        mean: f64,
    },
    Fock {
        photons: usize,
    },
    Heralded {
        source: TwoModeSqueezedVacuum,
        herald_efficiency: f64,
        herald_bin: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum DetectorSpec {
    Pnr {
        efficiency: f64,
        saturation_bin: usize,
    },
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimationSpec {
    pub shots: Option<usize>,
    pub seed: u64,
    pub bootstrap: usize,
    pub confidence: f64,
    pub imbalance: Option<f64>,
}

impl Default for EstimationSpec {
    fn default() -> Self {
        Self {
            shots: None,
            seed: 0,
            bootstrap: DEFAULT_BOOTSTRAP_RESAMPLES,
            confidence: DEFAULT_CONFIDENCE,
            imbalance: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanSpec {
    pub herald_bins: Vec<usize>,
    pub lambdas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub state: Option<StateSpec>,
    pub detector: DetectorSpec,
    pub detectors: usize,
    pub ratios: Option<Vec<f64>>,
    pub n_max: usize,
    pub tail_tol: f64,
    pub estimation: EstimationSpec,
    pub scan: ScanSpec,
}

impl ExperimentConfig {
    /// Parses configuration text. Relative file paths resolve against `base`.
    pub fn parse(text: &str, base: Option<&Path>) -> Result<Self> {
        let entries = parse_entries(text)?;
        let get = |key: &str| entries.get(key).map(|(line, v)| (*line, v.as_str()));

        let state = match get("state.kind") {
            None => None,
            Some((line, kind)) => Some(parse_state(kind, line, &get)?),
        };

        let detector = match get("detector.kind") {
            None | Some((_, "pnr")) => DetectorSpec::Pnr {
                efficiency: number(get("detector.efficiency"))?.unwrap_or(1.0),
                saturation_bin: integer(get("detector.saturation_bin"))?
                    .unwrap_or(DEFAULT_SATURATION_BIN),
            },
            Some((line, "file")) => {
                let (_, path) = get("detector.path").ok_or(Error::Parse {
                    line,
                    message: "detector.kind = file requires detector.path".into(),
                })?;
                let path = PathBuf::from(path);
                DetectorSpec::File(match base {
                    Some(dir) if path.is_relative() => dir.join(path),
                    _ => path,
                })
            }
            Some((line, other)) => {
                return Err(Error::Parse {
                    line,
                    message: format!("unknown detector kind '{other}' (expected pnr or file)"),
                })
            }
        };

        let detectors = integer(get("tree.detectors"))?.unwrap_or(2);
        let ratios = match get("tree.ratios") {
            None | Some((_, "uniform")) => None,
            Some((line, list)) => {
                let ratios = parse_list::<f64>(list, line)?;
                if get("tree.detectors").is_some() && ratios.len() != detectors {
                    return Err(Error::Parse {
                        line,
                        message: format!("{} ratios given for {detectors} detectors", ratios.len()),
                    });
                }
                Some(ratios)
            }
        };
        let detectors = ratios.as_ref().map_or(detectors, Vec::len);

        let defaults = EstimationSpec::default();
        let estimation = EstimationSpec {
            shots: integer(get("estimation.shots"))?,
            seed: integer::<u64>(get("estimation.seed"))?.unwrap_or(defaults.seed),
            bootstrap: integer(get("estimation.bootstrap"))?.unwrap_or(defaults.bootstrap),
            confidence: number(get("estimation.confidence"))?.unwrap_or(defaults.confidence),
            imbalance: number(get("estimation.imbalance"))?,
        };

        let herald_bins = match get("scan.herald_bins") {
            None => (0..=5).collect(),
            Some((line, v)) => parse_bins(v, line)?,
        };
        let lambdas = match get("scan.lambdas") {
            None => (1..=10).map(|i| i as f64 * 0.05).collect(),
            Some((line, v)) => parse_list::<f64>(v, line)?,
        };

        Ok(Self {
            state,
            detector,
            detectors,
            ratios,
            n_max: integer(get("truncation.n_max"))?.unwrap_or(DEFAULT_N_MAX),
            tail_tol: number(get("truncation.tail_tol"))?.unwrap_or(DEFAULT_TAIL_TOL),
            estimation,
            scan: ScanSpec {
                herald_bins,
                lambdas,
            },
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text, path.parent())
    }

    pub fn tree(&self) -> Result<SplittingTree> {
        match &self.ratios {
            Some(r) => SplittingTree::new(r.clone()),
            None => SplittingTree::uniform(self.detectors),
        }
    }

    /// Detector response covering photon numbers up to `n_max`.
    pub fn response(&self) -> Result<DetectorResponse> {
        match &self.detector {
            DetectorSpec::Pnr {
                efficiency,
                saturation_bin,
            } => pnr_response(self.n_max, *saturation_bin, *efficiency),
            DetectorSpec::File(path) => DetectorResponse::load(path),
        }
    }

    pub fn state_spec(&self) -> Result<&StateSpec> {
        self.state
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter("configuration has no state.kind".into()))
    }

    /// Photon statistics of the configured state and, for heralded states,
    /// the heralding probability.
    pub fn photon_statistics(&self) -> Result<(PhotonStatistics, Option<f64>)> {
        let n_max = self.n_max;
        let tol = self.tail_tol;
        Ok(match self.state_spec()? {
            StateSpec::Coherent { mean } => (coherent_statistics(*mean, n_max, tol)?, None),
            StateSpec::Thermal { mean } => (thermal_statistics(*mean, n_max, tol)?, None),
            StateSpec::Fock { photons } => (fock_statistics(*photons), None),
            StateSpec::Heralded {
                source,
                herald_efficiency,
                herald_bin,
            } => {
                let (state, p) =
                    heralded_statistics(source, *herald_efficiency, *herald_bin, n_max, tol)?;
                (state, Some(p))
            }
        })
    }

    pub fn click_statistics(&self) -> Result<ClickStatistics> {
        let (state, _) = self.photon_statistics()?;
        click_statistics_from_state(&state, &self.tree()?, &self.response()?)
    }

    /// Source and herald efficiency for scans; requires a heralded state
    /// (its `herald_bin` is ignored).
    pub fn heralding(&self) -> Result<(TwoModeSqueezedVacuum, f64)> {
        match self.state_spec()? {
            StateSpec::Heralded {
                source,
                herald_efficiency,
                ..
            } => Ok((*source, *herald_efficiency)),
            _ => Err(Error::InvalidParameter(
                "scans require state.kind = heralded".into(),
            )),
        }
    }
}

type Entries = BTreeMap<String, (usize, String)>;

fn parse_entries(text: &str) -> Result<Entries> {
    let mut entries = Entries::new();
    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| Error::Parse {
            line,
            message: format!("expected 'section.key = value', found '{content}'"),
        })?;
        let key = key.trim();
        let value = value.trim();
        if !KNOWN_KEYS.contains(&key) {
            return Err(Error::Parse {
                line,
                message: format!("unknown key '{key}'"),
            });
        }
        if value.is_empty() {
            return Err(Error::Parse {
                line,
                message: format!("key '{key}' has no value"),
            });
        }
        if entries
            .insert(key.to_string(), (line, value.to_string()))
            .is_some()
        {
            return Err(Error::Parse {
                line,
                message: format!("duplicate key '{key}'"),
            });
        }
    }
    Ok(entries)
}

fn parse_state<'a>(
    kind: &str,
    line: usize,
    get: &impl Fn(&str) -> Option<(usize, &'a str)>,
) -> Result<StateSpec> {
    let require = |key: &str| -> Result<(usize, &'a str)> {
        get(key).ok_or(Error::Parse {
            line,
            message: format!("state.kind = {kind} requires {key}"),
        })
    };
    Ok(match kind {
        "coherent" => StateSpec::Coherent {
            mean: number(Some(require("state.mean")?))?.unwrap_or_default(),
        },
        "thermal" => StateSpec::Thermal {
            mean: number(Some(require("state.mean")?))?.unwrap_or_default(),
        },
        "fock" => StateSpec::Fock {
            photons: integer(Some(require("state.photons")?))?.unwrap_or_default(),
        },
        "heralded" => {
            let source = match (get("state.lambda"), get("state.r")) {
                (Some(l), None) => {
                    TwoModeSqueezedVacuum::from_lambda(number(Some(l))?.unwrap_or_default())
                }
                (None, Some(r)) => {
                    TwoModeSqueezedVacuum::from_squeezing(number(Some(r))?.unwrap_or_default())
                }
                _ => {
                    return Err(Error::Parse {
                        line,
                        message: "heralded state needs exactly one of state.lambda, state.r".into(),
                    })
                }
            }?;
            StateSpec::Heralded {
                source,
                herald_efficiency: number(get("state.herald_efficiency"))?.unwrap_or(1.0),
                herald_bin: integer(get("state.herald_bin"))?.unwrap_or(0),
            }
        }
        other => {
            return Err(Error::Parse {
                line,
                message: format!(
                    "unknown state kind '{other}' (expected coherent, thermal, fock or heralded)"
                ),
            })
        }
    })
}

fn number(entry: Option<(usize, &str)>) -> Result<Option<f64>> {
    entry
        .map(|(line, v)| {
            v.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::Parse {
                    line,
                    message: format!("'{v}' is not a finite number"),
                })
        })
        .transpose()
}

fn integer<T: std::str::FromStr>(entry: Option<(usize, &str)>) -> Result<Option<T>> {
    entry
        .map(|(line, v)| {
            v.parse::<T>().map_err(|_| Error::Parse {
                line,
                message: format!("'{v}' is not a nonnegative integer"),
            })
        })
        .transpose()
}

fn parse_list<T: std::str::FromStr>(value: &str, line: usize) -> Result<Vec<T>> {
    value
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|tok| {
            tok.parse::<T>().map_err(|_| Error::Parse {
                line,
                message: format!("invalid list entry '{tok}'"),
            })
        })
        .collect()
}

/// Accepts `a-b` ranges and explicit lists, e.g. `0-5` or `0 2 4`.
pub fn parse_bins(value: &str, line: usize) -> Result<Vec<usize>> {
    if let Some((lo, hi)) = value.split_once('-') {
        let lo: usize = integer(Some((line, lo.trim())))?.unwrap_or_default();
        let hi: usize = integer(Some((line, hi.trim())))?.unwrap_or_default();
        if lo > hi {
            return Err(Error::Parse {
                line,
                message: format!("empty bin range '{value}'"),
            });
        }
        return Ok((lo..=hi).collect());
    }
    parse_list(value, line)
}
