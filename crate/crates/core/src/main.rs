use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use click_witness::config::{parse_bins, ExperimentConfig};
use click_witness::estimation::{
    estimate_witness, estimate_witness_seeded, ingest_records, sample_records, IngestMapping,
    ShotRecords,
};
use click_witness::format::{
    scan_table_text, statistics_from_text, statistics_to_text, witness_report_text, InputKind,
    STATISTICS_FILE_MARGIN,
};
use click_witness::photon::TwoModeSqueezedVacuum;
use click_witness::scan::{EstimationSettings, ScanModel};
use click_witness::witness::witness_from_moments;
use click_witness::{Error, Verdict};

/// Certify nonclassical light from multiplexed click-counting statistics.
///
/// Exit codes: 0 success (witness: nonclassical), 1 witness verdict
/// consistent-with-classical, 2 invalid input or configuration, 3 photon-number
/// truncation failure, 4 internal consistency failure.
#[derive(Parser)]
#[command(name = "click-witness", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact click statistics of the configured state and detectors.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Witness matrix, spectrum and verdict for a statistics or records file.
    Witness {
        /// Statistics or records file; the kind is detected from its header.
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Draw shot records from configured or tabulated statistics.
    Sample {
        /// Experiment configuration (alternative to --stats).
        #[arg(long, conflicts_with = "stats", required_unless_present = "stats")]
        config: Option<PathBuf>,
        /// Statistics file written by `simulate`.
        #[arg(long)]
        stats: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Exact minimal eigenvalue per heralding bin at fixed squeezing.
    HeraldScan {
        #[arg(long)]
        config: PathBuf,
        /// Heralding bins, e.g. `0-5` or `1,3` (overrides scan.herald_bins).
        #[arg(long)]
        bins: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Exact minimal eigenvalue over a grid of squeezing λ and heralding bins.
    PowerScan {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        bins: Option<String>,
        /// Comma-separated λ values (overrides scan.lambdas).
        #[arg(long, value_delimiter = ',')]
        lambdas: Option<Vec<f64>>,
        #[command(flatten)]
        common: Common,
    },
    /// Validate a raw per-shot outcome file into the records format.
    Ingest {
        input: PathBuf,
        /// One-based columns holding detector outcomes, in detector order.
        #[arg(long, value_delimiter = ',')]
        columns: Option<Vec<usize>>,
        /// Largest valid outcome K (required without a records header).
        #[arg(long)]
        max_outcome: Option<u16>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// Output file (standard output when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    shots: Option<usize>,
    #[arg(long)]
    bootstrap: Option<usize>,
    #[arg(long)]
    confidence: Option<f64>,
    #[arg(long)]
    tail_tol: Option<f64>,
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Truncation { .. } => 3,
        Error::Consistency(_) => 4,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("click-witness: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn read(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_config(path: &Path, common: &Common) -> Result<ExperimentConfig, Error> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(tol) = common.tail_tol {
        cfg.tail_tol = tol;
    }
    let est = &mut cfg.estimation;
    if common.shots.is_some() {
        est.shots = common.shots;
    }
    if let Some(seed) = common.seed {
        est.seed = seed;
    }
    if let Some(b) = common.bootstrap {
        est.bootstrap = b;
    }
    if let Some(c) = common.confidence {
        est.confidence = c;
    }
    Ok(cfg)
}

fn run(command: Command) -> Result<u8, Error> {
    match command {
        Command::Simulate { config, common } => {
            let cfg = load_config(&config, &common)?;
            let stats = cfg.click_statistics()?;
            emit(common.out.as_deref(), &statistics_to_text(&stats))?;
            Ok(0)
        }
        Command::Witness { input, common } => witness(&input, &common),
        Command::Sample {
            config,
            stats,
            common,
        } => {
            let (table, shots, seed) = match (config, stats) {
                (Some(path), _) => {
                    let cfg = load_config(&path, &common)?;
                    let est = &cfg.estimation;
                    (cfg.click_statistics()?, est.shots, est.seed)
                }
                (None, Some(path)) => (
                    statistics_from_text(&read(&path)?)?,
                    common.shots,
                    common.seed.unwrap_or(0),
                ),
                (None, None) => unreachable!("clap requires --config or --stats"),
            };
            let shots = shots.ok_or_else(|| {
                Error::InvalidParameter("shot count missing: pass --shots".into())
            })?;
            let records = sample_records(&table, shots, seed)?;
            emit(common.out.as_deref(), &records.to_text())?;
            Ok(0)
        }
        Command::HeraldScan {
            config,
            bins,
            common,
        } => {
            let cfg = load_config(&config, &common)?;
            let (source, model) = scan_model(&cfg)?;
            let bins = match bins {
                Some(b) => parse_bins(&b, 0)?,
                None => cfg.scan.herald_bins.clone(),
            };
            let settings = estimation_settings(&cfg);
            let points = model.herald_scan(&source, &bins, settings.as_ref())?;
            let text = scan_table_text("herald-scan", &model, Some(source.lambda()), &points);
            emit(common.out.as_deref(), &text)?;
            Ok(0)
        }
        Command::PowerScan {
            config,
            bins,
            lambdas,
            common,
        } => {
            let cfg = load_config(&config, &common)?;
            let (_, model) = scan_model(&cfg)?;
            let bins = match bins {
                Some(b) => parse_bins(&b, 0)?,
                None => cfg.scan.herald_bins.clone(),
            };
            let lambdas = lambdas.unwrap_or_else(|| cfg.scan.lambdas.clone());
            let settings = estimation_settings(&cfg);
            let points = model.power_scan(&lambdas, &bins, settings.as_ref())?;
            let text = scan_table_text("power-scan", &model, None, &points);
            emit(common.out.as_deref(), &text)?;
            Ok(0)
        }
        Command::Ingest {
            input,
            columns,
            max_outcome,
            out,
        } => {
            let columns = columns
                .map(|cols| {
                    cols.into_iter()
                        .map(|c| {
                            c.checked_sub(1).ok_or_else(|| {
                                Error::InvalidParameter("columns are numbered from 1".into())
                            })
                        })
                        .collect::<Result<Vec<_>, _>>()
                })
                .transpose()?;
            let mapping = IngestMapping {
                columns,
                max_outcome,
            };
            let records = ingest_records(&read(&input)?, &mapping)?;
            emit(out.as_deref(), &records.to_text())?;
            Ok(0)
        }
    }
}

fn witness(input: &Path, common: &Common) -> Result<u8, Error> {
    let text = read(input)?;
    let kind = InputKind::detect(&text)?;
    let (detectors, report, estimate) = match kind {
        InputKind::Statistics => {
            let stats = statistics_from_text(&text)?;
            let report = witness_from_moments(&stats.moments(), stats.detector_count())?;
            let margin = STATISTICS_FILE_MARGIN * report.matrix_m.amax().max(1.0);
            (stats.detector_count(), report.with_margin(margin), None)
        }
        InputKind::Records => {
            let records = ShotRecords::from_text(&text)?;
            let bootstrap = common
                .bootstrap
                .unwrap_or(click_witness::estimation::DEFAULT_BOOTSTRAP_RESAMPLES);
            let confidence = common
                .confidence
                .unwrap_or(click_witness::estimation::DEFAULT_CONFIDENCE);
            let est = match common.seed {
                Some(seed) => estimate_witness_seeded(&records, bootstrap, confidence, seed)?,
                None => estimate_witness(&records, bootstrap, confidence)?,
            };
            (
                records.detector_count() as u32,
                est.report.clone(),
                Some(est),
            )
        }
    };
    let text = witness_report_text(kind, detectors, &report, estimate.as_ref());
    emit(common.out.as_deref(), &text)?;
    Ok(match report.verdict {
        Verdict::Nonclassical => 0,
        Verdict::ConsistentWithClassical => 1,
    })
}

fn scan_model(cfg: &ExperimentConfig) -> Result<(TwoModeSqueezedVacuum, ScanModel), Error> {
    let (source, herald_efficiency) = cfg.heralding()?;
    let model = ScanModel {
        herald_efficiency,
        tree: cfg.tree()?,
        response: cfg.response()?,
        n_max: cfg.n_max,
        tail_tol: cfg.tail_tol,
    };
    Ok((source, model))
}

fn estimation_settings(cfg: &ExperimentConfig) -> Option<EstimationSettings> {
    let est = &cfg.estimation;
    est.shots.map(|shots| EstimationSettings {
        shots,
        seed: est.seed,
        bootstrap: est.bootstrap,
        confidence: est.confidence,
        imbalance: est.imbalance,
    })
}
