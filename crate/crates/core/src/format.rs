//! Structured-text serialization of statistics tables, witness reports and
//! scan tables. Real numbers are printed with 12 significant digits.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::error::{Error, Result};
use crate::estimation::EstimatedWitness;
use crate::multinomial::ClickConfiguration;
use crate::scan::{ScanModel, ScanPoint};
use crate::statistics::ClickStatistics;
use crate::witness::WitnessReport;

pub const SIGNIFICANT_DIGITS: usize = 12;

/// Placeholder for undefined table cells.
pub const MISSING: &str = "NA";

/// Minimum margin for verdicts on statistics read from text: rounding every
/// probability to 12 digits perturbs exact zeros of `M` at about this size.
pub const STATISTICS_FILE_MARGIN: f64 = 1e-9;

/// Comment line identifying the producing version. Readers ignore it.
pub fn version_line() -> String {
    format!("# click-witness {}\n", env!("CARGO_PKG_VERSION"))
}

/// Rounds to 12 significant digits and prints the shortest round-trip form,
/// e.g. `1.0`, `0.25`, `-2.0`, `1.5e-7`. Negative zero prints as `0.0`.
pub fn number(x: f64) -> String {
    if !x.is_finite() {
        return MISSING.to_string();
    }
    let rounded: f64 = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .unwrap_or(x);
    let rounded = if rounded == 0.0 { 0.0 } else { rounded };
    format!("{rounded:?}")
}

fn numbers<'a>(values: impl IntoIterator<Item = &'a f64>) -> String {
    values
        .into_iter()
        .map(|&v| number(v))
        .collect::<Vec<_>>()
        .join(" ")
}

fn optional(x: Option<f64>) -> String {
    x.map_or_else(|| MISSING.to_string(), number)
}

/// What a witness input file holds, judged by its first line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputKind {
    Statistics,
    Records,
}

impl InputKind {
    pub fn detect(text: &str) -> Result<Self> {
        let first = text.lines().next().unwrap_or("").trim_start();
        if first.starts_with("statistics") {
            Ok(Self::Statistics)
        } else if first.starts_with("N=") {
            Ok(Self::Records)
        } else {
            Err(Error::Parse {
                line: 1,
                message: "unrecognized input: expected a 'statistics N=.. K=..' or \
                          'N=.. K=.. seed=..' header"
                    .into(),
            })
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Statistics => "statistics",
            Self::Records => "records",
        }
    }
}

/// Header `statistics N=<N> K=<K>`, version line, then `N_0 … N_K probability`
/// for every configuration of nonzero probability in lexicographic order.
pub fn statistics_to_text(stats: &ClickStatistics) -> String {
    let mut out = format!(
        "statistics N={} K={}\n",
        stats.detector_count(),
        stats.outcome_count() - 1
    );
    out.push_str(&version_line());
    for (config, prob) in stats.iter() {
        if prob > 0.0 {
            let _ = writeln!(out, "{config} {}", number(prob));
        }
    }
    out
}

pub fn statistics_from_text(text: &str) -> Result<ClickStatistics> {
    let mut lines = text.lines().enumerate();
    let header = lines.next().map(|(_, l)| l).unwrap_or("");
    let (n, k) = parse_statistics_header(header)?;
    let width = k as usize + 2;
    let mut table = BTreeMap::new();
    let mut errors = Vec::new();
    for (index, line) in lines {
        let line_no = index + 1;
        let content = line.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields.len() != width {
            errors.push((
                line_no,
                format!(
                    "expected {} counts and a probability, found {} fields",
                    width - 1,
                    fields.len()
                ),
            ));
            continue;
        }
        let counts: std::result::Result<Vec<u32>, _> = fields[..width - 1]
            .iter()
            .map(|f| f.parse::<u32>())
            .collect();
        let prob = fields[width - 1].parse::<f64>();
        match (counts, prob) {
            (Ok(counts), Ok(prob)) => {
                let config = ClickConfiguration::new(counts);
                if config.total() != n {
                    errors.push((
                        line_no,
                        format!("counts sum to {}, expected {n}", config.total()),
                    ));
                } else if !(prob.is_finite() && prob >= 0.0) {
                    errors.push((
                        line_no,
                        format!("invalid probability '{}'", fields[width - 1]),
                    ));
                } else if table.insert(config, prob).is_some() {
                    errors.push((line_no, "duplicate configuration".into()));
                }
            }
            _ => errors.push((line_no, format!("unparseable row '{content}'"))),
        }
    }
    if !errors.is_empty() {
        return Err(Error::Rows(errors));
    }
    ClickStatistics::new(n, k as usize + 1, table)
}

fn parse_statistics_header(line: &str) -> Result<(u32, u32)> {
    let bad = || Error::Parse {
        line: 1,
        message: format!("expected header 'statistics N=<int> K=<int>', found '{line}'"),
    };
    let fields: Vec<&str> = line.split_whitespace().collect();
    let ["statistics", n, k] = fields.as_slice() else {
        return Err(bad());
    };
    let n = n
        .strip_prefix("N=")
        .and_then(|v| v.parse().ok())
        .ok_or_else(bad)?;
    let k = k
        .strip_prefix("K=")
        .and_then(|v| v.parse().ok())
        .ok_or_else(bad)?;
    Ok((n, k))
}

/// `key = value` report of a witness evaluation. Estimation fields appear
/// only for records input.
pub fn witness_report_text(
    source: InputKind,
    detector_count: u32,
    report: &WitnessReport,
    estimate: Option<&EstimatedWitness>,
) -> String {
    let dim = report.dimension();
    let mut out = format!("witness N={detector_count} K={}\n", dim - 1);
    out.push_str(&version_line());
    let _ = writeln!(out, "source = {}", source.as_str());
    for (row, values) in report.matrix_m.row_iter().enumerate() {
        let _ = writeln!(out, "M[{row}] = {}", numbers(values.iter()));
    }
    let _ = writeln!(out, "eigenvalues = {}", numbers(&report.eigenvalues));
    let _ = writeln!(out, "min_eigenvalue = {}", number(report.min_eigenvalue));
    let _ = writeln!(
        out,
        "min_eigenvector = {}",
        numbers(report.min_eigenvector.iter())
    );
    if let Some(est) = estimate {
        let _ = writeln!(out, "shots = {}", est.shot_count);
        let _ = writeln!(out, "bootstrap_resamples = {}", est.bootstrap_resamples);
        let _ = writeln!(out, "confidence = {}", number(est.confidence));
        let _ = writeln!(out, "stderr = {}", optional(report.min_eigenvalue_stderr));
        let _ = writeln!(out, "ci_low = {}", number(est.ci_low));
        let _ = writeln!(out, "ci_high = {}", number(est.ci_high));
        if let Some(shift) = est.systematic_shift {
            let _ = writeln!(out, "systematic_shift = {}", number(shift));
        }
    }
    let _ = writeln!(out, "verdict = {}", report.verdict);
    out
}

/// Scan table: header line with the fixed parameters, version line, column
/// names, then one row per point. `lambda` is a column when the scan varies
/// it and a header field otherwise.
pub fn scan_table_text(
    kind: &str,
    model: &ScanModel,
    fixed_lambda: Option<f64>,
    points: &[ScanPoint],
) -> String {
    let with_estimates = points.iter().any(|p| p.estimate.is_some());
    let mut out = format!(
        "{kind} N={} K={}",
        model.tree.n_detectors(),
        model.response.outcome_count() - 1
    );
    if let Some(lambda) = fixed_lambda {
        let _ = write!(out, " lambda={}", number(lambda));
    }
    let _ = writeln!(
        out,
        " herald_efficiency={} n_max={}",
        number(model.herald_efficiency),
        model.n_max
    );
    out.push_str(&version_line());

    let mut columns = Vec::new();
    if fixed_lambda.is_none() {
        columns.push("lambda");
    }
    columns.extend(["bin", "herald_probability", "min_eigenvalue"]);
    if with_estimates {
        columns.extend([
            "estimate",
            "stderr",
            "ci_low",
            "ci_high",
            "systematic_shift",
        ]);
    }
    columns.push("verdict");
    out.push_str(&columns.join(" "));
    out.push('\n');

    for p in points {
        let mut cells = Vec::with_capacity(columns.len());
        if fixed_lambda.is_none() {
            cells.push(number(p.lambda));
        }
        cells.push(p.bin.to_string());
        cells.push(number(p.herald_probability));
        cells.push(optional(p.min_eigenvalue()));
        if with_estimates {
            let est = p.estimate.as_ref();
            cells.push(optional(est.map(|e| e.report.min_eigenvalue)));
            cells.push(optional(est.and_then(|e| e.report.min_eigenvalue_stderr)));
            cells.push(optional(est.map(|e| e.ci_low)));
            cells.push(optional(est.map(|e| e.ci_high)));
            cells.push(optional(est.and_then(|e| e.systematic_shift)));
        }
        let verdict = match (&p.estimate, &p.exact) {
            (Some(est), _) => est.report.verdict.as_str(),
            (None, Some(exact)) => exact.verdict.as_str(),
            (None, None) => MISSING,
        };
        cells.push(verdict.to_string());
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    out
}
