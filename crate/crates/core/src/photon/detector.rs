//! Detector response maps `R(k|m)`: the probability that a detector which
//! absorbs `m` photons reports outcome bin `k`.

use std::path::Path;

use crate::error::{Error, Result};
use crate::multinomial::{binomial_pmf, PROBABILITY_TOL};

/// Row-stochastic response matrix; row `m` is the outcome law for `m`
/// incident photons.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorResponse {
    rows: Vec<Vec<f64>>,
}

impl DetectorResponse {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let width = rows
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::InvalidParameter("response matrix has no rows".into()))?;
        if width < 2 {
            return Err(Error::InvalidParameter(format!(
                "response matrix needs at least 2 outcome bins, got {width}"
            )));
        }
        for (m, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(Error::DimensionMismatch {
                    expected: width,
                    found: row.len(),
                });
            }
            if row.iter().any(|r| !r.is_finite() || *r < 0.0) {
                return Err(Error::InvalidProbabilities(format!(
                    "response row {m} has a negative or non-finite entry"
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > PROBABILITY_TOL {
                return Err(Error::InvalidProbabilities(format!(
                    "response row {m} sums to {sum}"
                )));
            }
        }
        Ok(Self { rows })
    }

    /// Largest photon number covered by the matrix.
    pub fn max_photons(&self) -> usize {
        self.rows.len() - 1
    }

    /// Number of outcome bins, `K + 1`.
    pub fn outcome_count(&self) -> usize {
        self.rows[0].len()
    }

    /// Outcome law for `photons` absorbed photons.
    pub fn row(&self, photons: usize) -> &[f64] {
        &self.rows[photons]
    }

    pub fn probability(&self, outcome: usize, photons: usize) -> f64 {
        self.rows[photons][outcome]
    }

    /// Parses whitespace-separated rows (one per photon number). Blank lines
    /// and lines starting with `#` are skipped.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (index, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>().map_err(|_| Error::Parse {
                        line: index + 1,
                        message: format!("'{tok}' is not a number"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Self::new(rows)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_text(&text)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Photon-number-resolving detector with efficiency `η` that saturates at
/// bin `K`: `R(k|m) = Σ_{d : min(d, K) = k} C(m,d) η^d (1−η)^{m−d}`.
pub fn pnr_response(
    max_photons: usize,
    saturation_bin: usize,
    efficiency: f64,
) -> Result<DetectorResponse> {
    if saturation_bin < 1 {
        return Err(Error::InvalidParameter(
            "saturation bin K must be at least 1".into(),
        ));
    }
    if !(efficiency > 0.0 && efficiency <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "detector efficiency {efficiency} must lie in (0, 1]"
        )));
    }
    let rows = (0..=max_photons)
        .map(|m| {
            let mut row = vec![0.0; saturation_bin + 1];
            for detected in 0..=m {
                row[detected.min(saturation_bin)] += binomial_pmf(m, detected, efficiency);
            }
            row
        })
        .collect();
    DetectorResponse::new(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lossless_identity_and_saturation() {
        let r = pnr_response(6, 3, 1.0).unwrap();
        for m in 0..=3 {
            assert_eq!(r.probability(m, m), 1.0);
        }
        for m in 4..=6 {
            assert_eq!(r.probability(3, m), 1.0);
        }
        assert_eq!(r.outcome_count(), 4);
        assert_eq!(r.max_photons(), 6);
    }

    #[test]
    fn binomial_loss() {
        let r = pnr_response(2, 2, 0.5).unwrap();
        assert!((r.probability(0, 2) - 0.25).abs() < 1e-15);
        assert!((r.probability(1, 2) - 0.5).abs() < 1e-15);
        assert!((r.probability(2, 2) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn on_off_detector() {
        let eta: f64 = 0.3;
        let r = pnr_response(5, 1, eta).unwrap();
        for m in 0..=5 {
            let off = (1.0 - eta).powi(m as i32);
            assert!((r.probability(0, m) - off).abs() < 1e-12);
            assert!((r.probability(1, m) - (1.0 - off)).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(pnr_response(3, 0, 0.5).is_err());
        assert!(pnr_response(3, 2, 0.0).is_err());
        assert!(pnr_response(3, 2, 1.5).is_err());
    }

    #[test]
    fn parses_text_matrix() {
        let text = "# m = 0..2\n1 0\n0.2 0.8\n\n0 1\n";
        let r = DetectorResponse::from_text(text).unwrap();
        assert_eq!(r.max_photons(), 2);
        assert_eq!(r.row(1), &[0.2, 0.8]);
        assert_eq!(DetectorResponse::from_text(&r.to_text()).unwrap(), r);
    }

    #[test]
    fn rejects_malformed_text() {
        assert!(matches!(
            DetectorResponse::from_text("1 0\n0.5 x\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(DetectorResponse::from_text("1 0\n0.5 0.6\n").is_err());
        assert!(DetectorResponse::from_text("1 0\n0.5 0.25 0.25\n").is_err());
        assert!(DetectorResponse::from_text("").is_err());
        assert!(DetectorResponse::from_text("1\n1\n").is_err());
    }
}
