//! Brute-force reference computations shared by the integration tests.
//! Nothing here calls into the library's numerics.

#![allow(dead_code)]

use std::collections::BTreeMap;

pub type Table = BTreeMap<Vec<u32>, f64>;

pub fn choose(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `P(k of m photons detected)`, bins above `saturation` merged into it.
pub fn pnr(outcome: usize, photons: usize, efficiency: f64, saturation: usize) -> f64 {
    let bin = |d: usize| {
        choose(photons, d)
            * efficiency.powi(d as i32)
            * (1.0 - efficiency).powi((photons - d) as i32)
    };
    if outcome < saturation {
        if outcome <= photons {
            bin(outcome)
        } else {
            0.0
        }
    } else {
        (saturation..=photons).map(bin).sum()
    }
}

fn tally(outcomes: &[usize], bins: usize) -> Vec<u32> {
    let mut counts = vec![0u32; bins];
    for &k in outcomes {
        counts[k] += 1;
    }
    counts
}

/// Visits every tuple in `0..base` of length `len`.
fn for_each_tuple(len: usize, base: usize, mut visit: impl FnMut(&[usize])) {
    let mut tuple = vec![0usize; len];
    loop {
        visit(&tuple);
        let mut i = 0;
        loop {
            if i == len {
                return;
            }
            tuple[i] += 1;
            if tuple[i] < base {
                break;
            }
            tuple[i] = 0;
            i += 1;
        }
    }
}

/// Configuration table of independent detectors with outcome laws
/// `laws[i]`, by enumerating all outcome tuples.
pub fn independent_detectors_table(laws: &[Vec<f64>]) -> Table {
    let bins = laws[0].len();
    let mut table = Table::new();
    for_each_tuple(laws.len(), bins, |tuple| {
        let p: f64 = tuple.iter().enumerate().map(|(i, &k)| laws[i][k]).product();
        *table.entry(tally(tuple, bins)).or_default() += p;
    });
    table
}

/// Weighted mixture of tables.
pub fn mix(parts: &[(f64, Table)]) -> Table {
    let mut out = Table::new();
    for (w, t) in parts {
        for (c, p) in t {
            *out.entry(c.clone()).or_default() += w * p;
        }
    }
    out
}

/// Configuration table of a photon-number distribution split by `ratios`
/// onto detectors with response `response(k, m)`, enumerating every arm
/// occupation and every outcome tuple.
pub fn state_table(
    photon_probs: &[f64],
    ratios: &[f64],
    bins: usize,
    response: impl Fn(usize, usize) -> f64,
) -> Table {
    let arms = ratios.len();
    let mut table = Table::new();
    for (n, &pn) in photon_probs.iter().enumerate() {
        if pn == 0.0 {
            continue;
        }
        for_each_tuple(arms, n + 1, |occupation| {
            if occupation.iter().sum::<usize>() != n {
                return;
            }
            let mut weight = pn;
            let mut left = n;
            for (i, &m) in occupation.iter().enumerate() {
                weight *= choose(left, m) * ratios[i].powi(m as i32);
                left -= m;
            }
            if weight == 0.0 {
                return;
            }
            for_each_tuple(arms, bins, |outcomes| {
                let r: f64 = outcomes
                    .iter()
                    .zip(occupation)
                    .map(|(&k, &m)| response(k, m))
                    .product();
                if r > 0.0 {
                    *table.entry(tally(outcomes, bins)).or_default() += weight * r;
                }
            });
        });
    }
    table
}

/// Witness matrix from a configuration table via raw first and second
/// moments of the counts.
pub fn witness_matrix(table: &Table, detectors: usize) -> Vec<Vec<f64>> {
    let bins = table.keys().next().map_or(0, Vec::len);
    let n = detectors as f64;
    let mut mean = vec![0.0; bins];
    let mut second = vec![vec![0.0; bins]; bins];
    for (c, p) in table {
        for k in 0..bins {
            mean[k] += p * c[k] as f64;
            for l in 0..bins {
                second[k][l] += p * (c[k] * c[l]) as f64;
            }
        }
    }
    (0..bins)
        .map(|k| {
            (0..bins)
                .map(|l| {
                    let cov = second[k][l] - mean[k] * mean[l];
                    let delta = if k == l { n } else { 0.0 };
                    n * cov - mean[k] * (delta - mean[l])
                })
                .collect()
        })
        .collect()
}

/// Cyclic Jacobi eigen-decomposition of a small symmetric matrix.
/// Returns ascending eigenvalues with eigenvectors as columns `vectors[i][j]`
/// (component `i` of eigenvector `j`).
pub fn jacobi_eigen(matrix: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = matrix.len();
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let vkp = row[p];
                    let vkq = row[q];
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[x][x].total_cmp(&a[y][y]));
    let values = order.iter().map(|&i| a[i][i]).collect();
    let vectors = (0..n)
        .map(|i| order.iter().map(|&j| v[i][j]).collect())
        .collect();
    (values, vectors)
}

pub fn min_eigenvalue(matrix: &[Vec<f64>]) -> f64 {
    jacobi_eigen(matrix).0[0]
}

/// Conditional signal distribution and herald probability of a two-mode
/// squeezed vacuum heralded on `k` clicks of a lossy counter, from the
/// joint photon-number series truncated at `terms`.
pub fn heralded_series(
    lambda: f64,
    herald_efficiency: f64,
    k: usize,
    terms: usize,
) -> (Vec<f64>, f64) {
    let joint: Vec<f64> = (0..terms)
        .map(|n| {
            let herald = if n >= k {
                choose(n, k)
                    * herald_efficiency.powi(k as i32)
                    * (1.0 - herald_efficiency).powi((n - k) as i32)
            } else {
                0.0
            };
            (1.0 - lambda) * lambda.powi(n as i32) * herald
        })
        .collect();
    let norm: f64 = joint.iter().sum();
    (joint.iter().map(|p| p / norm).collect(), norm)
}

pub fn poisson(mean: f64, terms: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(terms);
    let mut p = (-mean).exp();
    for n in 0..terms {
        if n > 0 {
            p *= mean / n as f64;
        }
        out.push(p);
    }
    out
}

pub fn max_abs(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(u, v)| (u - v).abs()))
        .fold(0.0, f64::max)
}

/// Largest difference between a library table and a reference table,
/// treating missing keys as zero.
pub fn table_difference(stats: &click_witness::ClickStatistics, reference: &Table) -> f64 {
    let mut worst: f64 = 0.0;
    for (c, p) in stats.iter() {
        worst = worst.max((p - reference.get(c.counts()).copied().unwrap_or(0.0)).abs());
    }
    for (c, p) in reference {
        let q = stats.probability(&click_witness::ClickConfiguration::new(c.clone()));
        worst = worst.max((p - q).abs());
    }
    worst
}
