//! External clustering metrics and rank-based algorithm comparison.
//!
//! All four clustering metrics are computed from a contingency table and
//! are invariant under relabeling of either partition. Label values can be
//! arbitrary non-negative integers; they are compacted internally.

mod stats;

pub use stats::{
    friedman_chi2, friedman_statistic, iman_davenport, mean_ranks, nemenyi_cd, FriedmanResult,
    RankTable,
};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `counts[i][j]` = samples with predicted class `i` and true class `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    pub counts: Vec<Vec<u64>>,
    pub row_sums: Vec<u64>,
    pub col_sums: Vec<u64>,
    pub n: u64,
}

fn compact(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut ids = BTreeMap::new();
    for &l in labels {
        let next = ids.len();
        ids.entry(l).or_insert(next);
    }
    (labels.iter().map(|l| ids[l]).collect(), ids.len())
}

impl ContingencyTable {
    pub fn new(pred: &[usize], truth: &[usize]) -> Result<Self> {
        if pred.len() != truth.len() {
            return Err(Error::InvalidArgument(format!(
                "label length mismatch: {} predicted vs {} true",
                pred.len(),
                truth.len()
            )));
        }
        if pred.is_empty() {
            return Err(Error::InvalidArgument("empty label vectors".into()));
        }
        let (p, kp) = compact(pred);
        let (t, kt) = compact(truth);
        let mut counts = vec![vec![0u64; kt]; kp];
        for (&i, &j) in p.iter().zip(&t) {
            counts[i][j] += 1;
        }
        let row_sums = counts.iter().map(|r| r.iter().sum()).collect();
        let col_sums = (0..kt).map(|j| counts.iter().map(|r| r[j]).sum()).collect();
        Ok(Self {
            counts,
            row_sums,
            col_sums,
            n: pred.len() as u64,
        })
    }
}

fn pairs(x: u64) -> u64 {
    x * x.saturating_sub(1) / 2
}

/// Co-clustered pair counts `(in both, in pred, in truth)`.
fn pair_counts(table: &ContingencyTable) -> (u64, u64, u64) {
    (
        table.counts.iter().flatten().map(|&c| pairs(c)).sum(),
        table.row_sums.iter().map(|&c| pairs(c)).sum(),
        table.col_sums.iter().map(|&c| pairs(c)).sum(),
    )
}

/// Fraction of samples matched under the best one-to-one label mapping.
pub fn accuracy(pred: &[usize], truth: &[usize]) -> Result<f64> {
    let table = ContingencyTable::new(pred, truth)?;
    let size = table.row_sums.len().max(table.col_sums.len());
    let mut weights = pathfinding::matrix::Matrix::new(size, size, 0i64);
    for (i, row) in table.counts.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            weights[(i, j)] = c as i64;
        }
    }
    let (matched, _) = pathfinding::kuhn_munkres::kuhn_munkres(&weights);
    Ok(matched as f64 / table.n as f64)
}

fn entropy(sums: &[u64], n: f64) -> f64 {
    sums.iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Mutual information normalized by the geometric mean of the entropies.
pub fn nmi(pred: &[usize], truth: &[usize]) -> Result<f64> {
    let table = ContingencyTable::new(pred, truth)?;
    let n = table.n as f64;
    let hu = entropy(&table.row_sums, n);
    let hv = entropy(&table.col_sums, n);
    if hu == 0.0 && hv == 0.0 {
        // both partitions are a single cluster
        return Ok(1.0);
    }
    if hu == 0.0 || hv == 0.0 {
        return Ok(0.0);
    }
    let mut mi = 0.0;
    for (i, row) in table.counts.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c > 0 {
                let c = c as f64;
                let a = table.row_sums[i] as f64;
                let b = table.col_sums[j] as f64;
                mi += (c / n) * (n * c / (a * b)).ln();
            }
        }
    }
    Ok((mi / (hu * hv).sqrt()).clamp(0.0, 1.0))
}

/// Pair-counting F1 over all sample pairs, `2·|both| / (|same pred| + |same truth|)`.
pub fn pairwise_fscore(pred: &[usize], truth: &[usize]) -> Result<f64> {
    let table = ContingencyTable::new(pred, truth)?;
    if table.n < 2 {
        return Err(Error::InvalidArgument("pairwise F-score needs at least 2 samples".into()));
    }
    let (both, same_pred, same_truth) = pair_counts(&table);
    if same_pred == 0 && same_truth == 0 {
        return Ok(1.0);
    }
    Ok((2 * both) as f64 / (same_pred + same_truth) as f64)
}

/// Adjusted Rand Index; 1 when the index has no room above chance.
///
/// Evaluated as one ratio of integers so that rational values come out exact.
pub fn adjusted_rand(pred: &[usize], truth: &[usize]) -> Result<f64> {
    let table = ContingencyTable::new(pred, truth)?;
    let (index, sum_a, sum_b) = pair_counts(&table);
    let total = pairs(table.n) as i128;
    let (index, sum_a, sum_b) = (index as i128, sum_a as i128, sum_b as i128);
    // both sides scaled by 2·C(n, 2)
    let num = 2 * index * total - 2 * sum_a * sum_b;
    let den = (sum_a + sum_b) * total - 2 * sum_a * sum_b;
    if den == 0 {
        return Ok(1.0);
    }
    Ok(num as f64 / den as f64)
}

/// The four clustering metrics for one prediction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusteringScores {
    pub acc: f64,
    pub nmi: f64,
    pub fscore: f64,
    pub ari: f64,
}

pub fn evaluate(pred: &[usize], truth: &[usize]) -> Result<ClusteringScores> {
    Ok(ClusteringScores {
        acc: accuracy(pred, truth)?,
        nmi: nmi(pred, truth)?,
        fscore: pairwise_fscore(pred, truth)?,
        ari: adjusted_rand(pred, truth)?,
    })
}

/// Mean and sample standard deviation (0 for a single value).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Summary {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Summary { mean, std }
    }
}

/// Metrics aggregated over repeated runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub acc: Summary,
    pub nmi: Summary,
    pub fscore: Summary,
    pub ari: Summary,
    pub runs: usize,
}

impl MetricReport {
    pub fn from_runs(runs: &[ClusteringScores]) -> Result<Self> {
        if runs.is_empty() {
            return Err(Error::InvalidArgument("no runs to summarize".into()));
        }
        let col = |f: fn(&ClusteringScores) -> f64| Summary::of(&runs.iter().map(f).collect::<Vec<_>>());
        Ok(Self {
            acc: col(|s| s.acc),
            nmi: col(|s| s.nmi),
            fscore: col(|s| s.fscore),
            ari: col(|s| s.ari),
            runs: runs.len(),
        })
    }
}
