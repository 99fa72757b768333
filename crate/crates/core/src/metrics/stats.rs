//! Friedman test and Nemenyi critical difference over average ranks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Matrix;

/// Scores of `n_k` algorithms on `n_d` datasets with per-row ranks
/// (1 = best, mid-ranks on ties) and per-algorithm average ranks.
#[derive(Debug, Clone, PartialEq)]
pub struct RankTable {
    pub scores: Matrix,
    pub ranks: Matrix,
    pub mean_ranks: Vec<f64>,
}

impl RankTable {
    pub fn n_datasets(&self) -> usize {
        self.ranks.nrows()
    }

    pub fn n_algorithms(&self) -> usize {
        self.ranks.ncols()
    }
}

pub fn mean_ranks(scores: &Matrix, higher_is_better: bool) -> Result<RankTable> {
    let (n_d, n_k) = scores.shape();
    if n_d == 0 || n_k == 0 {
        return Err(Error::InvalidArgument("empty score table".into()));
    }
    if scores.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidArgument("NaN in score table".into()));
    }
    let mut ranks = Matrix::zeros(n_d, n_k);
    for d in 0..n_d {
        let row: Vec<f64> = scores.row(d).iter().copied().collect();
        let mut order: Vec<usize> = (0..n_k).collect();
        order.sort_by(|&a, &b| {
            if higher_is_better {
                row[b].total_cmp(&row[a])
            } else {
                row[a].total_cmp(&row[b])
            }
        });
        let mut start = 0;
        while start < n_k {
            let mut end = start + 1;
            while end < n_k && row[order[end]] == row[order[start]] {
                end += 1;
            }
            // positions start..end share ranks start+1..=end
            let mid = (start + 1 + end) as f64 / 2.0;
            for &j in &order[start..end] {
                ranks[(d, j)] = mid;
            }
            start = end;
        }
    }
    let mean_ranks = (0..n_k).map(|j| ranks.column(j).mean()).collect();
    Ok(RankTable {
        scores: scores.clone(),
        ranks,
        mean_ranks,
    })
}

/// `χ²_F = 12 n_d / (n_k (n_k + 1)) · [Σ R_j² − n_k (n_k + 1)² / 4]`.
pub fn friedman_chi2(table: &RankTable) -> Result<f64> {
    let n_d = table.n_datasets() as f64;
    let n_k = table.n_algorithms() as f64;
    if table.n_datasets() < 2 || table.n_algorithms() < 2 {
        return Err(Error::InvalidArgument(
            "Friedman test needs at least 2 datasets and 2 algorithms".into(),
        ));
    }
    let sum_sq: f64 = table.mean_ranks.iter().map(|r| r * r).sum();
    Ok(12.0 * n_d / (n_k * (n_k + 1.0)) * (sum_sq - n_k * (n_k + 1.0).powi(2) / 4.0))
}

/// `F_F = (n_d − 1) χ²_F / (n_d (n_k − 1) − χ²_F)`.
pub fn iman_davenport(chi2: f64, n_d: usize, n_k: usize) -> Result<f64> {
    let denom = n_d as f64 * (n_k as f64 - 1.0) - chi2;
    if !(denom > 0.0) {
        return Err(Error::Numerical(format!(
            "F_F denominator n_d(n_k − 1) − χ² = {denom} is not positive"
        )));
    }
    Ok((n_d as f64 - 1.0) * chi2 / denom)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FriedmanResult {
    pub chi2: f64,
    pub ff: f64,
}

pub fn friedman_statistic(table: &RankTable) -> Result<FriedmanResult> {
    let chi2 = friedman_chi2(table)?;
    let ff = iman_davenport(chi2, table.n_datasets(), table.n_algorithms())?;
    Ok(FriedmanResult { chi2, ff })
}

/// `CD = q_α √(n_k (n_k + 1) / (6 n_d))`.
pub fn nemenyi_cd(n_k: usize, n_d: usize, q_alpha: f64) -> f64 {
    q_alpha * ((n_k * (n_k + 1)) as f64 / (6.0 * n_d as f64)).sqrt()
}
