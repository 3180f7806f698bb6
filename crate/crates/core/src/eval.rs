//! Detection and assignment metrics, plus the masking counter.
//!
//! ROC AUC is computed from an integer Mann-Whitney statistic (ties count
//! one half) with a single final division, so equal inputs give bit-equal
//! results. Average precision walks the descending-score ranking with ties
//! broken by lower index. Assignment F1 matches predicted to true clusters
//! either per-true-cluster best match (default) or one-to-one via the
//! Hungarian algorithm.

use serde::{Deserialize, Serialize};

use crate::clusters::MicroClusterSet;
use crate::model::{GroundTruth, IndexSet};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectionMetrics {
    /// Absent when the labeling is single-class.
    pub auc: Option<f64>,
    /// Absent when there are no outliers.
    pub ap: Option<f64>,
}

pub fn detection_metrics(scores: &[f64], truth: &GroundTruth) -> DetectionMetrics {
    DetectionMetrics {
        auc: roc_auc(scores, truth),
        ap: average_precision(scores, truth),
    }
}

/// Probability that a uniformly random (outlier, inlier) pair is ordered
/// correctly, ties counting one half. Scattered outliers count as
/// positives. `None` when either class is empty.
pub fn roc_auc(scores: &[f64], truth: &GroundTruth) -> Option<f64> {
    assert_eq!(scores.len(), truth.len());
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_unstable_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap());

    let positives = order.iter().filter(|&&i| truth.is_outlier(i)).count() as u128;
    let negatives = order.len() as u128 - positives;
    if positives == 0 || negatives == 0 {
        return None;
    }

    // Twice the Mann-Whitney U statistic, kept integral: each positive
    // contributes 2 per strictly lower negative and 1 per tied negative.
    let mut u2: u128 = 0;
    let mut negs_below: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        let pos_in_group = order[i..j]
            .iter()
            .filter(|&&k| truth.is_outlier(k))
            .count() as u128;
        let negs_in_group = (j - i) as u128 - pos_in_group;
        u2 += pos_in_group * (2 * negs_below + negs_in_group);
        negs_below += negs_in_group;
        i = j;
    }
    Some(u2 as f64 / (2 * positives * negatives) as f64)
}

/// Mean over outliers, in descending-score order (ties to the lower
/// index), of the precision at each outlier's rank. `None` when there are
/// no outliers.
pub fn average_precision(scores: &[f64], truth: &GroundTruth) -> Option<f64> {
    assert_eq!(scores.len(), truth.len());
    let positives = (0..scores.len()).filter(|&i| truth.is_outlier(i)).count();
    if positives == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_unstable_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut sum = 0.0;
    let mut pos_seen = 0usize;
    for (rank0, &idx) in order.iter().enumerate() {
        if truth.is_outlier(idx) {
            pos_seen += 1;
            sum += pos_seen as f64 / (rank0 + 1) as f64;
        }
    }
    Some(sum / positives as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Matching {
    /// Each true cluster takes its best-overlapping prediction; a
    /// prediction may serve several true clusters.
    BestMatch,
    /// One-to-one matching maximizing total F1.
    Hungarian,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PerClusterMatch {
    /// 1-based true cluster id.
    pub true_cluster: usize,
    /// Index into the predicted cluster list, absent when nothing overlaps.
    pub matched: Option<usize>,
    pub f1: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AssignmentScore {
    pub avg_f1: f64,
    pub per_true_cluster: Vec<PerClusterMatch>,
}

fn overlap(a: &IndexSet, b: &IndexSet) -> usize {
    let (mut i, mut j, mut count) = (0, 0, 0);
    let (sa, sb) = (a.as_slice(), b.as_slice());
    while i < sa.len() && j < sb.len() {
        match sa[i].cmp(&sb[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

/// Scores predicted micro-clusters against the true ones. Scattered
/// outliers take no part. `None` when the truth has no micro-clusters.
pub fn assignment_f1(
    pred: &MicroClusterSet,
    truth: &GroundTruth,
    matching: Matching,
) -> Option<AssignmentScore> {
    let m = truth.n_clusters();
    if m == 0 {
        return None;
    }
    let true_sets: Vec<IndexSet> = (1..=m).map(|k| truth.cluster_members(k)).collect();
    let f1 = |k: usize, j: usize| -> f64 {
        let inter = overlap(&true_sets[k], &pred[j]);
        2.0 * inter as f64 / (true_sets[k].len() + pred[j].len()) as f64
    };

    let per: Vec<PerClusterMatch> = match matching {
        Matching::BestMatch => (0..m)
            .map(|k| {
                let mut best: Option<(usize, f64)> = None;
                for j in 0..pred.len() {
                    let v = f1(k, j);
                    if best.map_or(true, |(_, bv)| v > bv) {
                        best = Some((j, v));
                    }
                }
                match best {
                    Some((j, v)) if v > 0.0 => PerClusterMatch {
                        true_cluster: k + 1,
                        matched: Some(j),
                        f1: v,
                    },
                    _ => PerClusterMatch {
                        true_cluster: k + 1,
                        matched: None,
                        f1: 0.0,
                    },
                }
            })
            .collect(),
        Matching::Hungarian => {
            let matrix: Vec<Vec<f64>> = (0..m)
                .map(|k| (0..pred.len()).map(|j| f1(k, j)).collect())
                .collect();
            let assigned = hungarian_max(&matrix);
            (0..m)
                .map(|k| match assigned[k] {
                    Some(j) if matrix[k][j] > 0.0 => PerClusterMatch {
                        true_cluster: k + 1,
                        matched: Some(j),
                        f1: matrix[k][j],
                    },
                    _ => PerClusterMatch {
                        true_cluster: k + 1,
                        matched: None,
                        f1: 0.0,
                    },
                })
                .collect()
        }
    };

    let avg_f1 = per.iter().map(|p| p.f1).sum::<f64>() / m as f64;
    Some(AssignmentScore {
        avg_f1,
        per_true_cluster: per,
    })
}

/// Maximum-total-score one-to-one assignment of rows to columns.
/// Returns, per row, the assigned column (only real columns; padding from
/// squaring the matrix is dropped). Standard potentials-and-augmenting-path
/// construction, cubic in the larger dimension.
pub fn hungarian_max(score: &[Vec<f64>]) -> Vec<Option<usize>> {
    let m = score.len();
    let k = score.first().map_or(0, |r| r.len());
    if m == 0 || k == 0 {
        return vec![None; m];
    }
    let n = m.max(k);
    let cost = |i: usize, j: usize| -> f64 {
        if i < m && j < k {
            -score[i][j]
        } else {
            0.0
        }
    };

    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut ans = vec![None; m];
    for j in 1..=n {
        let i = p[j];
        if (1..=m).contains(&i) && j <= k {
            ans[i - 1] = Some(j - 1);
        }
    }
    ans
}

/// Number of true micro-clusters with two or more members in `subsample`.
pub fn count_masking(subsample: &IndexSet, truth: &GroundTruth) -> usize {
    let m = truth.n_clusters();
    if m == 0 {
        return 0;
    }
    let mut counts = vec![0usize; m + 1];
    for i in subsample {
        let l = truth.labels()[i];
        if l >= 1 {
            counts[l as usize] += 1;
        }
    }
    counts[1..].iter().filter(|&&c| c >= 2).count()
}

/// Per-iteration masking observations and their running sum.
#[derive(Debug, Clone, Serialize)]
pub struct MaskingLog {
    pub per_iteration: Vec<usize>,
    pub cumulative: Vec<usize>,
}

impl MaskingLog {
    pub fn from_counts(per_iteration: Vec<usize>) -> Self {
        let mut cumulative = Vec::with_capacity(per_iteration.len());
        let mut sum = 0;
        for &c in &per_iteration {
            sum += c;
            cumulative.push(sum);
        }
        Self {
            per_iteration,
            cumulative,
        }
    }

    pub fn total(&self) -> usize {
        self.cumulative.last().copied().unwrap_or(0)
    }
}
