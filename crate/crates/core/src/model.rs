//! Shared domain types: datasets, ground-truth labels, index sets, the
//! Euclidean distance kernel, and the deterministic RNG.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Per-point outlier scores in `[0, 1]`, aligned with dataset row indices.
pub type ScoreVector = Vec<f64>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error at row {row}, column {column}: {reason}")]
    Parse {
        row: usize,
        column: String,
        reason: String,
    },
    #[error("label validation failed: {0}")]
    Labels(String),
    #[error("generation failed: {0}")]
    Generation(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// An n×d matrix of finite real coordinates. Point identity is the row
/// index; rows never move after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    data: Vec<f64>,
    n: usize,
    d: usize,
}

impl Dataset {
    /// Builds a dataset from row-major flat storage.
    pub fn new(data: Vec<f64>, n: usize, d: usize) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::InvalidArgument(format!(
                "dataset must have n >= 1 and d >= 1, got n={n}, d={d}"
            )));
        }
        if data.len() != n * d {
            return Err(Error::InvalidArgument(format!(
                "flat storage length {} does not match n*d = {}",
                data.len(),
                n * d
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite coordinate at row {}, column {}",
                pos / d,
                pos % d
            )));
        }
        Ok(Self { data, n, d })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let d = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidArgument("ragged rows".into()));
        }
        Dataset::new(rows.into_iter().flatten().collect(), n, d)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.d)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }
}

/// Inlier/outlier labeling: 0 = inlier, −1 = scattered outlier, k ≥ 1 =
/// member of true micro-cluster k. Positive labels are contiguous `1..=m`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    labels: Vec<i64>,
    m: usize,
}

impl GroundTruth {
    pub fn new(labels: Vec<i64>) -> Result<Self> {
        let mut seen = std::collections::BTreeSet::new();
        for (i, &l) in labels.iter().enumerate() {
            if l < -1 {
                return Err(Error::Labels(format!("label {l} at row {i} is below -1")));
            }
            if l >= 1 {
                seen.insert(l);
            }
        }
        let m = seen.len();
        for k in 1..=m as i64 {
            if !seen.contains(&k) {
                return Err(Error::Labels(format!(
                    "positive labels must be contiguous 1..={m}; label {k} missing"
                )));
            }
        }
        Ok(Self { labels, m })
    }

    #[inline]
    pub fn labels(&self) -> &[i64] {
        &self.labels
    }

    /// Number of true micro-clusters.
    #[inline]
    pub fn n_clusters(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// True for any outlier, scattered or clustered.
    #[inline]
    pub fn is_outlier(&self, i: usize) -> bool {
        self.labels[i] != 0
    }

    /// Members of true micro-cluster `k` (1-based), ascending.
    pub fn cluster_members(&self, k: usize) -> IndexSet {
        let want = k as i64;
        IndexSet::from_sorted(
            self.labels
                .iter()
                .enumerate()
                .filter(|(_, &l)| l == want)
                .map(|(i, _)| i)
                .collect(),
        )
    }

    pub fn outlier_indices(&self) -> IndexSet {
        IndexSet::from_sorted(
            self.labels
                .iter()
                .enumerate()
                .filter(|(_, &l)| l != 0)
                .map(|(i, _)| i)
                .collect(),
        )
    }
}

/// Sorted duplicate-free point indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    /// Sorts and deduplicates.
    pub fn from_unsorted(mut v: Vec<usize>) -> Self {
        v.sort_unstable();
        v.dedup();
        Self(v)
    }

    /// Caller promises strictly increasing order.
    pub fn from_sorted(v: Vec<usize>) -> Self {
        debug_assert!(v.windows(2).all(|w| w[0] < w[1]));
        Self(v)
    }

    /// The full range `0..n`.
    pub fn full(n: usize) -> Self {
        Self((0..n).collect())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    #[inline]
    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    /// Set difference `self \ other`.
    pub fn minus(&self, other: &IndexSet) -> IndexSet {
        IndexSet::from_sorted(self.iter().filter(|&i| !other.contains(i)).collect())
    }

    /// Set union.
    pub fn union(&self, other: &IndexSet) -> IndexSet {
        let mut v: Vec<usize> = self.0.iter().chain(other.0.iter()).copied().collect();
        v.sort_unstable();
        v.dedup();
        IndexSet(v)
    }
}

impl<'a> IntoIterator for &'a IndexSet {
    type Item = usize;
    type IntoIter = std::iter::Copied<std::slice::Iter<'a, usize>>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter().copied()
    }
}

/// The single randomness source: ChaCha8, seeded explicitly. Identical
/// seed, stream, and call sequence give identical output on every
/// platform. Independent consumers (ensemble members, generators) take
/// separate stream ids so adding one consumer never shifts another's draws.
#[derive(Debug, Clone)]
pub struct DetRng(ChaCha8Rng);

impl DetRng {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self(rng)
    }
}

impl RngCore for DetRng {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }
    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.0.fill_bytes(dest)
    }
    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        self.0.try_fill_bytes(dest)
    }
}

/// Euclidean distance. Panics on dimensionality mismatch (caller contract).
#[inline]
pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "dimensionality mismatch");
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let diff = x - y;
            diff * diff
        })
        .sum::<f64>()
        .sqrt()
}

/// Distances from `x` to every dataset row, in row order.
pub fn distances_to(ds: &Dataset, x: &[f64]) -> Vec<f64> {
    assert_eq!(x.len(), ds.d(), "dimensionality mismatch");
    ds.rows().map(|row| euclidean(row, x)).collect()
}

/// Draws `psi` distinct indices from `0..n`, uniform over psi-subsets,
/// returned ascending.
pub fn subsample_without_replacement(rng: &mut DetRng, n: usize, psi: usize) -> Result<IndexSet> {
    if psi == 0 || psi > n {
        return Err(Error::InvalidArgument(format!(
            "subsample size {psi} out of range 1..={n}"
        )));
    }
    let picked = rand::seq::index::sample(rng, n, psi).into_vec();
    Ok(IndexSet::from_unsorted(picked))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_known_values() {
        assert_eq!(euclidean(&[0.0, 0.0], &[0.0, 0.0]), 0.0);
        assert_eq!(euclidean(&[0.0, 0.0], &[3.0, 4.0]), 5.0);
        let d = euclidean(&[1.0, 1.0, 1.0], &[2.0, 2.0, 2.0]);
        assert!((d - 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn euclidean_symmetric() {
        let a = [1.5, -2.0, 0.25];
        let b = [0.0, 4.0, -1.0];
        assert_eq!(euclidean(&a, &b), euclidean(&b, &a));
    }

    #[test]
    #[should_panic(expected = "dimensionality mismatch")]
    fn euclidean_rejects_mismatch() {
        euclidean(&[0.0], &[0.0, 1.0]);
    }

    #[test]
    fn distances_to_rows() {
        let ds = Dataset::from_rows(vec![vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(distances_to(&ds, &[0.0, 0.0]), vec![0.0, 1.0]);

        let single = Dataset::from_rows(vec![vec![0.0, 0.0]]).unwrap();
        assert_eq!(distances_to(&single, &[0.0, 3.0]), vec![3.0]);

        let tri =
            Dataset::from_rows(vec![vec![0.0, 0.0], vec![3.0, 4.0], vec![6.0, 8.0]]).unwrap();
        assert_eq!(distances_to(&tri, &[0.0, 0.0]), vec![0.0, 5.0, 10.0]);
    }

    #[test]
    fn distances_to_self_is_zero() {
        let ds =
            Dataset::from_rows(vec![vec![0.5, 2.0], vec![-1.0, 3.0], vec![4.0, 4.0]]).unwrap();
        for i in 0..ds.n() {
            assert_eq!(distances_to(&ds, ds.point(i))[i], 0.0);
        }
    }

    #[test]
    fn dataset_rejects_bad_input() {
        assert!(Dataset::new(vec![], 0, 2).is_err());
        assert!(Dataset::new(vec![1.0, 2.0, 3.0], 2, 2).is_err());
        assert!(Dataset::new(vec![1.0, f64::NAN], 1, 2).is_err());
        assert!(Dataset::from_rows(vec![vec![1.0], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn subsample_full_and_single() {
        let mut rng = DetRng::new(7);
        let full = subsample_without_replacement(&mut rng, 5, 5).unwrap();
        assert_eq!(full.as_slice(), &[0, 1, 2, 3, 4]);
        let one = subsample_without_replacement(&mut rng, 1, 1).unwrap();
        assert_eq!(one.as_slice(), &[0]);
        assert!(subsample_without_replacement(&mut rng, 3, 4).is_err());
    }

    #[test]
    fn subsample_distinct_and_deterministic() {
        for seed in 0..50 {
            let mut a = DetRng::new(seed);
            let mut b = DetRng::new(seed);
            let sa = subsample_without_replacement(&mut a, 20, 7).unwrap();
            let sb = subsample_without_replacement(&mut b, 20, 7).unwrap();
            assert_eq!(sa, sb);
            assert_eq!(sa.len(), 7);
            assert!(sa.as_slice().windows(2).all(|w| w[0] < w[1]));
        }
    }

    // n=4, psi=2: frequency of each of the 6 possible 2-subsets over 1e5
    // seeds stays within 3 sigma of the binomial expectation.
    #[test]
    fn subsample_uniform_over_subsets() {
        let trials = 100_000u64;
        let mut counts = std::collections::HashMap::new();
        for seed in 0..trials {
            let mut rng = DetRng::new(seed);
            let s = subsample_without_replacement(&mut rng, 4, 2).unwrap();
            *counts.entry((s.as_slice()[0], s.as_slice()[1])).or_insert(0u64) += 1;
        }
        assert_eq!(counts.len(), 6);
        let p = 1.0 / 6.0;
        let expected = trials as f64 * p;
        let sigma = (trials as f64 * p * (1.0 - p)).sqrt();
        for (&pair, &c) in &counts {
            let dev = (c as f64 - expected).abs();
            assert!(
                dev < 3.0 * sigma,
                "subset {pair:?} count {c} deviates {dev:.1} (> 3 sigma = {:.1})",
                3.0 * sigma
            );
        }
    }

    #[test]
    fn ground_truth_contiguity() {
        let gt = GroundTruth::new(vec![0, 0, 1, 1, -1, 2]).unwrap();
        assert_eq!(gt.n_clusters(), 2);
        assert_eq!(gt.cluster_members(1).as_slice(), &[2, 3]);
        assert_eq!(gt.outlier_indices().as_slice(), &[2, 3, 4, 5]);
        assert!(GroundTruth::new(vec![0, 2, 2]).is_err());
        assert!(GroundTruth::new(vec![0, -2]).is_err());
    }

    #[test]
    fn index_set_ops() {
        let a = IndexSet::from_unsorted(vec![3, 1, 3, 0]);
        assert_eq!(a.as_slice(), &[0, 1, 3]);
        assert!(a.contains(3));
        assert!(!a.contains(2));
        let b = IndexSet::from_unsorted(vec![1, 2]);
        assert_eq!(a.minus(&b).as_slice(), &[0, 3]);
        assert_eq!(a.union(&b).as_slice(), &[0, 1, 2, 3]);
        assert_eq!(IndexSet::full(3).as_slice(), &[0, 1, 2]);
    }

    #[test]
    fn rng_streams_differ() {
        let mut a = DetRng::with_stream(1, 0);
        let mut b = DetRng::with_stream(1, 1);
        assert_ne!(a.next_u64(), b.next_u64());
    }
}
