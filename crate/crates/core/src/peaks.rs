//! First-gap and first-drop detection on sorted sequences.
//!
//! Sorted distance lists and sorted edge weights are monotone, so their raw
//! values have no local maxima; the detector therefore works on consecutive
//! differences. A qualifying peak is a strict local maximum of the
//! difference sequence whose height clears `mean + sigma_mult * stdev`
//! (population stdev). When nothing qualifies the largest difference is
//! used; a sequence whose differences are all equal has no gap at all.

use crate::model::{Error, Result};

pub const DEFAULT_SIGMA_MULT: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakResult {
    /// False when no gap exists (all differences equal).
    pub found: bool,
    /// Index into the difference sequence; meaningful only when `found`.
    pub peak_index: usize,
    /// Midpoint of the gap, the value callers threshold against. When no
    /// gap exists this is the last input value.
    pub threshold: f64,
}

/// Finds the first large gap in a non-decreasing sequence.
///
/// Returns the midpoint `(v[i] + v[i+1]) / 2` of the first qualifying gap,
/// falling back to the global maximum difference when no local maximum
/// clears the prominence bar. All-equal differences (needs at least two to
/// tell) mean `found = false` and the last value as threshold.
pub fn find_first_gap(sorted_values: &[f64], sigma_mult: f64) -> Result<PeakResult> {
    let v = sorted_values;
    if v.len() < 2 {
        return Err(Error::InvalidArgument(
            "gap detection needs at least 2 values".into(),
        ));
    }
    debug_assert!(v.windows(2).all(|w| w[0] <= w[1]), "input not sorted");

    let diff: Vec<f64> = v.windows(2).map(|w| w[1] - w[0]).collect();
    let m = diff.len();

    if m >= 2 && diff.iter().all(|&d| d == diff[0]) {
        return Ok(PeakResult {
            found: false,
            peak_index: 0,
            threshold: v[v.len() - 1],
        });
    }

    let mean = diff.iter().sum::<f64>() / m as f64;
    let var = diff.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / m as f64;
    let bar = mean + sigma_mult * var.sqrt();

    for i in 0..m {
        let left_ok = i == 0 || diff[i] > diff[i - 1];
        let right_ok = i == m - 1 || diff[i] >= diff[i + 1];
        if left_ok && right_ok && diff[i] > bar {
            return Ok(PeakResult {
                found: true,
                peak_index: i,
                threshold: 0.5 * (v[i] + v[i + 1]),
            });
        }
    }

    let best = diff
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap().then(b.0.cmp(&a.0)))
        .map(|(i, _)| i)
        .unwrap();
    Ok(PeakResult {
        found: true,
        peak_index: best,
        threshold: 0.5 * (v[best] + v[best + 1]),
    })
}

/// Finds the first large drop in a non-increasing sequence by running
/// [`find_first_gap`] on the negated values and mapping the threshold back.
/// Keeping values strictly greater than the threshold retains the prefix
/// before the drop.
pub fn find_first_drop(sorted_desc_values: &[f64], sigma_mult: f64) -> Result<PeakResult> {
    debug_assert!(
        sorted_desc_values.windows(2).all(|w| w[0] >= w[1]),
        "input not sorted descending"
    );
    let negated: Vec<f64> = sorted_desc_values.iter().map(|&v| -v).collect();
    let r = find_first_gap(&negated, sigma_mult)?;
    Ok(PeakResult {
        found: r.found,
        peak_index: r.peak_index,
        threshold: -r.threshold,
    })
}
