//! Maximin (farthest-first) sampling over high-score candidates.
//!
//! Selection starts at the strongest-scoring candidate and repeatedly takes
//! the candidate farthest from everything selected so far. When the next
//! candidate's projection collapses relative to the previous one, the
//! selection has started drilling into an already-covered cluster and
//! sampling stops; the triggering point is not returned. For clusters whose
//! pairwise separation exceeds their diameters this yields one
//! representative per cluster.

use crate::model::{euclidean, Dataset, Error, IndexSet, Result};

pub const DEFAULT_STOP_RATIO: f64 = 0.5;

#[derive(Debug, Clone)]
pub struct MaximinTrace {
    /// Dataset indices in selection order.
    pub selected: Vec<usize>,
    /// Minimum distance from each selection to the previously selected
    /// set; the first entry stands in for +inf and records the candidate
    /// set's diameter.
    pub projections: Vec<f64>,
}

impl MaximinTrace {
    pub fn selected_set(&self) -> IndexSet {
        IndexSet::from_unsorted(self.selected.clone())
    }
}

/// Runs maximin selection over `candidates`, seeded at the highest-score
/// candidate (ties to the lower index). Stops when a selection's projection
/// falls below `stop_ratio` times the previous projection, excluding that
/// selection, or when candidates run out.
pub fn maximin_sample(
    ds: &Dataset,
    candidates: &IndexSet,
    scores: &[f64],
    stop_ratio: f64,
) -> Result<MaximinTrace> {
    if candidates.is_empty() {
        return Err(Error::InvalidArgument("empty candidate set".into()));
    }
    if !(0.0 < stop_ratio && stop_ratio < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "stop ratio {stop_ratio} outside (0, 1)"
        )));
    }

    let cand: Vec<usize> = candidates.iter().collect();
    let k = cand.len();

    let mut seed_pos = 0;
    for (pos, &idx) in cand.iter().enumerate() {
        if scores[idx] > scores[cand[seed_pos]] {
            seed_pos = pos;
        }
    }

    let mut diameter = 0.0f64;
    for i in 0..k {
        for j in (i + 1)..k {
            let dist = euclidean(ds.point(cand[i]), ds.point(cand[j]));
            if dist > diameter {
                diameter = dist;
            }
        }
    }

    let mut selected = vec![cand[seed_pos]];
    let mut projections = vec![diameter];
    let mut min_dist: Vec<f64> = cand
        .iter()
        .map(|&idx| euclidean(ds.point(idx), ds.point(cand[seed_pos])))
        .collect();
    let mut taken = vec![false; k];
    taken[seed_pos] = true;

    loop {
        let mut next_pos = None;
        for pos in 0..k {
            if taken[pos] {
                continue;
            }
            match next_pos {
                None => next_pos = Some(pos),
                Some(best) => {
                    if min_dist[pos] > min_dist[best] {
                        next_pos = Some(pos);
                    }
                }
            }
        }
        let Some(pos) = next_pos else { break };

        let projection = min_dist[pos];
        let previous = *projections.last().unwrap();
        if projection < stop_ratio * previous {
            break;
        }

        taken[pos] = true;
        selected.push(cand[pos]);
        projections.push(projection);
        let p = ds.point(cand[pos]);
        for other in 0..k {
            if !taken[other] {
                let dist = euclidean(ds.point(cand[other]), p);
                if dist < min_dist[other] {
                    min_dist[other] = dist;
                }
            }
        }
    }

    Ok(MaximinTrace {
        selected,
        projections,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Dataset;

    fn line(points: &[f64]) -> Dataset {
        Dataset::from_rows(points.iter().map(|&x| vec![x, 0.0]).collect()).unwrap()
    }

    #[test]
    fn single_candidate() {
        let ds = line(&[2.0, 5.0]);
        let t = maximin_sample(
            &ds,
            &IndexSet::from_sorted(vec![1]),
            &[0.0, 0.3],
            DEFAULT_STOP_RATIO,
        )
        .unwrap();
        assert_eq!(t.selected, vec![1]);
        assert_eq!(t.projections, vec![0.0]);
    }

    #[test]
    fn stop_rule_discards_trigger() {
        let ds = line(&[0.0, 100.0, 101.0]);
        let t = maximin_sample(
            &ds,
            &IndexSet::full(3),
            &[0.5, 0.5, 0.5],
            DEFAULT_STOP_RATIO,
        )
        .unwrap();
        assert_eq!(t.selected, vec![0, 2]);
        assert_eq!(t.projections, vec![101.0, 101.0]);
    }

    #[test]
    fn two_clusters_get_one_representative_each() {
        let mut rows = Vec::new();
        for i in 0..5 {
            rows.push(vec![i as f64 * 0.1, 0.0]);
        }
        for i in 0..5 {
            rows.push(vec![100.0 + i as f64 * 0.1, 0.0]);
        }
        let ds = Dataset::from_rows(rows).unwrap();
        let scores: Vec<f64> = (0..10).map(|i| 0.9 - 0.01 * i as f64).collect();
        let t = maximin_sample(&ds, &IndexSet::full(10), &scores, DEFAULT_STOP_RATIO).unwrap();
        assert_eq!(t.selected.len(), 2);
        assert!(t.selected[0] < 5 && t.selected[1] >= 5);
    }

    #[test]
    fn seed_is_highest_score_lowest_index() {
        let ds = line(&[0.0, 1.0, 2.0, 3.0]);
        let t = maximin_sample(
            &ds,
            &IndexSet::full(4),
            &[0.2, 0.8, 0.8, 0.1],
            DEFAULT_STOP_RATIO,
        )
        .unwrap();
        assert_eq!(t.selected[0], 1);
    }

    #[test]
    fn projections_non_increasing_after_sentinel() {
        let ds = line(&[0.0, 3.0, 7.0, 20.0, 21.0, 40.0]);
        let t = maximin_sample(&ds, &IndexSet::full(6), &[0.5; 6], 0.01).unwrap();
        for w in t.projections[1..].windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
    }

    #[test]
    fn exhausts_candidates_with_tiny_ratio() {
        let ds = line(&[0.0, 1.0, 2.0, 50.0]);
        let t = maximin_sample(&ds, &IndexSet::full(4), &[0.5; 4], 0.001).unwrap();
        assert_eq!(t.selected.len(), 4);
    }

    #[test]
    fn rejects_bad_input() {
        let ds = line(&[0.0, 1.0]);
        assert!(maximin_sample(&ds, &IndexSet::from_sorted(vec![]), &[0.0, 0.0], 0.5).is_err());
        assert!(maximin_sample(&ds, &IndexSet::full(2), &[0.0, 0.0], 1.0).is_err());
        assert!(maximin_sample(&ds, &IndexSet::full(2), &[0.0, 0.0], 0.0).is_err());
    }
}
