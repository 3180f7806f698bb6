//! Hypersphere ensemble base detector.
//!
//! Each round subsamples `psi` training points as centers; a center's
//! radius is its distance to the nearest other center. A test point
//! covered by no sphere scores 1. Otherwise, with `b` the smallest-radius
//! sphere containing it and `a` the center realizing `b`'s radius, the
//! score is `1 - rad(a) / rad(b)`: points explained by a locally tight
//! sphere whose neighborhood is equally tight score near 0, points only
//! reachable through a sphere much larger than its own neighborhood score
//! near 1.

use rayon::prelude::*;

use crate::model::{
    euclidean, subsample_without_replacement, Dataset, DetRng, Error, IndexSet, Result,
    ScoreVector,
};

#[derive(Debug, Clone)]
pub struct HypersphereModel {
    /// Dataset indices of the sampled centers, ascending.
    center_indices: Vec<usize>,
    /// Center coordinates, row-major, aligned with `center_indices`.
    centers: Vec<f64>,
    radius: Vec<f64>,
    /// Position (into `center_indices`) of the nearest other center.
    nearest_center: Vec<usize>,
    d: usize,
}

impl HypersphereModel {
    pub fn centers(&self) -> IndexSet {
        IndexSet::from_sorted(self.center_indices.clone())
    }

    pub fn psi(&self) -> usize {
        self.center_indices.len()
    }

    pub fn radii(&self) -> &[f64] {
        &self.radius
    }

    pub fn nearest_centers(&self) -> &[usize] {
        &self.nearest_center
    }

    fn center_point(&self, pos: usize) -> &[f64] {
        &self.centers[pos * self.d..(pos + 1) * self.d]
    }
}

/// Samples `psi` centers from the training subset and computes radii.
pub fn fit(
    ds: &Dataset,
    train: &IndexSet,
    psi: usize,
    rng: &mut DetRng,
) -> Result<HypersphereModel> {
    if psi < 2 {
        return Err(Error::InvalidArgument(format!(
            "subsample size {psi} too small; a radius needs a second center"
        )));
    }
    if psi > train.len() {
        return Err(Error::InvalidArgument(format!(
            "subsample size {psi} exceeds training set size {}",
            train.len()
        )));
    }

    let positions = subsample_without_replacement(rng, train.len(), psi)?;
    let center_indices: Vec<usize> = positions.iter().map(|p| train.as_slice()[p]).collect();
    let d = ds.d();
    let mut centers = Vec::with_capacity(psi * d);
    for &idx in &center_indices {
        centers.extend_from_slice(ds.point(idx));
    }

    let mut radius = vec![f64::INFINITY; psi];
    let mut nearest_center = vec![0usize; psi];
    for i in 0..psi {
        for j in 0..psi {
            if i == j {
                continue;
            }
            let dist = euclidean(
                &centers[i * d..(i + 1) * d],
                &centers[j * d..(j + 1) * d],
            );
            if dist < radius[i] {
                radius[i] = dist;
                nearest_center[i] = j;
            }
        }
    }

    Ok(HypersphereModel {
        center_indices,
        centers,
        radius,
        nearest_center,
        d,
    })
}

/// Scores one point against the model. Containment is closed-ball; among
/// equal smallest radii the lowest center index wins. A zero-radius sphere
/// contains only its exact center, which scores 0.
pub fn score_point(model: &HypersphereModel, x: &[f64]) -> f64 {
    let mut best: Option<usize> = None;
    for pos in 0..model.psi() {
        let dist = euclidean(x, model.center_point(pos));
        if dist <= model.radius[pos] {
            match best {
                None => best = Some(pos),
                Some(b) => {
                    if model.radius[pos] < model.radius[b] {
                        best = Some(pos);
                    }
                }
            }
        }
    }
    match best {
        None => 1.0,
        Some(b) => {
            if model.radius[b] == 0.0 {
                return 0.0;
            }
            let a = model.nearest_center[b];
            1.0 - model.radius[a] / model.radius[b]
        }
    }
}

/// Scores every dataset row. Parallel over rows; output order matches row
/// order exactly.
pub fn score(model: &HypersphereModel, test: &Dataset) -> ScoreVector {
    (0..test.n())
        .into_par_iter()
        .map(|i| score_point(model, test.point(i)))
        .collect()
}

/// Average of `t` independent fit+score rounds.
pub fn inne_ensemble(
    ds: &Dataset,
    train: &IndexSet,
    psi: usize,
    t: usize,
    rng: &mut DetRng,
) -> Result<ScoreVector> {
    if t == 0 {
        return Err(Error::InvalidArgument("ensemble needs t >= 1".into()));
    }
    let mut acc = vec![0.0; ds.n()];
    for _ in 0..t {
        let model = fit(ds, train, psi, rng)?;
        let s = score(&model, ds);
        for (a, v) in acc.iter_mut().zip(&s) {
            *a += v;
        }
    }
    for a in &mut acc {
        *a /= t as f64;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Dataset;

    fn fit_all(rows: Vec<Vec<f64>>, psi: usize, seed: u64) -> HypersphereModel {
        let ds = Dataset::from_rows(rows).unwrap();
        let train = IndexSet::full(ds.n());
        let mut rng = DetRng::new(seed);
        fit(&ds, &train, psi, &mut rng).unwrap()
    }

    #[test]
    fn mutual_nearest_pair() {
        let m = fit_all(vec![vec![0.0, 0.0], vec![1.0, 0.0]], 2, 0);
        assert_eq!(m.radii(), &[1.0, 1.0]);
        assert_eq!(m.nearest_centers(), &[1, 0]);
    }

    #[test]
    fn three_point_radii() {
        let m = fit_all(
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![5.0, 0.0]],
            3,
            0,
        );
        assert_eq!(m.radii(), &[1.0, 1.0, 4.0]);
    }

    #[test]
    fn coincident_centers_degenerate_to_zero_radius() {
        let m = fit_all(vec![vec![0.0, 0.0], vec![0.0, 0.0]], 2, 0);
        assert_eq!(m.radii(), &[0.0, 0.0]);
        assert_eq!(score_point(&m, &[0.0, 0.0]), 0.0);
        assert_eq!(score_point(&m, &[1.0, 0.0]), 1.0);
    }

    #[test]
    fn uncovered_point_scores_one() {
        let m = fit_all(vec![vec![0.0, 0.0], vec![1.0, 0.0]], 2, 0);
        assert_eq!(score_point(&m, &[10.0, 10.0]), 1.0);
    }

    #[test]
    fn covered_point_score_from_radius_ratio() {
        let m = fit_all(
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![5.0, 0.0]],
            3,
            0,
        );
        // (4.5, 0) sits only inside the radius-4 sphere at (5, 0), whose
        // nearest center (1, 0) has radius 1.
        let s = score_point(&m, &[4.5, 0.0]);
        assert!((s - 0.75).abs() < 1e-12);
    }

    #[test]
    fn tie_between_equal_radii_takes_lower_index() {
        let m = fit_all(vec![vec![0.0, 0.0], vec![1.0, 0.0]], 2, 0);
        // Inside both radius-1 spheres; b = center 0, a = center 1, equal
        // radii give score 0.
        let s = score_point(&m, &[0.1, 0.0]);
        assert_eq!(s, 0.0);
    }

    #[test]
    fn fit_rejects_bad_psi() {
        let ds = Dataset::from_rows(vec![vec![0.0], vec![1.0]]).unwrap();
        let train = IndexSet::full(2);
        assert!(fit(&ds, &train, 1, &mut DetRng::new(0)).is_err());
        assert!(fit(&ds, &train, 3, &mut DetRng::new(0)).is_err());
    }

    #[test]
    fn ensemble_t1_equals_single_round() {
        let ds = Dataset::from_rows(
            (0..20)
                .map(|i| vec![(i % 5) as f64, (i / 5) as f64])
                .collect(),
        )
        .unwrap();
        let train = IndexSet::full(ds.n());
        let ens = inne_ensemble(&ds, &train, 4, 1, &mut DetRng::new(3)).unwrap();
        let model = fit(&ds, &train, 4, &mut DetRng::new(3)).unwrap();
        let single = score(&model, &ds);
        assert_eq!(ens, single);
    }

    #[test]
    fn ensemble_is_mean_of_rounds() {
        let ds = Dataset::from_rows(
            (0..30)
                .map(|i| vec![(i as f64 * 0.7).sin() * 3.0, (i as f64 * 1.3).cos() * 3.0])
                .collect(),
        )
        .unwrap();
        let train = IndexSet::full(ds.n());
        let t = 7;
        let ens = inne_ensemble(&ds, &train, 5, t, &mut DetRng::new(11)).unwrap();

        let mut rng = DetRng::new(11);
        let mut rounds = Vec::new();
        for _ in 0..t {
            let model = fit(&ds, &train, 5, &mut rng).unwrap();
            rounds.push(score(&model, &ds));
        }
        for i in 0..ds.n() {
            let mean = rounds.iter().map(|r| r[i]).sum::<f64>() / t as f64;
            assert!((ens[i] - mean).abs() < 1e-12);
        }
    }

    #[test]
    fn scores_stay_in_unit_interval() {
        for seed in 0..20 {
            let mut rng = DetRng::new(seed);
            let ds = Dataset::from_rows(
                (0..40)
                    .map(|i| {
                        let x = ((seed * 41 + i * 17) % 13) as f64;
                        let y = ((seed * 23 + i * 29) % 11) as f64;
                        vec![x, y]
                    })
                    .collect(),
            )
            .unwrap();
            let train = IndexSet::full(ds.n());
            let model = fit(&ds, &train, 8, &mut rng).unwrap();
            for s in score(&model, &ds) {
                assert!((0.0..=1.0).contains(&s), "score {s} out of range");
                assert!(s.is_finite());
            }
        }
    }

    #[test]
    fn sampled_center_with_positive_radius_scores_below_one() {
        let m = fit_all(
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![5.0, 0.0]],
            3,
            0,
        );
        for pos in 0..3 {
            let s = score_point(&m, m.center_point(pos));
            assert!(s < 1.0);
        }
    }
}
