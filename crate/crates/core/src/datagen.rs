//! Seeded 2D benchmark generators and a Gaussian-mixture outlier injector.
//!
//! Each named family lays out an inlier shape (Gaussian blobs, a spiral,
//! parallel bands, blobs of very different density) and then plants tight
//! outlier micro-clusters plus scattered singletons in the empty space
//! around it. Planted centers are rejection-sampled until they clear a
//! separation margin from every inlier point and from each other, so the
//! well-separatedness premise behind maximin coverage holds by
//! construction and is re-checked before the dataset is returned.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::model::{euclidean, Dataset, DetRng, Error, GroundTruth, Result};

const CENTER_RETRIES: usize = 20_000;
const POINT_RETRIES: usize = 1_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Synthetic10,
    Spiral,
    Sandwich,
    Vdensity,
    Blobs,
}

impl Family {
    fn rng_stream(self) -> u64 {
        match self {
            Family::Synthetic10 => 10,
            Family::Spiral => 11,
            Family::Sandwich => 12,
            Family::Vdensity => 13,
            Family::Blobs => 14,
        }
    }

    /// Box the planted centers are drawn from, wide enough around the
    /// inlier support that rejection sampling has room to succeed.
    fn planting_box(self) -> ([f64; 2], [f64; 2]) {
        match self {
            Family::Synthetic10 => ([-21.4, -21.4], [35.6, 33.7]),
            Family::Spiral => ([-20.0, -20.0], [20.0, 20.0]),
            Family::Sandwich => ([-20.0, -20.0], [60.0, 30.0]),
            Family::Vdensity => ([-25.0, -35.0], [70.0, 35.0]),
            Family::Blobs => ([-18.0, -18.0], [18.0, 18.0]),
        }
    }

    /// Cap, as a multiple of the inlier margin, on how far past the margin
    /// a planted center may sit. Keeps planted structures in a band that
    /// hugs the inlier support instead of drifting into box corners, so
    /// the short end of the distance spectrum stays representative.
    fn planting_reach(self) -> Option<f64> {
        match self {
            Family::Synthetic10 => Some(1.8),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MicroClusterSpec {
    pub size: usize,
    pub spread: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub family: Family,
    pub n_inliers: usize,
    pub micro_clusters: Vec<MicroClusterSpec>,
    pub n_scattered: usize,
    /// Minimum clearance between planted centers and the inlier support,
    /// as a multiple of the micro-cluster spread.
    pub separation: f64,
    pub seed: u64,
}

impl GeneratorSpec {
    fn named(family: Family, n_inliers: usize, clusters: usize, separation: f64, seed: u64) -> Self {
        Self {
            family,
            n_inliers,
            micro_clusters: vec![
                MicroClusterSpec {
                    size: 10,
                    spread: 0.25,
                };
                clusters
            ],
            n_scattered: 2,
            separation,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_inliers < 1 {
            return Err(Error::InvalidArgument("need at least one inlier".into()));
        }
        for (i, c) in self.micro_clusters.iter().enumerate() {
            if c.size < 2 {
                return Err(Error::InvalidArgument(format!(
                    "micro-cluster {i} has size {} but needs at least 2",
                    c.size
                )));
            }
            if !(c.spread > 0.0 && c.spread.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "micro-cluster {i} spread must be positive and finite"
                )));
            }
        }
        if !(self.separation > 0.0 && self.separation.is_finite()) {
            return Err(Error::InvalidArgument(
                "separation must be positive and finite".into(),
            ));
        }
        Ok(())
    }
}

/// 900 inliers in three round regions, 10 micro-clusters of 10, 2
/// scattered; n = 1002.
pub fn synthetic10(seed: u64) -> GeneratorSpec {
    GeneratorSpec::named(Family::Synthetic10, 900, 10, 42.0, seed)
}

/// 4000 inliers on an Archimedean spiral, 6 micro-clusters of 10, 2
/// scattered; n = 4062.
pub fn spiral(seed: u64) -> GeneratorSpec {
    GeneratorSpec::named(Family::Spiral, 4000, 6, 30.0, seed)
}

/// 6000 inliers in two parallel bands, 6 micro-clusters of 10, 2
/// scattered; n = 6062.
pub fn sandwich(seed: u64) -> GeneratorSpec {
    GeneratorSpec::named(Family::Sandwich, 6000, 6, 30.0, seed)
}

/// 6000 inliers in two blobs of very different density, 6 micro-clusters
/// of 10, 2 scattered; n = 6062.
pub fn vdensity(seed: u64) -> GeneratorSpec {
    GeneratorSpec::named(Family::Vdensity, 6000, 6, 30.0, seed)
}

/// Single Gaussian blob with a configurable plant layout.
pub fn blobs(seed: u64) -> GeneratorSpec {
    GeneratorSpec::named(Family::Blobs, 1000, 4, 30.0, seed)
}

fn gauss2(rng: &mut DetRng, center: [f64; 2], stdev: f64) -> [f64; 2] {
    let zx: f64 = rng.sample(StandardNormal);
    let zy: f64 = rng.sample(StandardNormal);
    [center[0] + stdev * zx, center[1] + stdev * zy]
}

fn sample_inliers(spec: &GeneratorSpec, rng: &mut DetRng) -> Vec<[f64; 2]> {
    let n = spec.n_inliers;
    let mut pts = Vec::with_capacity(n);
    match spec.family {
        Family::Synthetic10 => {
            // Three round inlier regions, each a spiral-lattice disc of
            // small tight clumps, arranged so their rims touch and the
            // support stays connected. Every clump is separated from its
            // neighbors by clearly more than its own diameter, so from any
            // inlier the first big jump in sorted distances sits at the
            // clump boundary and neighborhood cuts stay local. The
            // connected support keeps subsample ball radii far below the
            // planting margin at every subsample size, so planted points
            // are never absorbed by an oversized ball.
            let blobs = [[0.0, 0.0], [14.2, 0.0], [7.1, 12.3]];
            let golden = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
            let mut clumps: Vec<[f64; 2]> = Vec::with_capacity(90);
            for &b in &blobs {
                for k in 0..30 {
                    let r = 6.9 * (((k as f64) + 0.5) / 30.0).sqrt();
                    let theta = golden * k as f64 + rng.gen_range(-0.04..0.04);
                    clumps.push([b[0] + r * theta.cos(), b[1] + r * theta.sin()]);
                }
            }
            for i in 0..n {
                let c = clumps[i % clumps.len()];
                let p = loop {
                    let p = gauss2(rng, c, 0.08);
                    if dist2(p, c) <= 0.25 {
                        break p;
                    }
                };
                pts.push(p);
            }
        }
        Family::Blobs => {
            for _ in 0..n {
                pts.push(gauss2(rng, [0.0, 0.0], 2.0));
            }
        }
        Family::Spiral => {
            // Uniform in arc length, radius growing linearly with angle.
            for _ in 0..n {
                let u: f64 = rng.gen();
                let theta = 6.0 * std::f64::consts::PI * u.sqrt();
                let r = 1.0 + 0.35 * theta + 0.15 * rng.sample::<f64, _>(StandardNormal);
                pts.push([r * theta.cos(), r * theta.sin()]);
            }
        }
        Family::Sandwich => {
            for i in 0..n {
                let y0 = if i % 2 == 0 { 0.0 } else { 10.0 };
                let x = rng.gen_range(0.0..40.0);
                let y = y0 + 0.5 * rng.sample::<f64, _>(StandardNormal);
                pts.push([x, y]);
            }
        }
        Family::Vdensity => {
            for i in 0..n {
                if i % 2 == 0 {
                    pts.push(gauss2(rng, [0.0, 0.0], 1.0));
                } else {
                    pts.push(gauss2(rng, [30.0, 0.0], 5.0));
                }
            }
        }
    }
    pts
}

fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    (dx * dx + dy * dy).sqrt()
}

/// Draw a point in the box that clears `margin_inliers` from every inlier
/// and `margin_others` from every previously planted center, staying within
/// the family's reach cap of the inlier support when one is set.
fn plant_center(
    rng: &mut DetRng,
    family: Family,
    inliers: &[[f64; 2]],
    planted: &[[f64; 2]],
    margin_inliers: f64,
    margin_others: f64,
) -> Result<[f64; 2]> {
    let (lo, hi) = family.planting_box();
    let reach = family.planting_reach().map(|m| m * margin_inliers);
    for _ in 0..CENTER_RETRIES {
        let cand = [rng.gen_range(lo[0]..hi[0]), rng.gen_range(lo[1]..hi[1])];
        let nearest_inlier = inliers
            .iter()
            .map(|&p| dist2(cand, p))
            .fold(f64::INFINITY, f64::min);
        if nearest_inlier <= margin_inliers {
            continue;
        }
        if let Some(cap) = reach {
            if nearest_inlier > cap {
                continue;
            }
        }
        let clear_planted = planted.iter().all(|&p| dist2(cand, p) > margin_others);
        if clear_planted {
            return Ok(cand);
        }
    }
    Err(Error::Generation(format!(
        "no room for a planted center after {CENTER_RETRIES} rejection rounds \
         (separation too large for the {family:?} layout)"
    )))
}

pub fn generate(spec: &GeneratorSpec) -> Result<(Dataset, GroundTruth)> {
    spec.validate()?;
    let mut rng = DetRng::with_stream(spec.seed, spec.family.rng_stream());
    let inliers = sample_inliers(spec, &mut rng);

    let spread_ref = spec
        .micro_clusters
        .iter()
        .map(|c| c.spread)
        .fold(0.25, f64::max);
    let mut centers: Vec<[f64; 2]> = Vec::new();
    let mut cluster_points: Vec<Vec<[f64; 2]>> = Vec::new();
    for c in &spec.micro_clusters {
        let margin = spec.separation * c.spread;
        let mutual = spec.separation * spread_ref;
        let center = plant_center(&mut rng, spec.family, &inliers, &centers, margin, mutual)?;
        let mut members = Vec::with_capacity(c.size);
        for _ in 0..c.size {
            // Clamp the tail so the cluster diameter stays far below the
            // planting margin.
            let mut tries = 0;
            let p = loop {
                let p = gauss2(&mut rng, center, c.spread);
                if dist2(p, center) <= 3.5 * c.spread {
                    break p;
                }
                tries += 1;
                if tries > POINT_RETRIES {
                    return Err(Error::Generation(
                        "micro-cluster point sampling failed to stay near its center".into(),
                    ));
                }
            };
            members.push(p);
        }
        centers.push(center);
        cluster_points.push(members);
    }

    let scatter_margin = spec.separation * spread_ref;
    let mut scattered: Vec<[f64; 2]> = Vec::new();
    for _ in 0..spec.n_scattered {
        let mut all_planted = centers.clone();
        all_planted.extend_from_slice(&scattered);
        let p = plant_center(
            &mut rng,
            spec.family,
            &inliers,
            &all_planted,
            scatter_margin,
            scatter_margin,
        )?;
        scattered.push(p);
    }

    let mut points: Vec<([f64; 2], i64)> = Vec::with_capacity(
        spec.n_inliers + spec.micro_clusters.iter().map(|c| c.size).sum::<usize>()
            + spec.n_scattered,
    );
    for &p in &inliers {
        points.push((p, 0));
    }
    for (k, members) in cluster_points.iter().enumerate() {
        for &p in members {
            points.push((p, (k + 1) as i64));
        }
    }
    for &p in &scattered {
        points.push((p, -1));
    }
    // Interleave the classes; block layout would leak labels through the
    // row order.
    points.shuffle(&mut rng);

    let rows: Vec<Vec<f64>> = points.iter().map(|(p, _)| p.to_vec()).collect();
    let labels: Vec<i64> = points.iter().map(|&(_, l)| l).collect();
    let ds = Dataset::from_rows(rows)?;
    let truth = GroundTruth::new(labels)?;
    assert_separated(&ds, &truth)?;
    Ok((ds, truth))
}

/// Re-check the premise the planting margins are meant to guarantee:
/// every micro-cluster's diameter is smaller than its distance to the
/// nearest non-member.
fn assert_separated(ds: &Dataset, truth: &GroundTruth) -> Result<()> {
    for k in 1..=truth.n_clusters() {
        let members = truth.cluster_members(k);
        let mut diameter = 0.0f64;
        for a in &members {
            for b in &members {
                let d = euclidean(ds.point(a), ds.point(b));
                if d > diameter {
                    diameter = d;
                }
            }
        }
        let mut nearest = f64::INFINITY;
        for a in &members {
            for other in 0..ds.n() {
                if members.contains(other) {
                    continue;
                }
                let d = euclidean(ds.point(a), ds.point(other));
                if d < nearest {
                    nearest = d;
                }
            }
        }
        if diameter >= nearest {
            return Err(Error::Generation(format!(
                "micro-cluster {k} is not well separated: diameter {diameter} \
                 vs nearest non-member {nearest}"
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct InjectedCluster {
    pub size: usize,
    /// Center displacement from the chosen component mean, in units of
    /// that component's stdev.
    pub offset_scale: f64,
    /// Point spread, in units of the component's stdev.
    pub stdev_scale: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InjectionSpec {
    pub k: usize,
    pub clusters: Vec<InjectedCluster>,
    pub seed: u64,
}

impl InjectionSpec {
    fn validate(&self, n: usize) -> Result<()> {
        if self.k < 1 {
            return Err(Error::InvalidArgument("need at least one component".into()));
        }
        if n < self.k {
            return Err(Error::InvalidArgument(format!(
                "cannot fit {} components to {n} inliers",
                self.k
            )));
        }
        for (i, c) in self.clusters.iter().enumerate() {
            if c.size < 2 {
                return Err(Error::InvalidArgument(format!(
                    "injected cluster {i} has size {} but needs at least 2",
                    c.size
                )));
            }
        }
        Ok(())
    }
}

struct Gmm {
    weights: Vec<f64>,
    means: Vec<Vec<f64>>,
    vars: Vec<Vec<f64>>,
}

const EM_ITERS: usize = 50;
const EM_RESTARTS: u64 = 5;

fn fit_gmm(ds: &Dataset, k: usize, rng: &mut DetRng) -> Result<Gmm> {
    let n = ds.n();
    let d = ds.d();

    let mut global_var = vec![0.0f64; d];
    let mut mean = vec![0.0f64; d];
    for i in 0..n {
        for (j, &v) in ds.point(i).iter().enumerate() {
            mean[j] += v;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    for i in 0..n {
        for (j, &v) in ds.point(i).iter().enumerate() {
            global_var[j] += (v - mean[j]) * (v - mean[j]);
        }
    }
    for v in &mut global_var {
        *v = (*v / n as f64).max(1e-12);
    }
    let floor: Vec<f64> = global_var.iter().map(|&v| 1e-6 * v + 1e-12).collect();

    let init = crate::model::subsample_without_replacement(rng, n, k)?;
    let mut means: Vec<Vec<f64>> = init.iter().map(|i| ds.point(i).to_vec()).collect();
    let mut vars: Vec<Vec<f64>> = vec![global_var.clone(); k];
    let mut weights = vec![1.0 / k as f64; k];

    let mut resp = vec![0.0f64; n * k];
    for _ in 0..EM_ITERS {
        // E-step in log space.
        for i in 0..n {
            let x = ds.point(i);
            let mut logp = vec![0.0f64; k];
            for c in 0..k {
                let mut lp = weights[c].max(1e-300).ln();
                for j in 0..d {
                    let diff = x[j] - means[c][j];
                    lp -= 0.5
                        * ((2.0 * std::f64::consts::PI * vars[c][j]).ln()
                            + diff * diff / vars[c][j]);
                }
                logp[c] = lp;
            }
            let max = logp.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut total = 0.0;
            for c in 0..k {
                let e = (logp[c] - max).exp();
                resp[i * k + c] = e;
                total += e;
            }
            for c in 0..k {
                resp[i * k + c] /= total;
            }
        }
        // M-step.
        for c in 0..k {
            let nk: f64 = (0..n).map(|i| resp[i * k + c]).sum();
            weights[c] = nk / n as f64;
            if weights[c] < 1e-6 {
                return Err(Error::Generation("mixture component collapsed".into()));
            }
            for j in 0..d {
                let mut m = 0.0;
                for i in 0..n {
                    m += resp[i * k + c] * ds.point(i)[j];
                }
                means[c][j] = m / nk;
            }
            for j in 0..d {
                let mut v = 0.0;
                for i in 0..n {
                    let diff = ds.point(i)[j] - means[c][j];
                    v += resp[i * k + c] * diff * diff;
                }
                vars[c][j] = (v / nk).max(floor[j]);
            }
        }
    }
    Ok(Gmm {
        weights,
        means,
        vars,
    })
}

fn unit_direction(rng: &mut DetRng, d: usize) -> Vec<f64> {
    loop {
        let z: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return z.into_iter().map(|v| v / norm).collect();
        }
    }
}

/// Plant micro-clusters relative to a Gaussian-mixture fit of the host
/// points: each cluster sits `offset_scale` component-stdevs away from a
/// randomly chosen component mean and spreads `stdev_scale` of it.
pub fn inject(inliers: &Dataset, spec: &InjectionSpec) -> Result<(Dataset, GroundTruth)> {
    spec.validate(inliers.n())?;
    let d = inliers.d();

    let mut gmm = None;
    for attempt in 0..EM_RESTARTS {
        let mut rng = DetRng::with_stream(spec.seed, 20 + attempt);
        match fit_gmm(inliers, spec.k, &mut rng) {
            Ok(g) => {
                gmm = Some((g, 20 + attempt));
                break;
            }
            Err(Error::Generation(_)) if attempt + 1 < EM_RESTARTS => continue,
            Err(e) => return Err(e),
        }
    }
    let (gmm, stream) = gmm.ok_or_else(|| {
        Error::Generation("mixture fitting collapsed on every restart".into())
    })?;
    // Continue drawing from the stream that produced the accepted fit.
    let mut rng = DetRng::with_stream(spec.seed, 100 + stream);

    let mut rows: Vec<Vec<f64>> = inliers.rows().map(|r| r.to_vec()).collect();
    let mut labels = vec![0i64; inliers.n()];
    for (ci, cluster) in spec.clusters.iter().enumerate() {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut comp = gmm.weights.len() - 1;
        for (c, &w) in gmm.weights.iter().enumerate() {
            acc += w;
            if u < acc {
                comp = c;
                break;
            }
        }
        let sigma = (gmm.vars[comp].iter().sum::<f64>() / d as f64).sqrt();
        let dir = unit_direction(&mut rng, d);
        let center: Vec<f64> = gmm.means[comp]
            .iter()
            .zip(&dir)
            .map(|(m, u)| m + cluster.offset_scale * sigma * u)
            .collect();
        for _ in 0..cluster.size {
            let p: Vec<f64> = center
                .iter()
                .map(|c| c + cluster.stdev_scale * sigma * rng.sample::<f64, _>(StandardNormal))
                .collect();
            rows.push(p);
            labels.push((ci + 1) as i64);
        }
    }

    let ds = Dataset::from_rows(rows)?;
    let truth = GroundTruth::new(labels)?;
    Ok((ds, truth))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn label_counts(truth: &GroundTruth) -> (usize, usize, Vec<usize>) {
        let mut inliers = 0;
        let mut scattered = 0;
        let mut clusters = vec![0usize; truth.n_clusters()];
        for &l in truth.labels() {
            match l {
                0 => inliers += 1,
                -1 => scattered += 1,
                k => clusters[(k - 1) as usize] += 1,
            }
        }
        (inliers, scattered, clusters)
    }

    #[test]
    fn synthetic10_cardinalities() {
        let (ds, truth) = generate(&synthetic10(0)).unwrap();
        assert_eq!(ds.n(), 1002);
        assert_eq!(ds.d(), 2);
        assert_eq!(truth.n_clusters(), 10);
        let (inliers, scattered, clusters) = label_counts(&truth);
        assert_eq!(inliers, 900);
        assert_eq!(scattered, 2);
        assert_eq!(clusters, vec![10; 10]);
        assert_eq!(truth.outlier_indices().len(), 102);
    }

    #[test]
    fn spiral_cardinalities() {
        let (ds, truth) = generate(&spiral(1)).unwrap();
        assert_eq!(ds.n(), 4062);
        let (inliers, scattered, clusters) = label_counts(&truth);
        assert_eq!(inliers, 4000);
        assert_eq!(scattered, 2);
        assert_eq!(clusters, vec![10; 6]);
    }

    #[test]
    fn sandwich_cardinalities() {
        let (ds, truth) = generate(&sandwich(2)).unwrap();
        assert_eq!(ds.n(), 6062);
        let (inliers, _, clusters) = label_counts(&truth);
        assert_eq!(inliers, 6000);
        assert_eq!(clusters.len(), 6);
    }

    #[test]
    fn vdensity_cardinalities() {
        let (ds, truth) = generate(&vdensity(3)).unwrap();
        assert_eq!(ds.n(), 6062);
        assert_eq!(truth.n_clusters(), 6);
    }

    #[test]
    fn blobs_without_plants_is_all_inliers() {
        let mut spec = blobs(4);
        spec.micro_clusters.clear();
        spec.n_scattered = 0;
        spec.n_inliers = 50;
        let (ds, truth) = generate(&spec).unwrap();
        assert_eq!(ds.n(), 50);
        assert_eq!(truth.n_clusters(), 0);
        assert!(truth.labels().iter().all(|&l| l == 0));
    }

    #[test]
    fn generation_is_deterministic() {
        let (a, ta) = generate(&synthetic10(3)).unwrap();
        let (b, tb) = generate(&synthetic10(3)).unwrap();
        assert_eq!(a.as_flat(), b.as_flat());
        assert_eq!(ta.labels(), tb.labels());
        let (c, _) = generate(&synthetic10(4)).unwrap();
        assert_ne!(a.as_flat(), c.as_flat());
    }

    #[test]
    fn planted_clusters_are_well_separated() {
        let (ds, truth) = generate(&synthetic10(0)).unwrap();
        for k in 1..=truth.n_clusters() {
            let members = truth.cluster_members(k);
            let mut diameter = 0.0f64;
            for a in &members {
                for b in &members {
                    diameter = diameter.max(euclidean(ds.point(a), ds.point(b)));
                }
            }
            let mut nearest = f64::INFINITY;
            for a in &members {
                for other in 0..ds.n() {
                    if !members.contains(other) {
                        nearest = nearest.min(euclidean(ds.point(a), ds.point(other)));
                    }
                }
            }
            assert!(diameter < nearest);
        }
    }

    #[test]
    fn infeasible_separation_errors() {
        let mut spec = blobs(0);
        spec.separation = 1e6;
        match generate(&spec) {
            Err(Error::Generation(_)) => {}
            other => panic!("expected generation error, got {other:?}"),
        }
    }

    fn host_blob(n: usize, seed: u64) -> Dataset {
        let mut rng = DetRng::with_stream(seed, 99);
        let rows = (0..n).map(|_| gauss2(&mut rng, [0.0, 0.0], 1.0).to_vec()).collect();
        Dataset::from_rows(rows).unwrap()
    }

    #[test]
    fn inject_cardinality_and_labels() {
        let host = host_blob(200, 0);
        let spec = InjectionSpec {
            k: 2,
            clusters: vec![InjectedCluster {
                size: 10,
                offset_scale: 3.0,
                stdev_scale: 0.5,
            }],
            seed: 1,
        };
        let (ds, truth) = inject(&host, &spec).unwrap();
        assert_eq!(ds.n(), 210);
        assert_eq!(truth.n_clusters(), 1);
        assert!(truth.labels()[..200].iter().all(|&l| l == 0));
        assert!(truth.labels()[200..].iter().all(|&l| l == 1));
    }

    #[test]
    fn inject_zero_scales_collapse_to_a_component_mean() {
        let host = host_blob(150, 2);
        let spec = InjectionSpec {
            k: 3,
            clusters: vec![InjectedCluster {
                size: 5,
                offset_scale: 0.0,
                stdev_scale: 0.0,
            }],
            seed: 7,
        };
        let (ds, _) = inject(&host, &spec).unwrap();
        let first = ds.point(150).to_vec();
        for i in 150..155 {
            assert_eq!(ds.point(i), &first[..]);
        }
    }

    #[test]
    fn inject_far_offset_lands_outside_the_inlier_mass() {
        let host = host_blob(500, 5);
        let spec = InjectionSpec {
            k: 1,
            clusters: vec![InjectedCluster {
                size: 10,
                offset_scale: 6.0,
                stdev_scale: 0.3,
            }],
            seed: 11,
        };
        let (ds, truth) = inject(&host, &spec).unwrap();

        let mut mean = [0.0f64; 2];
        for i in 0..500 {
            mean[0] += ds.point(i)[0];
            mean[1] += ds.point(i)[1];
        }
        mean[0] /= 500.0;
        mean[1] /= 500.0;
        let mut radii: Vec<f64> = (0..500)
            .map(|i| euclidean(ds.point(i), &mean))
            .collect();
        radii.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
        let q99 = radii[494];

        for i in truth.cluster_members(1).iter() {
            assert!(euclidean(ds.point(i), &mean) > q99);
        }
    }

    #[test]
    fn inject_is_deterministic() {
        let host = host_blob(120, 8);
        let spec = InjectionSpec {
            k: 2,
            clusters: vec![InjectedCluster {
                size: 6,
                offset_scale: 4.0,
                stdev_scale: 0.4,
            }],
            seed: 3,
        };
        let (a, _) = inject(&host, &spec).unwrap();
        let (b, _) = inject(&host, &spec).unwrap();
        assert_eq!(a.as_flat(), b.as_flat());
    }
}
