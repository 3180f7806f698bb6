//! The sequential pruning ensemble, the two-phase hyperensemble, and the
//! score-only pruning ablation.
//!
//! One sequential-ensemble iteration scores the dataset with a hypersphere
//! model trained on the current clean set, folds the round into a running
//! average, picks representatives among the top scorers by maximin
//! sampling, and keeps the ones whose "clothes-line" (cumulative average
//! neighbor score by distance) stays high and flat out to the subsample
//! radius. Each kept representative's gap-bounded neighborhood is wired
//! into the neighbor graph and withheld from the next subsample pool. The
//! pool is rebuilt from scratch every iteration, so detected micro-cluster
//! members stay out only while their representatives keep scoring high,
//! and an occasional over-wide neighborhood costs a single round. Edge
//! weights tell persistent detections (bumped every round) from one-off
//! mistakes, which is what the cluster extraction thresholds on.
//!
//! The two-phase variant first runs a hyperensemble of short sequential
//! runs with subsample sizes fanned over `[2, psi_max]` purely to build
//! graph evidence, removes the warm-up clusters from the candidate pool,
//! and then runs the remaining iterations at full `psi_max` on the cleaned
//! pool while scoring every point.

use std::sync::OnceLock;

use rayon::prelude::*;
use serde::Serialize;

use crate::clusters::{find_clusters, MicroClusterSet, NeighborGraph};
use crate::eval::count_masking;
use crate::inne;
use crate::model::{
    distances_to, euclidean, Dataset, DetRng, Error, GroundTruth, IndexSet, Result, ScoreVector,
};
use crate::peaks::{find_first_gap, DEFAULT_SIGMA_MULT};
use crate::sampling::{maximin_sample, DEFAULT_STOP_RATIO};

/// Default check-point count: ceil(0.1 n).
pub fn default_p(n: usize) -> usize {
    (n as f64 * 0.1).ceil() as usize
}

#[derive(Debug, Clone, Serialize)]
pub struct Dmca0Config {
    /// Subsample size; clamped per-iteration when the clean set shrinks
    /// below it.
    pub psi: usize,
    pub t: usize,
    /// Check-point count: how many top scorers feed representative
    /// selection each iteration.
    pub p: usize,
    pub stop_ratio: f64,
    pub sigma_mult: f64,
    pub tau_e_distinct: bool,
    pub seed: u64,
    /// Keep every per-round score vector in the result (test support).
    pub record_rounds: bool,
}

impl Dmca0Config {
    pub fn defaults(psi: usize, n: usize, seed: u64) -> Self {
        Self {
            psi,
            t: 100,
            p: default_p(n),
            stop_ratio: DEFAULT_STOP_RATIO,
            sigma_mult: DEFAULT_SIGMA_MULT,
            tau_e_distinct: true,
            seed,
            record_rounds: false,
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.psi < 2 {
            return Err(Error::InvalidArgument("psi must be at least 2".into()));
        }
        if self.t < 1 {
            return Err(Error::InvalidArgument("t must be at least 1".into()));
        }
        if self.p < 1 || self.p > n {
            return Err(Error::InvalidArgument(format!(
                "p = {} outside 1..={n}",
                self.p
            )));
        }
        if !(0.0 < self.stop_ratio && self.stop_ratio < 1.0) {
            return Err(Error::InvalidArgument("stop ratio outside (0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DmcaConfig {
    pub psi_max: usize,
    pub t: usize,
    pub p: usize,
    pub stop_ratio: f64,
    pub sigma_mult: f64,
    pub tau_e_distinct: bool,
    /// Run every warm-up member for a single iteration instead of member
    /// i running i iterations (cost-comparison mode).
    pub warmup_flat: bool,
    pub seed: u64,
}

impl DmcaConfig {
    pub fn defaults(psi_max: usize, n: usize, seed: u64) -> Self {
        Self {
            psi_max,
            t: 100,
            p: default_p(n),
            stop_ratio: DEFAULT_STOP_RATIO,
            sigma_mult: DEFAULT_SIGMA_MULT,
            tau_e_distinct: true,
            warmup_flat: false,
            seed,
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.psi_max < 2 {
            return Err(Error::InvalidArgument("psi_max must be at least 2".into()));
        }
        if self.t < 2 {
            return Err(Error::InvalidArgument(
                "the two-phase ensemble needs t >= 2".into(),
            ));
        }
        if self.p < 1 || self.p > n {
            return Err(Error::InvalidArgument(format!(
                "p = {} outside 1..={n}",
                self.p
            )));
        }
        if !(0.0 < self.stop_ratio && self.stop_ratio < 1.0) {
            return Err(Error::InvalidArgument("stop ratio outside (0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IterationDiag {
    pub iteration: usize,
    pub clean_size: usize,
    pub psi_used: usize,
    pub psi_clamped: bool,
    pub h_size: usize,
    pub hc_size: usize,
    /// Points this iteration's pruning set removed from the pool.
    pub pruned: usize,
    /// True micro-clusters with two or more members in this iteration's
    /// subsample; present when ground truth was supplied.
    pub masking: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct Dmca0Result {
    pub scores: ScoreVector,
    pub clusters: MicroClusterSet,
    pub graph: NeighborGraph,
    pub diagnostics: Vec<IterationDiag>,
    /// Per-round score vectors; populated only under `record_rounds`.
    pub rounds: Vec<ScoreVector>,
}

impl Dmca0Result {
    /// Per-iteration masking observations, when ground truth was supplied.
    pub fn masking_counts(&self) -> Option<Vec<usize>> {
        self.diagnostics.iter().map(|d| d.masking).collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MemberDiag {
    pub member: usize,
    pub psi: usize,
    pub iterations: Vec<IterationDiag>,
}

#[derive(Debug, Clone)]
pub struct DmcaResult {
    /// Phase-2 running average over the full dataset.
    pub scores: ScoreVector,
    /// Clusters of the merged warm-up + phase-2 graph.
    pub clusters: MicroClusterSet,
    pub graph: NeighborGraph,
    pub warmup_clusters: MicroClusterSet,
    pub warmup: Vec<MemberDiag>,
    pub phase2: Vec<IterationDiag>,
}

impl DmcaResult {
    /// One masking observation per top-level iteration unit: each warm-up
    /// member's final subsample, then each phase-2 subsample. Present when
    /// ground truth was supplied.
    pub fn masking_counts(&self) -> Option<Vec<usize>> {
        let mut counts = Vec::with_capacity(self.warmup.len() + self.phase2.len());
        for m in &self.warmup {
            counts.push(m.iterations.last()?.masking?);
        }
        for d in &self.phase2 {
            counts.push(d.masking?);
        }
        Some(counts)
    }
}

/// Memoized per-anchor sorted distance rows, shared across iterations,
/// ensemble members, and threads. Rows are pure functions of the dataset,
/// so concurrent initialization is harmless.
pub(crate) struct SortedDistCache {
    rows: Vec<OnceLock<CachedRow>>,
}

pub(crate) struct CachedRow {
    /// Dataset indices by ascending (distance, index).
    order: Box<[u32]>,
    dists: Box<[f64]>,
}

impl SortedDistCache {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            rows: (0..n).map(|_| OnceLock::new()).collect(),
        }
    }

    fn row(&self, ds: &Dataset, anchor: usize) -> &CachedRow {
        self.rows[anchor].get_or_init(|| {
            let raw = distances_to(ds, ds.point(anchor));
            let mut order: Vec<u32> = (0..raw.len() as u32).collect();
            order.sort_unstable_by(|&a, &b| {
                raw[a as usize]
                    .partial_cmp(&raw[b as usize])
                    .unwrap()
                    .then(a.cmp(&b))
            });
            let dists: Vec<f64> = order.iter().map(|&i| raw[i as usize]).collect();
            CachedRow {
                order: order.into_boxed_slice(),
                dists: dists.into_boxed_slice(),
            }
        })
    }
}

/// Distances from an anchor to every point, ascending, with the cumulative
/// mean of the neighbors' scores along the way. The anchor itself, when it
/// is a dataset point, sits first at distance zero, so `cum_scores[0]` is
/// its own score.
#[derive(Debug, Clone)]
pub struct ClothesLine {
    /// Dataset indices by ascending (distance, index).
    pub order: Vec<usize>,
    pub distances: Vec<f64>,
    /// `cum_scores[i]` is the mean score of the `i + 1` nearest points.
    pub cum_scores: Vec<f64>,
}

pub fn clothes_line(ds: &Dataset, scores: &[f64], anchor: &[f64]) -> ClothesLine {
    assert_eq!(scores.len(), ds.n());
    let raw = distances_to(ds, anchor);
    let mut order: Vec<usize> = (0..raw.len()).collect();
    order.sort_unstable_by(|&a, &b| raw[a].partial_cmp(&raw[b]).unwrap().then(a.cmp(&b)));
    let distances: Vec<f64> = order.iter().map(|&i| raw[i]).collect();
    let mut cum_scores = Vec::with_capacity(order.len());
    let mut sum = 0.0;
    for (i, &idx) in order.iter().enumerate() {
        sum += scores[idx];
        cum_scores.push(sum / (i + 1) as f64);
    }
    ClothesLine {
        order,
        distances,
        cum_scores,
    }
}

fn cum_scores_u32(order: &[u32], scores: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(order.len());
    let mut sum = 0.0;
    for (i, &idx) in order.iter().enumerate() {
        sum += scores[idx as usize];
        out.push(sum / (i + 1) as f64);
    }
    out
}

/// Distance-weighted area under the clothes-line out to `r_max`: for every
/// consecutive pair whose lower endpoint is within `r_max`, add
/// `(L[i+1] + L[i]) / 2 * (L[i+1] - L[i]) * a[i]`.
pub fn weighted_area(cl: &ClothesLine, r_max: f64) -> f64 {
    weighted_area_parts(&cl.distances, &cl.cum_scores, r_max)
}

fn weighted_area_parts(dists: &[f64], cum: &[f64], r_max: f64) -> f64 {
    let mut total = 0.0;
    for i in 0..dists.len().saturating_sub(1) {
        if dists[i] > r_max {
            break;
        }
        total += 0.5 * (dists[i + 1] + dists[i]) * (dists[i + 1] - dists[i]) * cum[i];
    }
    total
}

/// Largest over representatives of the smallest distance to any center.
pub fn r_max(ds: &Dataset, reps: &IndexSet, centers: &IndexSet) -> Result<f64> {
    if reps.is_empty() || centers.is_empty() {
        return Err(Error::InvalidArgument(
            "radius bound needs non-empty representative and center sets".into(),
        ));
    }
    let mut best = 0.0f64;
    for x in reps {
        let px = ds.point(x);
        let mut min_d = f64::INFINITY;
        for c in centers {
            let d = euclidean(px, ds.point(c));
            if d < min_d {
                min_d = d;
            }
        }
        if min_d > best {
            best = min_d;
        }
    }
    Ok(best)
}

fn top_p_indices(scores: &[f64], p: usize) -> IndexSet {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_unstable_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap().then(a.cmp(&b)));
    idx.truncate(p);
    IndexSet::from_unsorted(idx)
}

/// Sequential pruning ensemble. Trains on `initial_clean` (everything by
/// default) minus the current iteration's pruning set, scores the whole
/// dataset, and accumulates the neighbor graph across iterations.
pub fn dmca0(
    ds: &Dataset,
    cfg: &Dmca0Config,
    initial_clean: Option<&IndexSet>,
    truth: Option<&GroundTruth>,
) -> Result<Dmca0Result> {
    let full = IndexSet::full(ds.n());
    let start = initial_clean.unwrap_or(&full);
    let cache = SortedDistCache::new(ds.n());
    let mut rng = DetRng::with_stream(cfg.seed, 0);
    run_dmca0(ds, cfg, start, truth, &mut rng, &cache)
}

fn run_dmca0(
    ds: &Dataset,
    cfg: &Dmca0Config,
    initial_clean: &IndexSet,
    truth: Option<&GroundTruth>,
    rng: &mut DetRng,
    cache: &SortedDistCache,
) -> Result<Dmca0Result> {
    cfg.validate(ds.n())?;
    if initial_clean.len() < 2 {
        return Err(Error::InvalidArgument(
            "candidate pool needs at least 2 points".into(),
        ));
    }

    let n = ds.n();
    let mut s_bar = vec![0.0f64; n];
    let mut graph = NeighborGraph::new(n);
    let mut pruned = vec![false; n];
    let mut clean = initial_clean.clone();
    let mut frozen = false;
    let mut diagnostics = Vec::with_capacity(cfg.t);
    let mut rounds = Vec::new();
    let mut touched: Vec<usize> = Vec::new();

    for iteration in 1..=cfg.t {
        let psi_used = cfg.psi.min(clean.len());
        let psi_clamped = psi_used < cfg.psi;
        let model = inne::fit(ds, &clean, psi_used, rng)?;
        let round = inne::score(&model, ds);
        let prev_weight = (iteration - 1) as f64;
        for (acc, &v) in s_bar.iter_mut().zip(&round) {
            *acc = (*acc * prev_weight + v) / iteration as f64;
        }
        if cfg.record_rounds {
            rounds.push(round);
        }

        let centers = model.centers();
        let masking = truth.map(|t| count_masking(&centers, t));

        let mut h_size = 0;
        let mut hc_size = 0;
        let mut pruned_count = 0;
        if !frozen {
            let h_top = top_p_indices(&s_bar, cfg.p);
            let trace = maximin_sample(ds, &h_top, &s_bar, cfg.stop_ratio)?;
            let h = trace.selected_set();

            let bound = r_max(ds, &h, &centers)?;
            let anchors = h.union(&centers);
            let areas: Vec<f64> = anchors
                .as_slice()
                .par_iter()
                .map(|&x| {
                    let row = cache.row(ds, x);
                    let cum = cum_scores_u32(&row.order, &s_bar);
                    weighted_area_parts(&row.dists, &cum, bound)
                })
                .collect();
            let mean_area = areas.iter().sum::<f64>() / areas.len() as f64;

            let h_c: Vec<usize> = anchors
                .iter()
                .zip(&areas)
                .filter(|&(x, &a)| h.contains(x) && a > mean_area)
                .map(|(x, _)| x)
                .collect();

            // The pruning set starts empty every iteration, so one bad
            // round costs one round: the next clean set is rebuilt from
            // the pool minus only this iteration's neighborhoods.
            for &i in &touched {
                pruned[i] = false;
            }
            touched.clear();
            for &x in &h_c {
                let row = cache.row(ds, x);
                let tau_n = find_first_gap(&row.dists, cfg.sigma_mult)?.threshold;
                let cut = row.dists.partition_point(|&d| d < tau_n);
                let neighbors = IndexSet::from_unsorted(
                    row.order[..cut].iter().map(|&i| i as usize).collect(),
                );
                graph.bump_edges(x, &neighbors);
                for y in &neighbors {
                    if !pruned[y] {
                        pruned[y] = true;
                        touched.push(y);
                    }
                }
                if !pruned[x] {
                    pruned[x] = true;
                    touched.push(x);
                }
            }

            let remaining: Vec<usize> =
                initial_clean.iter().filter(|&i| !pruned[i]).collect();
            if remaining.len() < 2 {
                frozen = true;
            } else {
                clean = IndexSet::from_sorted(remaining);
            }
            h_size = h.len();
            hc_size = h_c.len();
            pruned_count = touched.len();
        }

        diagnostics.push(IterationDiag {
            iteration,
            clean_size: clean.len(),
            psi_used,
            psi_clamped,
            h_size,
            hc_size,
            pruned: pruned_count,
            masking,
        });
    }

    let clusters = find_clusters(&graph, cfg.sigma_mult, cfg.tau_e_distinct);
    Ok(Dmca0Result {
        scores: s_bar,
        clusters,
        graph,
        diagnostics,
        rounds,
    })
}

/// Ablation: identical scoring loop, but pruning just drops the current
/// top-`p` scorers before the next round (non-accumulating) and builds no
/// graph, so no clusters ever come out.
pub fn prune_top_score(
    ds: &Dataset,
    cfg: &Dmca0Config,
    truth: Option<&GroundTruth>,
) -> Result<Dmca0Result> {
    cfg.validate(ds.n())?;
    let n = ds.n();
    if n < 2 {
        return Err(Error::InvalidArgument(
            "candidate pool needs at least 2 points".into(),
        ));
    }
    let full = IndexSet::full(n);
    let mut rng = DetRng::with_stream(cfg.seed, 0);
    let mut s_bar = vec![0.0f64; n];
    let mut clean = full.clone();
    let mut diagnostics = Vec::with_capacity(cfg.t);
    let mut rounds = Vec::new();

    for iteration in 1..=cfg.t {
        let psi_used = cfg.psi.min(clean.len());
        let psi_clamped = psi_used < cfg.psi;
        let model = inne::fit(ds, &clean, psi_used, &mut rng)?;
        let round = inne::score(&model, ds);
        let prev_weight = (iteration - 1) as f64;
        for (acc, &v) in s_bar.iter_mut().zip(&round) {
            *acc = (*acc * prev_weight + v) / iteration as f64;
        }
        if cfg.record_rounds {
            rounds.push(round);
        }
        let masking = truth.map(|t| count_masking(&model.centers(), t));

        let top = top_p_indices(&s_bar, cfg.p);
        let remaining = full.minus(&top);
        if remaining.len() >= 2 {
            clean = remaining;
        }

        diagnostics.push(IterationDiag {
            iteration,
            clean_size: clean.len(),
            psi_used,
            psi_clamped,
            h_size: 0,
            hc_size: 0,
            pruned: n - clean.len(),
            masking,
        });
    }

    Ok(Dmca0Result {
        scores: s_bar,
        clusters: Vec::new(),
        graph: NeighborGraph::new(n),
        diagnostics,
        rounds,
    })
}

/// Warm-up subsample sizes: `t_prime` values evenly spaced over
/// `[2, psi_max]`, rounded to integers. A single member gets the small
/// end, where masking is least likely.
pub fn warmup_psi_grid(psi_max: usize, t_prime: usize) -> Vec<usize> {
    match t_prime {
        0 => Vec::new(),
        1 => vec![2],
        _ => (0..t_prime)
            .map(|i| {
                let v =
                    2.0 + i as f64 * (psi_max as f64 - 2.0) / (t_prime as f64 - 1.0);
                v.round() as usize
            })
            .collect(),
    }
}

/// Two-phase hyperensemble: floor(t/2) warm-up members fan the subsample
/// size over `[2, psi_max]` (member i running i iterations) purely for
/// graph evidence; their clusters are removed from the candidate pool and
/// the remaining iterations run at `psi_max` scoring everything.
pub fn dmca(ds: &Dataset, cfg: &DmcaConfig, truth: Option<&GroundTruth>) -> Result<DmcaResult> {
    cfg.validate(ds.n())?;
    let n = ds.n();
    if n < 2 {
        return Err(Error::InvalidArgument(
            "candidate pool needs at least 2 points".into(),
        ));
    }
    let full = IndexSet::full(n);
    let cache = SortedDistCache::new(n);
    let t_prime = cfg.t / 2;
    let grid = warmup_psi_grid(cfg.psi_max, t_prime);

    let member_cfgs: Vec<(usize, Dmca0Config)> = grid
        .iter()
        .enumerate()
        .map(|(i, &psi)| {
            let member = i + 1;
            let mcfg = Dmca0Config {
                psi,
                t: if cfg.warmup_flat { 1 } else { member },
                p: cfg.p,
                stop_ratio: cfg.stop_ratio,
                sigma_mult: cfg.sigma_mult,
                tau_e_distinct: cfg.tau_e_distinct,
                seed: cfg.seed,
                record_rounds: false,
            };
            (member, mcfg)
        })
        .collect();

    // Members are independent; each draws from its own RNG stream, so the
    // parallel schedule cannot change any result.
    let member_runs: Result<Vec<(usize, Dmca0Result)>> = member_cfgs
        .par_iter()
        .map(|(member, mcfg)| {
            let mut rng = DetRng::with_stream(cfg.seed, *member as u64);
            run_dmca0(ds, mcfg, &full, truth, &mut rng, &cache).map(|r| (*member, r))
        })
        .collect();

    let mut graph = NeighborGraph::new(n);
    let mut warmup = Vec::with_capacity(t_prime);
    for (member, run) in member_runs? {
        graph.merge(&run.graph)?;
        warmup.push(MemberDiag {
            member,
            psi: grid[member - 1],
            iterations: run.diagnostics,
        });
    }

    let warmup_clusters = find_clusters(&graph, cfg.sigma_mult, cfg.tau_e_distinct);
    let mut covered = IndexSet::from_sorted(Vec::new());
    for c in &warmup_clusters {
        covered = covered.union(c);
    }
    let mut pool = full.minus(&covered);
    if pool.len() < 2 {
        // Warm-up clustered nearly everything; fall back to the full pool
        // rather than making phase 2 untrainable.
        pool = full.clone();
    }

    let phase2_cfg = Dmca0Config {
        psi: cfg.psi_max.min(pool.len()),
        t: cfg.t - t_prime,
        p: cfg.p,
        stop_ratio: cfg.stop_ratio,
        sigma_mult: cfg.sigma_mult,
        tau_e_distinct: cfg.tau_e_distinct,
        seed: cfg.seed,
        record_rounds: false,
    };
    let mut rng = DetRng::with_stream(cfg.seed, 0);
    let phase2 = run_dmca0(ds, &phase2_cfg, &pool, truth, &mut rng, &cache)?;

    graph.merge(&phase2.graph)?;
    let clusters = find_clusters(&graph, cfg.sigma_mult, cfg.tau_e_distinct);

    Ok(DmcaResult {
        scores: phase2.scores,
        clusters,
        graph,
        warmup_clusters,
        warmup,
        phase2: phase2.diagnostics,
    })
}
