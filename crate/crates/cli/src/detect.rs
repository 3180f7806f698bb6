//! The detect subcommand: algorithm dispatch, artifact writing, and
//! manifest-driven replay.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use dmca_core::clusters::MicroClusterSet;
use dmca_core::dmca::{dmca, dmca0, prune_top_score, Dmca0Config, DmcaConfig};
use dmca_core::eval::count_masking;
use dmca_core::io::{self, ArtifactPaths, RunManifest};
use dmca_core::{inne, Dataset, DetRng, GroundTruth, IndexSet};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::{usage_error, Algorithm, DetectArgs};

/// Every knob a run depends on, defaults filled in. Stored verbatim in the
/// manifest so a replay needs no guessing.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResolvedConfig {
    pub algorithm: String,
    pub psi: Option<usize>,
    pub psi_max: Option<usize>,
    pub iters: usize,
    pub p_frac: f64,
    /// ceil(p_frac * n), clamped to [1, n].
    pub p: usize,
    pub maximin_stop_ratio: f64,
    pub peak_sigma: f64,
    pub tau_e_distinct: bool,
    pub warmup_flat: bool,
    pub seed: u64,
}

pub fn resolve_p(n: usize, p_frac: f64) -> usize {
    ((n as f64 * p_frac).ceil() as usize).clamp(1, n)
}

pub fn run(args: DetectArgs) -> Result<()> {
    if let Some(manifest_path) = args.from_manifest {
        if args.input.is_some()
            || args.algorithm.is_some()
            || args.psi.is_some()
            || args.psi_max.is_some()
            || args.iters.is_some()
            || args.p_frac.is_some()
            || args.maximin_stop_ratio.is_some()
            || args.peak_sigma.is_some()
            || args.tau_e_distinct.is_some()
            || args.warmup_flat
        {
            usage_error("--from-manifest only combines with artifact path overrides");
        }
        return replay(
            &manifest_path,
            args.scores_out,
            args.clusters_out,
            args.diagnostics,
        );
    }

    let input = args
        .input
        .unwrap_or_else(|| usage_error("detect needs --input"));
    let algorithm = args
        .algorithm
        .unwrap_or_else(|| usage_error("detect needs --algorithm"));
    let scores_out = args
        .scores_out
        .unwrap_or_else(|| usage_error("detect needs --scores-out"));
    let clusters_out = args
        .clusters_out
        .unwrap_or_else(|| usage_error("detect needs --clusters-out"));

    let psi = match algorithm {
        Algorithm::Dmca => {
            if args.psi.is_some() {
                usage_error("dmca varies the subsample size itself; use --psi-max");
            }
            args.psi_max
                .unwrap_or_else(|| usage_error("dmca needs --psi-max"))
        }
        _ => {
            if args.psi_max.is_some() {
                usage_error("--psi-max only applies to dmca; use --psi");
            }
            args.psi
                .unwrap_or_else(|| usage_error("this algorithm needs --psi"))
        }
    };

    let p_frac = args.p_frac.unwrap_or(0.1);
    if !(p_frac > 0.0 && p_frac <= 1.0) {
        bail!("p-frac {p_frac} outside (0, 1]");
    }

    let (ds, truth) = io::load_csv(&input)
        .with_context(|| format!("reading {}", input.display()))?;

    let config = ResolvedConfig {
        algorithm: algorithm.name().into(),
        psi: (algorithm != Algorithm::Dmca).then_some(psi),
        psi_max: (algorithm == Algorithm::Dmca).then_some(psi),
        iters: args.iters.unwrap_or(100),
        p_frac,
        p: resolve_p(ds.n(), p_frac),
        maximin_stop_ratio: args.maximin_stop_ratio.unwrap_or(0.5),
        peak_sigma: args.peak_sigma.unwrap_or(3.0),
        tau_e_distinct: args.tau_e_distinct.unwrap_or(true),
        warmup_flat: args.warmup_flat,
        seed: args.seed.unwrap_or(0),
    };

    run_and_write(
        &input,
        &config,
        &ds,
        truth.as_ref(),
        &scores_out,
        &clusters_out,
        args.diagnostics.as_deref(),
    )
}

fn replay(
    manifest_path: &Path,
    scores_over: Option<PathBuf>,
    clusters_over: Option<PathBuf>,
    diagnostics_over: Option<PathBuf>,
) -> Result<()> {
    let manifest = io::load_manifest(manifest_path)
        .with_context(|| format!("reading {}", manifest_path.display()))?;
    let config: ResolvedConfig = serde_json::from_value(manifest.config.clone())
        .context("manifest config does not parse")?;
    if Algorithm::from_name(&config.algorithm).is_none() {
        bail!("manifest names unknown algorithm {}", config.algorithm);
    }

    let input = PathBuf::from(&manifest.input);
    let hash = io::sha256_file(&input)
        .with_context(|| format!("hashing {}", input.display()))?;
    if hash != manifest.dataset_sha256 {
        bail!(
            "dataset {} changed since the manifest was written (sha256 {} vs {})",
            input.display(),
            hash,
            manifest.dataset_sha256
        );
    }

    let take = |over: Option<PathBuf>, recorded: &Option<String>, what: &str| {
        over.map(Ok).unwrap_or_else(|| {
            recorded
                .as_ref()
                .map(PathBuf::from)
                .ok_or_else(|| anyhow!("manifest records no {what} path"))
        })
    };
    let scores_out = take(scores_over, &manifest.artifacts.scores, "scores")?;
    let clusters_out = take(clusters_over, &manifest.artifacts.clusters, "clusters")?;
    let diagnostics = match (diagnostics_over, &manifest.artifacts.diagnostics) {
        (Some(p), _) => Some(p),
        (None, recorded) => recorded.as_ref().map(PathBuf::from),
    };

    let (ds, truth) = io::load_csv(&input)?;
    run_and_write(
        &input,
        &config,
        &ds,
        truth.as_ref(),
        &scores_out,
        &clusters_out,
        diagnostics.as_deref(),
    )
}

fn run_and_write(
    input: &Path,
    config: &ResolvedConfig,
    ds: &Dataset,
    truth: Option<&GroundTruth>,
    scores_out: &Path,
    clusters_out: &Path,
    diagnostics: Option<&Path>,
) -> Result<()> {
    let started = Instant::now();
    let output = execute(ds, truth, config)?;
    let duration_secs = started.elapsed().as_secs_f64();

    io::save_scores(scores_out, &output.scores)?;
    io::save_clusters(clusters_out, &output.clusters)?;
    if let Some(path) = diagnostics {
        let mut w = BufWriter::new(fs::File::create(path)?);
        for line in &output.diagnostics {
            writeln!(w, "{line}")?;
        }
        w.flush()?;
    }

    let manifest = RunManifest {
        algorithm: config.algorithm.clone(),
        config: serde_json::to_value(config)?,
        seed: config.seed,
        input: input.display().to_string(),
        dataset_sha256: io::sha256_file(input)?,
        artifacts: ArtifactPaths {
            scores: Some(scores_out.display().to_string()),
            clusters: Some(clusters_out.display().to_string()),
            diagnostics: diagnostics.map(|p| p.display().to_string()),
        },
        duration_secs,
    };
    io::save_manifest(manifest_path_for(scores_out), &manifest)?;
    Ok(())
}

/// The manifest sits next to the scores artifact with a stable suffix.
pub fn manifest_path_for(scores_out: &Path) -> PathBuf {
    let mut raw = scores_out.as_os_str().to_owned();
    raw.push(".manifest.json");
    PathBuf::from(raw)
}

pub struct RunOutput {
    pub scores: Vec<f64>,
    pub clusters: MicroClusterSet,
    pub diagnostics: Vec<serde_json::Value>,
}

fn with_phase(diag: &impl Serialize, extra: &[(&str, serde_json::Value)]) -> serde_json::Value {
    let mut v = serde_json::to_value(diag).expect("diagnostics serialize");
    let obj = v.as_object_mut().expect("diagnostics are objects");
    for (k, val) in extra {
        obj.insert((*k).into(), val.clone());
    }
    v
}

pub fn execute(ds: &Dataset, truth: Option<&GroundTruth>, rc: &ResolvedConfig) -> Result<RunOutput> {
    let n = ds.n();
    let algorithm = Algorithm::from_name(&rc.algorithm)
        .ok_or_else(|| anyhow!("unknown algorithm {}", rc.algorithm))?;
    match algorithm {
        Algorithm::Dmca => {
            let cfg = DmcaConfig {
                psi_max: rc.psi_max.context("dmca config needs psi_max")?,
                t: rc.iters,
                p: rc.p,
                stop_ratio: rc.maximin_stop_ratio,
                sigma_mult: rc.peak_sigma,
                tau_e_distinct: rc.tau_e_distinct,
                warmup_flat: rc.warmup_flat,
                seed: rc.seed,
            };
            let res = dmca(ds, &cfg, truth)?;
            let mut diagnostics = Vec::new();
            for member in &res.warmup {
                for d in &member.iterations {
                    diagnostics.push(with_phase(
                        d,
                        &[
                            ("phase", json!("warmup")),
                            ("member", json!(member.member)),
                            ("member_psi", json!(member.psi)),
                        ],
                    ));
                }
            }
            for d in &res.phase2 {
                diagnostics.push(with_phase(d, &[("phase", json!("detect"))]));
            }
            Ok(RunOutput {
                scores: res.scores,
                clusters: res.clusters,
                diagnostics,
            })
        }
        Algorithm::Dmca0 | Algorithm::PruneTopScore => {
            let cfg = Dmca0Config {
                psi: rc.psi.context("config needs psi")?,
                t: rc.iters,
                p: rc.p,
                stop_ratio: rc.maximin_stop_ratio,
                sigma_mult: rc.peak_sigma,
                tau_e_distinct: rc.tau_e_distinct,
                seed: rc.seed,
                record_rounds: false,
            };
            let res = if algorithm == Algorithm::Dmca0 {
                dmca0(ds, &cfg, None, truth)?
            } else {
                prune_top_score(ds, &cfg, truth)?
            };
            let diagnostics = res
                .diagnostics
                .iter()
                .map(|d| with_phase(d, &[("phase", json!("detect"))]))
                .collect();
            Ok(RunOutput {
                scores: res.scores,
                clusters: res.clusters,
                diagnostics,
            })
        }
        Algorithm::Inne => {
            let psi = rc.psi.context("config needs psi")?;
            let full = IndexSet::full(n);
            let mut rng = DetRng::with_stream(rc.seed, 0);
            let mut scores = vec![0.0f64; n];
            let mut diagnostics = Vec::new();
            for i in 1..=rc.iters {
                let model = inne::fit(ds, &full, psi, &mut rng)?;
                let round = inne::score(&model, ds);
                let prev = (i - 1) as f64;
                for (acc, &v) in scores.iter_mut().zip(&round) {
                    *acc = (*acc * prev + v) / i as f64;
                }
                let masking = truth.map(|t| count_masking(&model.centers(), t));
                diagnostics.push(json!({
                    "phase": "detect",
                    "iteration": i,
                    "psi_used": psi,
                    "masking": masking,
                }));
            }
            Ok(RunOutput {
                scores,
                clusters: Vec::new(),
                diagnostics,
            })
        }
    }
}
