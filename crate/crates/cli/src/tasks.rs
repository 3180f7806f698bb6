//! The eval, generate, and inject subcommands.

use std::fs;

use anyhow::{bail, Context, Result};
use dmca_core::datagen::{self, GeneratorSpec, InjectionSpec};
use dmca_core::eval::{assignment_f1, detection_metrics, Matching};
use dmca_core::io::{self, MetricsDoc};
use dmca_core::Dataset;

use crate::{EvalArgs, GenerateArgs, InjectArgs};

pub fn eval(args: EvalArgs) -> Result<()> {
    let scores = io::load_scores(&args.scores)
        .with_context(|| format!("reading {}", args.scores.display()))?;
    let clusters = io::load_clusters(&args.clusters)
        .with_context(|| format!("reading {}", args.clusters.display()))?;
    let (ds, truth) = io::load_csv(&args.labels)
        .with_context(|| format!("reading {}", args.labels.display()))?;
    let truth = truth.ok_or_else(|| {
        anyhow::anyhow!("labels file {} has no label column", args.labels.display())
    })?;
    if scores.len() != ds.n() {
        bail!(
            "scores cover {} points but the labeled dataset has {}",
            scores.len(),
            ds.n()
        );
    }
    if let Some(&worst) = clusters.iter().flat_map(|c| c.as_slice()).max() {
        if worst >= ds.n() {
            bail!("cluster index {worst} out of range for {} points", ds.n());
        }
    }

    let detection = detection_metrics(&scores, &truth);
    let assignment = assignment_f1(&clusters, &truth, Matching::BestMatch);
    let doc = MetricsDoc {
        auc: detection.auc,
        ap: detection.ap,
        avg_f1: assignment.as_ref().map(|a| a.avg_f1),
        per_cluster: assignment.map(|a| a.per_true_cluster),
        masking_cumulative: None,
    };
    io::save_metrics(&args.metrics_out, &doc)?;
    Ok(())
}

pub fn family_spec(name: &str, seed: u64) -> Result<GeneratorSpec> {
    Ok(match name {
        "synthetic10" => datagen::synthetic10(seed),
        "spiral" => datagen::spiral(seed),
        "sandwich" => datagen::sandwich(seed),
        "vdensity" => datagen::vdensity(seed),
        "blobs" => datagen::blobs(seed),
        other => bail!(
            "unknown family {other}; expected synthetic10, spiral, sandwich, vdensity, or blobs"
        ),
    })
}

pub fn generate(args: GenerateArgs) -> Result<()> {
    let spec = family_spec(&args.family, args.seed)?;
    let (ds, truth) = datagen::generate(&spec)?;
    io::save_csv(&args.out, &ds, Some(&truth))?;
    Ok(())
}

pub fn inject(args: InjectArgs) -> Result<()> {
    let (ds, truth) = io::load_csv(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let host = match &truth {
        None => ds,
        Some(t) => {
            let rows: Vec<Vec<f64>> = (0..ds.n())
                .filter(|&i| t.labels()[i] == 0)
                .map(|i| ds.point(i).to_vec())
                .collect();
            Dataset::from_rows(rows)?
        }
    };
    let spec: InjectionSpec = serde_json::from_reader(
        fs::File::open(&args.spec)
            .with_context(|| format!("opening {}", args.spec.display()))?,
    )
    .context("injection spec does not parse")?;
    let (out_ds, out_truth) = datagen::inject(&host, &spec)?;
    io::save_csv(&args.out, &out_ds, Some(&out_truth))?;
    Ok(())
}
