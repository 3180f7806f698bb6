//! The bench subcommand: a (subsample size × seed) grid over a generated
//! family, with per-cell metrics and a mean-and-stdev summary.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::Args;
use dmca_core::datagen;
use dmca_core::eval::{assignment_f1, detection_metrics, Matching};
use dmca_core::{Dataset, GroundTruth};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::detect::{self, ResolvedConfig};
use crate::tasks::family_spec;
use crate::Algorithm;

#[derive(Args)]
pub struct BenchArgs {
    /// One of synthetic10, spiral, sandwich, vdensity, blobs.
    #[arg(long)]
    family: String,
    /// Comma-separated subsample sizes. Default: powers of two from 2 up
    /// to min(1024, 30% of n).
    #[arg(long)]
    psi_grid: Option<String>,
    /// Number of random runs; seeds 0..N.
    #[arg(long, default_value_t = 5)]
    seeds: u64,
    #[arg(long, value_enum, default_value = "dmca")]
    algorithm: Algorithm,
    #[arg(long, default_value_t = 100)]
    iters: usize,
    /// Run independent grid cells on N threads.
    #[arg(long)]
    parallel: Option<usize>,
    /// Output directory for cells.csv, summary.json, summary.txt.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Serialize)]
struct Cell {
    psi: usize,
    seed: u64,
    auc: Option<f64>,
    ap: Option<f64>,
    avg_f1: Option<f64>,
    duration_secs: f64,
}

pub fn run(args: BenchArgs) -> Result<()> {
    if args.seeds == 0 {
        bail!("bench needs at least one seed");
    }
    let mut datasets: Vec<(Dataset, GroundTruth)> = Vec::new();
    for seed in 0..args.seeds {
        let spec = family_spec(&args.family, seed)?;
        datasets.push(datagen::generate(&spec)?);
    }
    let n = datasets[0].0.n();

    let grid = match &args.psi_grid {
        Some(raw) => parse_grid(raw)?,
        None => default_grid(n),
    };
    if grid.is_empty() {
        bail!("empty subsample grid");
    }

    let cells: Vec<(usize, u64)> = grid
        .iter()
        .flat_map(|&psi| (0..args.seeds).map(move |s| (psi, s)))
        .collect();

    let eval_cell = |&(psi, seed): &(usize, u64)| -> Result<Cell> {
        let (ds, truth) = &datasets[seed as usize];
        let config = cell_config(args.algorithm, psi, args.iters, seed, ds.n());
        let started = Instant::now();
        let output = detect::execute(ds, Some(truth), &config)?;
        let duration_secs = started.elapsed().as_secs_f64();
        let detection = detection_metrics(&output.scores, truth);
        let assignment = assignment_f1(&output.clusters, truth, Matching::BestMatch);
        Ok(Cell {
            psi,
            seed,
            auc: detection.auc,
            ap: detection.ap,
            avg_f1: assignment.map(|a| a.avg_f1),
            duration_secs,
        })
    };

    let results: Vec<Cell> = match args.parallel {
        None => cells.iter().map(eval_cell).collect::<Result<_>>()?,
        Some(threads) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads.max(1))
                .build()
                .context("building bench thread pool")?;
            pool.install(|| cells.par_iter().map(eval_cell).collect::<Result<_>>())?
        }
    };

    fs::create_dir_all(&args.out)?;
    write_cells(&args.out.join("cells.csv"), &results)?;
    write_summary(&args, n, &grid, &results)?;
    Ok(())
}

pub fn cell_config(
    algorithm: Algorithm,
    psi: usize,
    iters: usize,
    seed: u64,
    n: usize,
) -> ResolvedConfig {
    ResolvedConfig {
        algorithm: algorithm.name().into(),
        psi: (algorithm != Algorithm::Dmca).then_some(psi),
        psi_max: (algorithm == Algorithm::Dmca).then_some(psi),
        iters,
        p_frac: 0.1,
        p: detect::resolve_p(n, 0.1),
        maximin_stop_ratio: 0.5,
        peak_sigma: 3.0,
        tau_e_distinct: true,
        warmup_flat: false,
        seed,
    }
}

fn parse_grid(raw: &str) -> Result<Vec<usize>> {
    let mut grid = Vec::new();
    for part in raw.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let psi: usize = part
            .parse()
            .with_context(|| format!("bad grid entry {part:?}"))?;
        if psi < 2 {
            bail!("subsample size {psi} too small; grid entries need psi >= 2");
        }
        grid.push(psi);
    }
    Ok(grid)
}

fn default_grid(n: usize) -> Vec<usize> {
    let cap = 1024.min((0.3 * n as f64) as usize);
    let mut grid = Vec::new();
    let mut psi = 2;
    while psi <= cap {
        grid.push(psi);
        psi *= 2;
    }
    grid
}

fn write_cells(path: &PathBuf, cells: &[Cell]) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "psi,seed,auc,ap,avg_f1,duration_secs")?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for c in cells {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            c.psi,
            c.seed,
            opt(c.auc),
            opt(c.ap),
            opt(c.avg_f1),
            c.duration_secs
        )?;
    }
    w.flush()?;
    Ok(())
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, 0.0);
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
        / (values.len() - 1) as f64;
    (mean, var.sqrt())
}

fn stats(cells: &[Cell], pick: impl Fn(&Cell) -> Option<f64>) -> (f64, f64) {
    let values: Vec<f64> = cells.iter().filter_map(&pick).collect();
    mean_std(&values)
}

fn write_summary(args: &BenchArgs, n: usize, grid: &[usize], cells: &[Cell]) -> Result<()> {
    let metric = |slice: &[Cell]| {
        let (auc_mean, auc_std) = stats(slice, |c| c.auc);
        let (ap_mean, ap_std) = stats(slice, |c| c.ap);
        let (f1_mean, f1_std) = stats(slice, |c| c.avg_f1);
        json!({
            "auc": {"mean": auc_mean, "std": auc_std},
            "ap": {"mean": ap_mean, "std": ap_std},
            "avg_f1": {"mean": f1_mean, "std": f1_std},
        })
    };

    let per_psi: Vec<serde_json::Value> = grid
        .iter()
        .map(|&psi| {
            let slice: Vec<Cell> = cells.iter().filter(|c| c.psi == psi).copied().collect();
            let mut obj = metric(&slice);
            obj.as_object_mut()
                .expect("metric object")
                .insert("psi".into(), json!(psi));
            obj
        })
        .collect();

    let summary = json!({
        "family": args.family,
        "algorithm": args.algorithm.name(),
        "iters": args.iters,
        "seeds": args.seeds,
        "n": n,
        "psi_grid": grid,
        "per_psi": per_psi,
        "overall": metric(cells),
    });
    let mut w = BufWriter::new(fs::File::create(args.out.join("summary.json"))?);
    serde_json::to_writer_pretty(&mut w, &summary)?;
    writeln!(w)?;
    w.flush()?;

    let mut t = BufWriter::new(fs::File::create(args.out.join("summary.txt"))?);
    writeln!(
        t,
        "{} on {} (n={}, iters={}, seeds 0..{})",
        args.algorithm.name(),
        args.family,
        n,
        args.iters,
        args.seeds
    )?;
    let line = |slice: &[Cell]| {
        let (auc, auc_s) = stats(slice, |c| c.auc);
        let (ap, ap_s) = stats(slice, |c| c.ap);
        let (f1, f1_s) = stats(slice, |c| c.avg_f1);
        format!(
            "auc {auc:.3} ± {auc_s:.3}  ap {ap:.3} ± {ap_s:.3}  f1 {f1:.3} ± {f1_s:.3}"
        )
    };
    for &psi in grid {
        let slice: Vec<Cell> = cells.iter().filter(|c| c.psi == psi).copied().collect();
        writeln!(t, "psi {psi:>5}  {}", line(&slice))?;
    }
    writeln!(t, "overall    {}", line(cells))?;
    t.flush()?;
    Ok(())
}
