//! The plot subcommand: hand-rolled SVG scatter of a 2D dataset, score
//! sizing and per-cluster star glyphs when artifacts are supplied.

use std::fs;
use std::io::{BufWriter, Write};

use anyhow::{bail, Context, Result};
use dmca_core::io;

use crate::PlotArgs;

const CANVAS: f64 = 800.0;
const MARGIN: f64 = 40.0;
const PALETTE: [&str; 12] = [
    "#e41a1c", "#377eb8", "#4daf4a", "#984ea3", "#ff7f00", "#a65628",
    "#f781bf", "#17becf", "#bcbd22", "#8c564b", "#e377c2", "#00429d",
];

pub fn run(args: PlotArgs) -> Result<()> {
    let (ds, _) = io::load_csv(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?;
    if ds.d() != 2 {
        bail!("plot needs a 2-dimensional dataset, got d={}", ds.d());
    }

    let scores = match &args.scores {
        None => None,
        Some(path) => {
            let s = io::load_scores(path)?;
            if s.len() != ds.n() {
                bail!("scores cover {} points but the dataset has {}", s.len(), ds.n());
            }
            Some(s)
        }
    };
    let mut cluster_of = vec![None; ds.n()];
    if let Some(path) = &args.clusters {
        for (c, members) in io::load_clusters(path)?.iter().enumerate() {
            for i in members {
                if i >= ds.n() {
                    bail!("cluster index {i} out of range for {} points", ds.n());
                }
                cluster_of[i] = Some(c);
            }
        }
    }

    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for row in ds.rows() {
        for k in 0..2 {
            lo[k] = lo[k].min(row[k]);
            hi[k] = hi[k].max(row[k]);
        }
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-12);
    let scale = (CANVAS - 2.0 * MARGIN) / span;
    let sx = |x: f64| MARGIN + (x - lo[0]) * scale;
    let sy = |y: f64| CANVAS - MARGIN - (y - lo[1]) * scale;

    let mut w = BufWriter::new(fs::File::create(&args.out)?);
    writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {CANVAS} {CANVAS}">"#
    )?;
    writeln!(w, r#"<rect width="100%" height="100%" fill="white"/>"#)?;

    let size_for = |i: usize, base: f64, gain: f64| match &scores {
        Some(s) => base + gain * s[i],
        None => base + 0.5 * gain,
    };

    for i in 0..ds.n() {
        if cluster_of[i].is_none() {
            let p = ds.point(i);
            writeln!(
                w,
                r##"<circle cx="{:.2}" cy="{:.2}" r="{:.2}" fill="#9aa0a6" fill-opacity="0.7"/>"##,
                sx(p[0]),
                sy(p[1]),
                size_for(i, 1.6, 2.8),
            )?;
        }
    }
    for i in 0..ds.n() {
        if let Some(c) = cluster_of[i] {
            let p = ds.point(i);
            let color = PALETTE[c % PALETTE.len()];
            writeln!(
                w,
                r#"<polygon points="{}" fill="{color}" stroke="black" stroke-width="0.6"/>"#,
                star_points(sx(p[0]), sy(p[1]), size_for(i, 5.0, 9.0)),
            )?;
        }
    }
    writeln!(w, "</svg>")?;
    w.flush()?;
    Ok(())
}

/// Ten vertices of a five-pointed star, point up.
fn star_points(cx: f64, cy: f64, r: f64) -> String {
    let mut pts = Vec::with_capacity(10);
    for k in 0..10 {
        let radius = if k % 2 == 0 { r } else { 0.42 * r };
        let angle = std::f64::consts::PI * (k as f64 / 5.0 - 0.5);
        pts.push(format!(
            "{:.2},{:.2}",
            cx + radius * angle.cos(),
            cy + radius * angle.sin()
        ));
    }
    pts.join(" ")
}
