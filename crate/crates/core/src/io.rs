//! CSV and JSON persistence plus the run manifest that makes every
//! invocation replayable.
//!
//! Floats are written with 17 significant digits so a save/load round
//! trip reproduces the exact 64-bit values. Cluster JSON is canonical
//! (inner lists ascending, outer list sorted by first member), which
//! keeps byte comparisons between runs meaningful. Parse errors name the
//! file line (the header is line 1) and the offending column.

use std::fs;
use std::io::{BufWriter, Write as _};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::clusters::MicroClusterSet;
use crate::eval::PerClusterMatch;
use crate::model::{Dataset, Error, GroundTruth, IndexSet, Result, ScoreVector};

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Header row required; every column is a feature except an optional
/// integer column named "label" (0 inlier, -1 scattered, k >= 1 cluster).
pub fn load_csv(path: impl AsRef<Path>) -> Result<(Dataset, Option<GroundTruth>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path.as_ref())?;
    let headers = reader.headers()?.clone();
    let label_col = headers.iter().position(|h| h == "label");
    let feature_cols: Vec<(usize, String)> = headers
        .iter()
        .enumerate()
        .filter(|&(i, _)| Some(i) != label_col)
        .map(|(i, h)| (i, h.to_string()))
        .collect();
    if feature_cols.is_empty() {
        return Err(Error::InvalidArgument(
            "the file has no feature columns".into(),
        ));
    }

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut labels: Vec<i64> = Vec::new();
    for (ri, record) in reader.records().enumerate() {
        let record = record?;
        let line = ri + 2;
        if record.len() != headers.len() {
            return Err(Error::Parse {
                row: line,
                column: format!("count={}", record.len()),
                reason: format!("expected {} fields", headers.len()),
            });
        }
        let mut row = Vec::with_capacity(feature_cols.len());
        for (ci, name) in &feature_cols {
            let cell = record.get(*ci).unwrap_or("");
            let value: f64 = cell.trim().parse().map_err(|_| Error::Parse {
                row: line,
                column: name.clone(),
                reason: format!("not a number: {cell:?}"),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse {
                    row: line,
                    column: name.clone(),
                    reason: "non-finite value".into(),
                });
            }
            row.push(value);
        }
        if let Some(ci) = label_col {
            let cell = record.get(ci).unwrap_or("");
            let value: i64 = cell.trim().parse().map_err(|_| Error::Parse {
                row: line,
                column: "label".into(),
                reason: format!("not an integer: {cell:?}"),
            })?;
            labels.push(value);
        }
        rows.push(row);
    }

    let ds = Dataset::from_rows(rows)?;
    let truth = match label_col {
        Some(_) => Some(GroundTruth::new(labels)?),
        None => None,
    };
    Ok((ds, truth))
}

/// Columns f0..f{d-1}, plus a label column when truth is given.
pub fn save_csv(
    path: impl AsRef<Path>,
    ds: &Dataset,
    truth: Option<&GroundTruth>,
) -> Result<()> {
    if let Some(t) = truth {
        if t.len() != ds.n() {
            return Err(Error::InvalidArgument(
                "label count does not match the dataset".into(),
            ));
        }
    }
    let mut w = BufWriter::new(fs::File::create(path.as_ref())?);
    let mut header: Vec<String> = (0..ds.d()).map(|j| format!("f{j}")).collect();
    if truth.is_some() {
        header.push("label".into());
    }
    writeln!(w, "{}", header.join(","))?;
    for i in 0..ds.n() {
        let mut fields: Vec<String> = ds.point(i).iter().map(|&v| fmt_f64(v)).collect();
        if let Some(t) = truth {
            fields.push(t.labels()[i].to_string());
        }
        writeln!(w, "{}", fields.join(","))?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_scores(path: impl AsRef<Path>, scores: &[f64]) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path.as_ref())?);
    writeln!(w, "index,score")?;
    for (i, &s) in scores.iter().enumerate() {
        writeln!(w, "{i},{}", fmt_f64(s))?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_scores(path: impl AsRef<Path>) -> Result<ScoreVector> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path.as_ref())?;
    let mut scores = Vec::new();
    for (ri, record) in reader.records().enumerate() {
        let record = record?;
        let line = ri + 2;
        let idx: usize = record
            .get(0)
            .unwrap_or("")
            .trim()
            .parse()
            .map_err(|_| Error::Parse {
                row: line,
                column: "index".into(),
                reason: "not an index".into(),
            })?;
        if idx != ri {
            return Err(Error::Parse {
                row: line,
                column: "index".into(),
                reason: format!("expected {ri}, found {idx}"),
            });
        }
        let score: f64 = record
            .get(1)
            .unwrap_or("")
            .trim()
            .parse()
            .map_err(|_| Error::Parse {
                row: line,
                column: "score".into(),
                reason: "not a number".into(),
            })?;
        scores.push(score);
    }
    Ok(scores)
}

#[derive(Serialize, Deserialize)]
struct ClustersDoc {
    clusters: Vec<Vec<usize>>,
}

pub fn save_clusters(path: impl AsRef<Path>, clusters: &MicroClusterSet) -> Result<()> {
    let mut lists: Vec<Vec<usize>> = clusters.iter().map(|c| c.iter().collect()).collect();
    lists.sort();
    let doc = ClustersDoc { clusters: lists };
    let mut w = BufWriter::new(fs::File::create(path.as_ref())?);
    serde_json::to_writer_pretty(&mut w, &doc)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn load_clusters(path: impl AsRef<Path>) -> Result<MicroClusterSet> {
    let doc: ClustersDoc = serde_json::from_reader(fs::File::open(path.as_ref())?)?;
    Ok(doc
        .clusters
        .into_iter()
        .map(IndexSet::from_unsorted)
        .collect())
}

/// The metrics report; absent values serialize as JSON nulls so every
/// key is always present.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct MetricsDoc {
    pub auc: Option<f64>,
    pub ap: Option<f64>,
    pub avg_f1: Option<f64>,
    pub per_cluster: Option<Vec<PerClusterMatch>>,
    pub masking_cumulative: Option<Vec<usize>>,
}

pub fn save_metrics(path: impl AsRef<Path>, metrics: &MetricsDoc) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path.as_ref())?);
    serde_json::to_writer_pretty(&mut w, metrics)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn load_metrics(path: impl AsRef<Path>) -> Result<MetricsDoc> {
    Ok(serde_json::from_reader(fs::File::open(path.as_ref())?)?)
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ArtifactPaths {
    pub scores: Option<String>,
    pub clusters: Option<String>,
    pub diagnostics: Option<String>,
}

/// Everything needed to replay a detection run bit-exactly, written next
/// to its artifacts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub algorithm: String,
    /// Fully resolved configuration, every flag and default included.
    pub config: serde_json::Value,
    pub seed: u64,
    pub input: String,
    pub dataset_sha256: String,
    pub artifacts: ArtifactPaths,
    pub duration_secs: f64,
}

pub fn sha256_file(path: impl AsRef<Path>) -> Result<String> {
    let bytes = fs::read(path.as_ref())?;
    let digest = Sha256::digest(&bytes);
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

pub fn save_manifest(path: impl AsRef<Path>, manifest: &RunManifest) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path.as_ref())?);
    serde_json::to_writer_pretty(&mut w, manifest)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<RunManifest> {
    Ok(serde_json::from_reader(fs::File::open(path.as_ref())?)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    #[test]
    fn dataset_round_trip_without_labels() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("data.csv");
        let ds = Dataset::from_rows(vec![
            vec![0.1 + 0.2, 1.0 / 3.0],
            vec![-1e-300, 2.5e17],
        ])
        .unwrap();
        save_csv(&path, &ds, None).unwrap();
        let (loaded, truth) = load_csv(&path).unwrap();
        assert!(truth.is_none());
        assert_eq!(loaded.as_flat(), ds.as_flat());
    }

    #[test]
    fn dataset_round_trip_with_labels() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("data.csv");
        let ds =
            Dataset::from_rows(vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0], vec![4.0]])
                .unwrap();
        let truth = GroundTruth::new(vec![0, 0, 1, 1, -1]).unwrap();
        save_csv(&path, &ds, Some(&truth)).unwrap();
        let (loaded, loaded_truth) = load_csv(&path).unwrap();
        let loaded_truth = loaded_truth.unwrap();
        assert_eq!(loaded.as_flat(), ds.as_flat());
        assert_eq!(loaded_truth.labels(), truth.labels());
        assert_eq!(loaded_truth.n_clusters(), 1);
        assert_eq!(loaded_truth.outlier_indices().len(), 3);
    }

    fn write(path: &std::path::Path, text: &str) {
        fs::write(path, text).unwrap();
    }

    #[test]
    fn two_row_file_without_labels() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write(&path, "f0,f1\n1.0,2.0\n3.0,4.0\n");
        let (ds, truth) = load_csv(&path).unwrap();
        assert_eq!((ds.n(), ds.d()), (2, 2));
        assert!(truth.is_none());
    }

    #[test]
    fn non_contiguous_labels_rejected() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write(&path, "f0,label\n1.0,0\n2.0,2\n3.0,2\n");
        match load_csv(&path) {
            Err(Error::Labels(_)) => {}
            other => panic!("expected label validation error, got {other:?}"),
        }
    }

    #[test]
    fn parse_error_names_row_and_column() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write(&path, "f0,f1\n1.0,2.0\n1.0,oops\n");
        match load_csv(&path) {
            Err(Error::Parse { row, column, .. }) => {
                assert_eq!(row, 3);
                assert_eq!(column, "f1");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn non_finite_cell_rejected() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write(&path, "f0\nNaN\n");
        match load_csv(&path) {
            Err(Error::Parse { row, column, .. }) => {
                assert_eq!(row, 2);
                assert_eq!(column, "f0");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn ragged_row_rejected() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write(&path, "f0,f1\n1.0,2.0\n1.0\n");
        match load_csv(&path) {
            Err(Error::Parse { row, .. }) => assert_eq!(row, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn scores_round_trip_is_bit_exact() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("scores.csv");
        let scores = vec![0.1 + 0.2, 1.0 / 3.0, 1e-300, 0.0, 1.0];
        save_scores(&path, &scores).unwrap();
        let loaded = load_scores(&path).unwrap();
        assert_eq!(loaded.len(), scores.len());
        for (a, b) in loaded.iter().zip(&scores) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn scores_file_has_header_plus_one_line_each() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("scores.csv");
        save_scores(&path, &[0.5, 0.25, 0.125]).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.starts_with("index,score\n"));
    }

    #[test]
    fn clusters_round_trip_and_canonical_order() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("clusters.json");
        let clusters: MicroClusterSet = vec![
            IndexSet::from_sorted(vec![5, 6]),
            IndexSet::from_sorted(vec![1, 2, 9]),
        ];
        save_clusters(&path, &clusters).unwrap();
        let loaded = load_clusters(&path).unwrap();
        assert_eq!(loaded.len(), 2);
        assert_eq!(loaded[0].as_slice(), &[1, 2, 9]);
        assert_eq!(loaded[1].as_slice(), &[5, 6]);
    }

    #[test]
    fn empty_clusters_serialize_to_empty_list() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("clusters.json");
        save_clusters(&path, &Vec::new()).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(value["clusters"], serde_json::json!([]));
        assert!(load_clusters(&path).unwrap().is_empty());
    }

    #[test]
    fn metrics_round_trip_with_nulls() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("metrics.json");
        let doc = MetricsDoc {
            auc: Some(0.875),
            ap: None,
            avg_f1: Some(2.0 / 3.0),
            per_cluster: Some(vec![PerClusterMatch {
                true_cluster: 1,
                matched: None,
                f1: 0.0,
            }]),
            masking_cumulative: None,
        };
        save_metrics(&path, &doc).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.contains("\"ap\": null"));
        assert!(text.contains("\"masking_cumulative\": null"));
        let loaded = load_metrics(&path).unwrap();
        assert_eq!(loaded.auc, Some(0.875));
        assert_eq!(loaded.ap, None);
        assert_eq!(loaded.avg_f1, Some(2.0 / 3.0));
        assert_eq!(loaded.per_cluster.unwrap()[0].true_cluster, 1);
    }

    #[test]
    fn sha256_matches_known_digest() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("abc.txt");
        write(&path, "abc");
        assert_eq!(
            sha256_file(&path).unwrap(),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn manifest_round_trip() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("run.manifest.json");
        let manifest = RunManifest {
            algorithm: "dmca".into(),
            config: serde_json::json!({"psi_max": 16, "t": 100}),
            seed: 7,
            input: "data.csv".into(),
            dataset_sha256: "00".repeat(32),
            artifacts: ArtifactPaths {
                scores: Some("scores.csv".into()),
                clusters: None,
                diagnostics: None,
            },
            duration_secs: 1.25,
        };
        save_manifest(&path, &manifest).unwrap();
        let loaded = load_manifest(&path).unwrap();
        assert_eq!(loaded.algorithm, "dmca");
        assert_eq!(loaded.config["psi_max"], 16);
        assert_eq!(loaded.seed, 7);
        assert_eq!(loaded.artifacts.scores.as_deref(), Some("scores.csv"));
        assert_eq!(loaded.artifacts.clusters, None);
    }
}
