//! Outlier detection with explicit micro-cluster assignment.
//!
//! The detector family implemented here combines an isolation-based base
//! scorer (nearest-neighbor hypersphere ensembles) with a sequential
//! pruning loop that finds compact groups of anomalies, removes them from
//! the training pool, and accumulates co-cluster evidence in an
//! integer-weighted neighbor graph. Connected components of the strong
//! edges of that graph become the reported micro-clusters.
//!
//! Modules:
//! - [`model`]: shared types (datasets, labels, index sets), the distance
//!   kernel, and the seeded RNG everything draws from.
//! - [`inne`]: the hypersphere ensemble base detector.
//! - [`sampling`]: maximin (farthest-first) representative selection.
//! - [`peaks`]: gap/drop detection on sorted sequences, used for both the
//!   neighbor-radius and the edge-weight thresholds.
//! - [`clusters`]: the weighted neighbor graph and cluster extraction.
//! - [`dmca`]: the sequential ensemble, the two-phase hyperensemble, and
//!   the score-only pruning ablation.
//! - [`eval`]: ROC AUC, average precision, assignment F1, masking counts.
//! - [`datagen`]: synthetic dataset families and Gaussian-mixture outlier
//!   injection.
//! - [`io`]: CSV/JSON artifact formats and the run manifest.

pub mod clusters;
pub mod datagen;
pub mod dmca;
pub mod eval;
pub mod inne;
pub mod io;
pub mod model;
pub mod peaks;
pub mod sampling;

pub use clusters::{MicroClusterSet, NeighborGraph};
pub use dmca::{Dmca0Config, Dmca0Result, DmcaConfig, DmcaResult};
pub use eval::{AssignmentScore, DetectionMetrics, MaskingLog};
pub use model::{Dataset, DetRng, Error, GroundTruth, IndexSet, Result, ScoreVector};
