//! Accuracy estimation, misclassification overlays and runtime benchmarks.

mod bench;
mod confusion;
mod cv;
mod overlay;

pub use bench::{benchmark_runtime, BenchReport, BenchRow};
pub use confusion::{confusion_matrix, ConfusionMatrix};
pub use cv::{cross_validate, kfold_split, CvResult, FoldPlan};
pub use overlay::misclassification_map;
