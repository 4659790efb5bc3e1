//! Evaluation toolkit for instance-level 6-DoF object-pose estimates.
//!
//! Given BOP-format ground truth and estimator result files, this crate
//! computes symmetry-aware geometric error metrics (rotation/translation
//! error, ADD(-S), MSSD, MSPD), transfers each estimate's pose deviation
//! onto a per-object reference grasp plan, judges the resulting open-loop
//! grasp with a deterministic geometric surrogate (or an external
//! simulator over a line-delimited JSON protocol), and aggregates
//! per-object statistics and failure-rate AUC analyses.
//!
//! See the `book/` guide in the repository for a narrative walkthrough;
//! its code snippets are compiled as doc-tests of this crate.

pub mod analysis;
pub mod bop;
pub mod catalog;
pub mod deviation;
pub mod metrics;
pub mod se3;
pub mod shapes;
pub mod trial;

pub use se3::{CameraIntrinsics, RigidTransform};

// Keep the book's runnable snippets compiling against the current API.
#[cfg(doctest)]
mod book {
    macro_rules! chapter {
        ($name:ident, $path:literal) => {
            #[doc = include_str!($path)]
            pub struct $name;
        };
    }
    chapter!(Transforms, "../../../book/src/transforms.md");
    chapter!(Ingestion, "../../../book/src/ingestion.md");
    chapter!(Metrics, "../../../book/src/metrics.md");
    chapter!(DeviationTransfer, "../../../book/src/deviation-transfer.md");
    chapter!(GraspTrials, "../../../book/src/grasp-trials.md");
    chapter!(Analysis, "../../../book/src/analysis.md");
}
