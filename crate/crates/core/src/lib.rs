//! EEG eye-state data reduction and classifier benchmarking.
//!
//! The pipeline runs in stages, one module each:
//!
//! - [`ingest`]: ARFF and CSV parsing into a validated [`Recording`].
//! - [`preprocess`]: outlier removal and per-channel centering.
//! - [`connectivity`]: correlation matrices, thresholded channel graphs and
//!   average-linkage ordering.
//! - [`selection`]: histogram mutual information and greedy mRMR ranking.
//! - [`epochs`]: fixed-length windows centered on eye-state transitions.
//! - [`learners`]: KNN, logistic regression, RBF SVC and random forest.
//! - [`bench`]: stratified k-fold F1, wall-clock timing and the base/A/B/C
//!   experiment grid.
//!
//! Every numeric type is generic over [`Scalar`] (`f32` or `f64`). The
//! aliases below fix the scalar to `f64`, with `F32` variants for the single
//! precision path.
//!
//! ```
//! use eyestate::{preprocess, synth, epochs};
//!
//! let raw = synth::synthetic_recording(&synth::SynthConfig::default()).unwrap();
//! let (rec, report) = preprocess::prepare(&raw, preprocess::DEFAULT_OUTLIER_FACTOR).unwrap();
//! assert_eq!(report.removed(), 3);
//! let set = epochs::slice_windows(&rec, 384, 20, 42).unwrap();
//! assert_eq!(set.rows.len(), 7680);
//! ```

pub mod bench;
pub mod connectivity;
pub mod epochs;
pub mod error;
pub mod ingest;
pub mod learners;
pub mod preprocess;
pub mod scalar;
pub mod selection;
pub mod synth;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Recording = ingest::Recording<f64>;
pub type RecordingF32 = ingest::Recording<f32>;
pub type CorrMatrix = connectivity::CorrMatrix<f64>;
pub type CorrMatrixF32 = connectivity::CorrMatrix<f32>;
pub type ChannelGraph = connectivity::ChannelGraph<f64>;
pub type ChannelGraphF32 = connectivity::ChannelGraph<f32>;
pub type SelectionRanking = selection::SelectionRanking<f64>;
pub type SelectionRankingF32 = selection::SelectionRanking<f32>;
pub type EpochSet = epochs::EpochSet<f64>;
pub type EpochSetF32 = epochs::EpochSet<f32>;
pub type Dataset = learners::Dataset<f64>;
pub type DatasetF32 = learners::Dataset<f32>;
pub type TrainedModel = learners::TrainedModel<f64>;
pub type TrainedModelF32 = learners::TrainedModel<f32>;
