//! Binary classifiers: k-nearest neighbours, logistic regression, RBF
//! support vector classifier and random forest, plus grid search.
//!
//! All learners consume a [`Dataset`] in raw (centered) units and never
//! mutate it. Label 1 is the positive class.

pub mod forest;
pub mod grid;
pub mod knn;
pub mod logreg;
pub mod svc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{Label, Recording};
use crate::scalar::Scalar;

pub use forest::{DecisionTree, ForestModel, ForestParams, MaxFeatures};
pub use grid::{grid_search, GridCell, GridResult};
pub use knn::KnnModel;
pub use logreg::{LogRegModel, LogRegParams};
pub use svc::{SvcDiagnostics, SvcModel, SvcParams};

/// Row-major feature matrix with binary targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Dataset<T> {
    features: Vec<T>,
    n_rows: usize,
    n_features: usize,
    targets: Vec<Label>,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(features: Vec<T>, n_features: usize, targets: Vec<Label>) -> Result<Self> {
        if n_features == 0 {
            return Err(Error::param("n_features", "need at least one feature"));
        }
        if features.len() != targets.len() * n_features {
            return Err(Error::LengthMismatch { left: features.len(), right: targets.len() * n_features });
        }
        if targets.len() < 2 {
            return Err(Error::param("targets", "need at least two rows"));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("features", "values must be finite"));
        }
        if targets.iter().any(|&t| t > 1) {
            return Err(Error::param("targets", "labels must be 0 or 1"));
        }
        Ok(Self { n_rows: targets.len(), features, n_features, targets })
    }

    pub fn from_rows(rows: &[Vec<T>], targets: Vec<Label>) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::param("rows", "rows have different lengths"));
        }
        Self::new(rows.concat(), d, targets)
    }

    /// Timepoints as rows, channels as features.
    pub fn from_recording(rec: &Recording<T>) -> Result<Self> {
        let d = rec.n_channels();
        let mut features = Vec::with_capacity(rec.len() * d);
        for t in 0..rec.len() {
            for ch in rec.channels() {
                features.push(ch.values[t]);
            }
        }
        Self::new(features, d, rec.labels().to_vec())
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn features(&self) -> &[T] {
        &self.features
    }

    pub fn targets(&self) -> &[Label] {
        &self.targets
    }

    pub fn subset(&self, rows: &[usize]) -> Result<Self> {
        let mut features = Vec::with_capacity(rows.len() * self.n_features);
        for &r in rows {
            features.extend_from_slice(self.row(r));
        }
        Self::new(features, self.n_features, rows.iter().map(|&r| self.targets[r]).collect())
    }

    pub fn has_both_classes(&self) -> bool {
        self.targets.contains(&0) && self.targets.contains(&1)
    }

    pub(crate) fn require_both_classes(&self) -> Result<()> {
        if self.has_both_classes() {
            Ok(())
        } else {
            Err(Error::SingleClass)
        }
    }
}

/// Classifier family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    Knn,
    LogReg,
    Svc,
    Rf,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 4] = [ClassifierKind::Knn, ClassifierKind::LogReg, ClassifierKind::Svc, ClassifierKind::Rf];

    /// Short display name used in report tables.
    pub fn label(self) -> &'static str {
        match self {
            ClassifierKind::Knn => "KNN",
            ClassifierKind::LogReg => "LogReg",
            ClassifierKind::Svc => "SVC",
            ClassifierKind::Rf => "RF",
        }
    }
}

impl std::str::FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "knn" => Ok(ClassifierKind::Knn),
            "logreg" | "lr" => Ok(ClassifierKind::LogReg),
            "svc" | "svm" => Ok(ClassifierKind::Svc),
            "rf" | "forest" => Ok(ClassifierKind::Rf),
            _ => Err(Error::param("classifier", format!("unknown classifier {s:?}"))),
        }
    }
}

/// Complete settings for one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Hyperparameters {
    Knn { k: usize },
    LogReg(LogRegParams),
    Svc(SvcParams),
    Rf(ForestParams),
}

impl Hyperparameters {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            Hyperparameters::Knn { .. } => ClassifierKind::Knn,
            Hyperparameters::LogReg(_) => ClassifierKind::LogReg,
            Hyperparameters::Svc(_) => ClassifierKind::Svc,
            Hyperparameters::Rf(_) => ClassifierKind::Rf,
        }
    }

    /// Default settings: k = 5, small-l2 logistic regression, C = 10 and
    /// gamma = 0.001 RBF SVC, 100-tree forest.
    pub fn default_for(kind: ClassifierKind, seed: u64) -> Self {
        match kind {
            ClassifierKind::Knn => Hyperparameters::Knn { k: 5 },
            ClassifierKind::LogReg => Hyperparameters::LogReg(LogRegParams::default()),
            ClassifierKind::Svc => Hyperparameters::Svc(SvcParams::default()),
            ClassifierKind::Rf => Hyperparameters::Rf(ForestParams { seed, ..ForestParams::default() }),
        }
    }
}

/// A trained classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", bound = "T: Scalar")]
pub enum TrainedModel<T> {
    Knn(KnnModel<T>),
    LogReg(LogRegModel<T>),
    Svc(SvcModel<T>),
    Rf(ForestModel<T>),
}

/// Version tag written into serialized models.
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
struct ModelDocument<T> {
    format_version: u32,
    model: TrainedModel<T>,
}

impl<T: Scalar> TrainedModel<T> {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            TrainedModel::Knn(_) => ClassifierKind::Knn,
            TrainedModel::LogReg(_) => ClassifierKind::LogReg,
            TrainedModel::Svc(_) => ClassifierKind::Svc,
            TrainedModel::Rf(_) => ClassifierKind::Rf,
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            TrainedModel::Knn(m) => m.n_features(),
            TrainedModel::LogReg(m) => m.weights.len(),
            TrainedModel::Svc(m) => m.n_features,
            TrainedModel::Rf(m) => m.n_features,
        }
    }

    pub fn hyperparameters(&self) -> Hyperparameters {
        match self {
            TrainedModel::Knn(m) => Hyperparameters::Knn { k: m.k },
            TrainedModel::LogReg(m) => Hyperparameters::LogReg(m.params.clone()),
            TrainedModel::Svc(m) => Hyperparameters::Svc(m.params.clone()),
            TrainedModel::Rf(m) => Hyperparameters::Rf(m.params.clone()),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ModelDocument { format_version: MODEL_FORMAT_VERSION, model: self.clone() })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDocument<T> = serde_json::from_str(text)?;
        if doc.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::Parse {
                what: "model",
                message: format!("unsupported format version {}", doc.format_version),
            });
        }
        Ok(doc.model)
    }
}

/// Trains the classifier described by `params`.
pub fn train<T: Scalar>(data: &Dataset<T>, params: &Hyperparameters) -> Result<TrainedModel<T>> {
    Ok(match params {
        Hyperparameters::Knn { k } => TrainedModel::Knn(knn::knn_train(data, *k)?),
        Hyperparameters::LogReg(p) => TrainedModel::LogReg(logreg::logreg_train(data, p)?),
        Hyperparameters::Svc(p) => TrainedModel::Svc(svc::svc_train(data, p)?),
        Hyperparameters::Rf(p) => TrainedModel::Rf(forest::rf_train(data, p)?),
    })
}

/// Predicts labels for a row-major feature matrix with `n_features` columns.
pub fn predict<T: Scalar>(model: &TrainedModel<T>, features: &[T], n_features: usize) -> Result<Vec<Label>> {
    if n_features != model.n_features() {
        return Err(Error::DimensionMismatch { expected: model.n_features(), found: n_features });
    }
    if !features.len().is_multiple_of(n_features) {
        return Err(Error::param("features", "length is not a multiple of the feature count"));
    }
    let rows = features.chunks_exact(n_features);
    Ok(match model {
        TrainedModel::Knn(m) => m.predict_rows(rows),
        TrainedModel::LogReg(m) => rows.map(|r| m.predict_row(r)).collect(),
        TrainedModel::Svc(m) => m.predict_rows(rows),
        TrainedModel::Rf(m) => rows.map(|r| m.predict_row(r)).collect(),
    })
}

/// Predicts labels for every row of a dataset.
pub fn predict_dataset<T: Scalar>(model: &TrainedModel<T>, data: &Dataset<T>) -> Result<Vec<Label>> {
    predict(model, data.features(), data.n_features())
}
