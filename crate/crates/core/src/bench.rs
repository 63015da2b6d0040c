//! Cross-validated F1, wall-clock timing and the base/A/B/C experiment grid.
//!
//! | experiment | channels            | rows               |
//! |------------|---------------------|--------------------|
//! | base       | all                 | all                |
//! | A          | top `n_select` mRMR | all                |
//! | B          | top `n_select` mRMR | transition epochs  |
//! | C          | all                 | transition epochs  |
//!
//! Gains are relative to the base run: `f1_gain = F1_exp - F1_base` and
//! `speedup_gain = time_base / time_exp`.

use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::epochs::{slice_windows, Window, DEFAULT_WINDOW_COUNT, DEFAULT_WINDOW_LEN};
use crate::error::{Error, Result};
use crate::ingest::{Label, Recording};
use crate::learners::grid::knn_grid;
use crate::learners::{
    grid_search, predict_dataset, train, ClassifierKind, Dataset, ForestParams, Hyperparameters, LogRegParams, SvcParams,
};
use crate::scalar::Scalar;
use crate::selection::{mrmr_over_segments, HistogramConfig, DEFAULT_BIN_COUNT, DEFAULT_N_SELECT};

pub const DEFAULT_FOLDS: usize = 5;
pub const DEFAULT_REPEATS: usize = 3;
pub const REPORT_FORMAT_VERSION: u32 = 1;

/// Fold assignment for k-fold cross-validation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    /// Fold index of every row.
    pub assignments: Vec<usize>,
    pub seed: u64,
    pub stratified: bool,
}

impl FoldPlan {
    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.assignments {
            sizes[f] += 1;
        }
        sizes
    }

    /// Held-out rows of fold `fold`, ascending.
    pub fn test_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len()).filter(|&r| self.assignments[r] == fold).collect()
    }

    /// Training rows for fold `fold`, ascending.
    pub fn train_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len()).filter(|&r| self.assignments[r] != fold).collect()
    }
}

/// Stratified fold plan.
pub fn make_folds(targets: &[Label], k: usize, seed: u64) -> Result<FoldPlan> {
    make_folds_with(targets, k, seed, true)
}

/// Shuffles rows with the seeded generator and deals them round-robin into
/// `k` folds. When stratified, each class is shuffled separately and the
/// class-0 rows are dealt before the class-1 rows, so every fold receives
/// `floor` or `ceil` of each class's share and fold sizes differ by at most
/// one.
pub fn make_folds_with(targets: &[Label], k: usize, seed: u64, stratified: bool) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::param("k", format!("need at least 2 folds, got {k}")));
    }
    if targets.len() < k {
        return Err(Error::param("k", format!("{k} folds exceed the {} rows", targets.len())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let order: Vec<usize> = if stratified {
        let mut order = Vec::with_capacity(targets.len());
        for class in [0u8, 1] {
            let mut rows: Vec<usize> = (0..targets.len()).filter(|&r| targets[r] == class).collect();
            if rows.len() < k {
                return Err(Error::ClassTooSmall { class, count: rows.len(), folds: k });
            }
            rows.shuffle(&mut rng);
            order.extend(rows);
        }
        order
    } else {
        let mut rows: Vec<usize> = (0..targets.len()).collect();
        rows.shuffle(&mut rng);
        rows
    };
    let mut assignments = vec![0; targets.len()];
    for (p, &r) in order.iter().enumerate() {
        assignments[r] = p % k;
    }
    Ok(FoldPlan { k, assignments, seed, stratified })
}

/// F1 of the positive class (label 1). Zero when there are no true
/// positives.
pub fn f1_score(predicted: &[Label], actual: &[Label]) -> Result<f64> {
    if predicted.len() != actual.len() {
        return Err(Error::LengthMismatch { left: predicted.len(), right: actual.len() });
    }
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for (&p, &a) in predicted.iter().zip(actual) {
        match (p, a) {
            (1, 1) => tp += 1,
            (1, _) => fp += 1,
            (_, 1) => fn_ += 1,
            _ => {}
        }
    }
    if tp == 0 {
        return Ok(0.0);
    }
    Ok((2 * tp) as f64 / (2 * tp + fp + fn_) as f64)
}

fn check_plan<T: Scalar>(data: &Dataset<T>, plan: &FoldPlan) -> Result<()> {
    if plan.assignments.len() != data.n_rows() {
        return Err(Error::LengthMismatch { left: plan.assignments.len(), right: data.n_rows() });
    }
    Ok(())
}

fn fold_split<T: Scalar>(data: &Dataset<T>, plan: &FoldPlan, fold: usize) -> Result<(Dataset<T>, Dataset<T>)> {
    Ok((data.subset(&plan.train_rows(fold))?, data.subset(&plan.test_rows(fold))?))
}

fn training_error(params: &Hyperparameters, e: Error) -> Error {
    Error::Training { classifier: params.kind().label().to_string(), source: Box::new(e) }
}

/// Per-fold F1 without timing.
pub fn kfold_f1<T: Scalar>(params: &Hyperparameters, data: &Dataset<T>, plan: &FoldPlan) -> Result<Vec<f64>> {
    check_plan(data, plan)?;
    (0..plan.k)
        .map(|fold| {
            let (tr, te) = fold_split(data, plan, fold)?;
            let model = train(&tr, params).map_err(|e| training_error(params, e))?;
            f1_score(&predict_dataset(&model, &te)?, te.targets())
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KfoldTiming {
    pub fold_f1: Vec<f64>,
    pub mean_f1: f64,
    /// Train plus predict seconds summed over folds, one entry per repeat.
    pub repeat_seconds: Vec<f64>,
    pub median_seconds: f64,
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Runs the full k-fold loop `repeats` times on the calling thread. Only
/// training and prediction fall inside the clock; fold extraction does not.
/// F1 values come from the first repeat (training is deterministic, so
/// later repeats only add timing samples).
pub fn timed_kfold<T: Scalar>(
    params: &Hyperparameters,
    data: &Dataset<T>,
    plan: &FoldPlan,
    repeats: usize,
) -> Result<KfoldTiming> {
    if repeats == 0 {
        return Err(Error::param("repeats", "must be at least 1"));
    }
    check_plan(data, plan)?;
    let splits = (0..plan.k).map(|f| fold_split(data, plan, f)).collect::<Result<Vec<_>>>()?;
    let mut fold_f1 = Vec::new();
    let mut repeat_seconds = Vec::with_capacity(repeats);
    for rep in 0..repeats {
        let mut total = 0.0;
        for (tr, te) in &splits {
            let start = Instant::now();
            let model = train(tr, params).map_err(|e| training_error(params, e))?;
            let predicted = predict_dataset(&model, te)?;
            total += start.elapsed().as_secs_f64();
            if rep == 0 {
                fold_f1.push(f1_score(&predicted, te.targets())?);
            }
        }
        repeat_seconds.push(total);
    }
    let mean_f1 = fold_f1.iter().sum::<f64>() / fold_f1.len() as f64;
    Ok(KfoldTiming { fold_f1, mean_f1, median_seconds: median(&repeat_seconds), repeat_seconds })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExperimentId {
    #[serde(rename = "base")]
    Base,
    A,
    B,
    C,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 4] = [ExperimentId::Base, ExperimentId::A, ExperimentId::B, ExperimentId::C];

    pub fn uses_selection(self) -> bool {
        matches!(self, ExperimentId::A | ExperimentId::B)
    }

    pub fn uses_epochs(self) -> bool {
        matches!(self, ExperimentId::B | ExperimentId::C)
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExperimentId::Base => "base",
            ExperimentId::A => "A",
            ExperimentId::B => "B",
            ExperimentId::C => "C",
        })
    }
}

impl FromStr for ExperimentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "base" => Ok(ExperimentId::Base),
            "a" => Ok(ExperimentId::A),
            "b" => Ok(ExperimentId::B),
            "c" => Ok(ExperimentId::C),
            _ => Err(Error::param("experiment", format!("expected base, A, B or C, got {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub folds: usize,
    pub seed: u64,
    pub repeats: usize,
    pub n_select: usize,
    pub window_len: usize,
    pub window_count: usize,
    pub bins: usize,
    /// Candidate neighbour counts searched on the base data.
    pub knn_grid: Vec<usize>,
    /// Skips the search when set.
    pub knn_k: Option<usize>,
    pub logreg: LogRegParams,
    pub svc: SvcParams,
    pub rf_trees: usize,
    pub classifiers: Vec<ClassifierKind>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            folds: DEFAULT_FOLDS,
            seed: 0,
            repeats: DEFAULT_REPEATS,
            n_select: DEFAULT_N_SELECT,
            window_len: DEFAULT_WINDOW_LEN,
            window_count: DEFAULT_WINDOW_COUNT,
            bins: DEFAULT_BIN_COUNT,
            knn_grid: vec![1, 3, 5, 7, 9, 15],
            knn_k: None,
            logreg: LogRegParams::default(),
            svc: SvcParams::default(),
            rf_trees: 100,
            classifiers: ClassifierKind::ALL.to_vec(),
        }
    }
}

impl ExperimentConfig {
    fn hyperparameters(&self, kind: ClassifierKind, knn_k: usize) -> Hyperparameters {
        match kind {
            ClassifierKind::Knn => Hyperparameters::Knn { k: knn_k },
            ClassifierKind::LogReg => Hyperparameters::LogReg(self.logreg.clone()),
            ClassifierKind::Svc => Hyperparameters::Svc(self.svc.clone()),
            ClassifierKind::Rf => {
                Hyperparameters::Rf(ForestParams { n_trees: self.rf_trees, seed: self.seed, ..ForestParams::default() })
            }
        }
    }
}

/// Channel choice for experiments A and B: every channel is ranked by mRMR
/// inside each transition window, the rankings are averaged, and the first
/// `n_select` channels of the averaged order are kept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelChoice {
    /// All channels, best first.
    pub ranked: Vec<String>,
    /// The first `n_select` of `ranked`.
    pub selected: Vec<String>,
    pub windows: usize,
}

/// Feature matrix for one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Assembly<T> {
    pub experiment: ExperimentId,
    pub dataset: Dataset<T>,
    /// Feature columns, in recording order.
    pub channels: Vec<String>,
    pub windows: Option<Vec<Window>>,
    pub selection: Option<ChannelChoice>,
}

pub fn choose_channels<T: Scalar>(rec: &Recording<T>, cfg: &ExperimentConfig) -> Result<ChannelChoice> {
    let epochs = slice_windows(rec, cfg.window_len, cfg.window_count, cfg.seed)?;
    let segments = (0..epochs.windows.len()).map(|w| epochs.window_recording(w)).collect::<Result<Vec<_>>>()?;
    let (_, aggregate) = mrmr_over_segments(&segments, &HistogramConfig::new(cfg.bins)?)?;
    if cfg.n_select == 0 || cfg.n_select > rec.n_channels() {
        return Err(Error::param("n_select", format!("must be in 1..={}, got {}", rec.n_channels(), cfg.n_select)));
    }
    let ranked: Vec<String> = aggregate.ranked().into_iter().map(|i| aggregate.channels[i].name.clone()).collect();
    Ok(ChannelChoice { selected: ranked[..cfg.n_select].to_vec(), ranked, windows: segments.len() })
}

/// Builds the feature matrix of one experiment from a prepared (outlier
/// free, centered) recording.
pub fn assemble<T: Scalar>(id: ExperimentId, rec: &Recording<T>, cfg: &ExperimentConfig) -> Result<Assembly<T>> {
    let selection = if id.uses_selection() { Some(choose_channels(rec, cfg)?) } else { None };
    let channel_idx: Vec<usize> = match &selection {
        Some(choice) => {
            let mut idx: Vec<usize> =
                choice.selected.iter().map(|n| rec.channel_index(n).expect("ranked names come from rec")).collect();
            idx.sort_unstable();
            idx
        }
        None => (0..rec.n_channels()).collect(),
    };
    let narrowed = rec.select_channels(&channel_idx)?;
    let (rows, windows) = if id.uses_epochs() {
        let epochs = slice_windows(&narrowed, cfg.window_len, cfg.window_count, cfg.seed)?;
        (epochs.rows, Some(epochs.windows))
    } else {
        (narrowed, None)
    };
    Ok(Assembly {
        experiment: id,
        dataset: Dataset::from_recording(&rows)?,
        channels: rows.names(),
        windows,
        selection,
    })
}

/// How the KNN neighbour count was fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnChoice {
    pub k: usize,
    /// `config`, `base-report` or `grid-search`.
    pub source: String,
    /// `(k, mean F1)` per searched cell; `None` marks a failed cell.
    pub grid: Vec<(usize, Option<f64>)>,
}

fn resolve_knn<T: Scalar>(rec: &Recording<T>, cfg: &ExperimentConfig, base: Option<&ExperimentReport>) -> Result<KnnChoice> {
    if let Some(k) = cfg.knn_k {
        return Ok(KnnChoice { k, source: "config".into(), grid: Vec::new() });
    }
    if let Some(b) = base {
        return Ok(KnnChoice { k: b.knn.k, source: "base-report".into(), grid: b.knn.grid.clone() });
    }
    let base_data = assemble(ExperimentId::Base, rec, cfg)?;
    let result = grid_search(&base_data.dataset, &knn_grid(&cfg.knn_grid), cfg.folds, cfg.seed)?;
    let grid = result
        .cells
        .iter()
        .map(|c| match c.params {
            Hyperparameters::Knn { k } => (k, c.mean_f1),
            _ => unreachable!("knn grid"),
        })
        .collect();
    let Hyperparameters::Knn { k } = *result.best_params() else { unreachable!("knn grid") };
    Ok(KnnChoice { k, source: "grid-search".into(), grid })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierRecord {
    pub classifier: ClassifierKind,
    pub hyperparameters: Hyperparameters,
    pub fold_f1: Vec<f64>,
    pub mean_f1: f64,
    /// Median over repeats of train plus predict seconds summed over folds.
    pub wall_clock_seconds: f64,
    pub repeat_seconds: Vec<f64>,
    pub repeats: usize,
    pub base_f1: Option<f64>,
    pub f1_gain: Option<f64>,
    pub speedup_gain: Option<f64>,
}

/// Machine description stored with timings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub cpu_model: String,
    pub logical_cores: usize,
    pub os: String,
    pub arch: String,
    /// Timed runs always train on one thread.
    pub training_threads: usize,
    pub repeats: usize,
}

impl Environment {
    pub fn detect(repeats: usize) -> Self {
        let cpu_model = std::fs::read_to_string("/proc/cpuinfo")
            .ok()
            .and_then(|s| {
                s.lines()
                    .find(|l| l.starts_with("model name"))
                    .and_then(|l| l.split_once(':'))
                    .map(|(_, v)| v.trim().to_string())
            })
            .unwrap_or_else(|| "unknown".into());
        Self {
            cpu_model,
            logical_cores: std::thread::available_parallelism().map_or(1, |n| n.get()),
            os: std::env::consts::OS.into(),
            arch: std::env::consts::ARCH.into(),
            training_threads: 1,
            repeats,
        }
    }
}

/// Published gains for comparison only. They come from different hardware
/// and are never asserted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceValue {
    pub classifier: ClassifierKind,
    pub f1_gain: Option<f64>,
    pub speedup_gain: Option<f64>,
}

pub fn reference_values(id: ExperimentId) -> Vec<ReferenceValue> {
    use ClassifierKind::*;
    let table: [(ClassifierKind, f64, Option<f64>); 4] = match id {
        ExperimentId::Base => return Vec::new(),
        ExperimentId::A => [(Knn, -0.2, Some(2.1)), (LogReg, -0.36, Some(2.0)), (Svc, -0.3, Some(3.0)), (Rf, -0.5, Some(0.3))],
        ExperimentId::B => [(Knn, -0.4, Some(4.3)), (LogReg, -0.6, Some(2.5)), (Svc, -0.7, Some(5.6)), (Rf, -0.7, Some(3.0))],
        ExperimentId::C => [(Knn, -0.1, None), (LogReg, -0.17, Some(2.3)), (Svc, -0.3, Some(1.9)), (Rf, -0.63, Some(3.0))],
    };
    table
        .into_iter()
        .map(|(classifier, f1, speed)| ReferenceValue { classifier, f1_gain: Some(f1), speedup_gain: speed })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub format_version: u32,
    pub experiment: ExperimentId,
    pub config: ExperimentConfig,
    /// Feature columns used.
    pub channels: Vec<String>,
    pub selection: Option<ChannelChoice>,
    pub n_rows: usize,
    pub n_features: usize,
    pub windows: Option<Vec<Window>>,
    pub knn: KnnChoice,
    pub records: Vec<ClassifierRecord>,
    pub environment: Environment,
    pub reference: Vec<ReferenceValue>,
}

/// Per-record keys holding wall-clock data.
const TIMING_KEYS: [&str; 3] = ["wall_clock_seconds", "repeat_seconds", "speedup_gain"];

impl ExperimentReport {
    pub fn record(&self, kind: ClassifierKind) -> Option<&ClassifierRecord> {
        self.records.iter().find(|r| r.classifier == kind)
    }

    /// Fills in gains against `base`. The base report itself always gets
    /// exactly 0 and 1.
    pub fn apply_gains(&mut self, base: Option<&ExperimentReport>) -> Result<()> {
        if self.experiment == ExperimentId::Base {
            for r in &mut self.records {
                r.base_f1 = Some(r.mean_f1);
                r.f1_gain = Some(0.0);
                r.speedup_gain = Some(1.0);
            }
            return Ok(());
        }
        let base = base.ok_or(Error::MissingBase)?;
        if base.experiment != ExperimentId::Base {
            return Err(Error::param("base", format!("expected a base report, got experiment {}", base.experiment)));
        }
        for r in &mut self.records {
            let b = base.record(r.classifier).ok_or(Error::MissingBase)?;
            r.base_f1 = Some(b.mean_f1);
            r.f1_gain = Some(r.mean_f1 - b.mean_f1);
            r.speedup_gain = Some(b.wall_clock_seconds / r.wall_clock_seconds);
        }
        Ok(())
    }

    /// Report with every wall-clock field removed; identical across runs
    /// with the same configuration and input.
    pub fn deterministic_value(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("report serializes");
        if let Some(map) = v.as_object_mut() {
            map.remove("environment");
            if let Some(records) = map.get_mut("records").and_then(|r| r.as_array_mut()) {
                for r in records.iter_mut().filter_map(|r| r.as_object_mut()) {
                    for k in TIMING_KEYS {
                        r.remove(k);
                    }
                }
            }
        }
        v
    }

    /// Only the wall-clock side of the report.
    pub fn timing_value(&self) -> serde_json::Value {
        let records: Vec<serde_json::Value> = self
            .records
            .iter()
            .map(|r| {
                serde_json::json!({
                    "classifier": r.classifier,
                    "wall_clock_seconds": r.wall_clock_seconds,
                    "repeat_seconds": r.repeat_seconds,
                    "speedup_gain": r.speedup_gain,
                })
            })
            .collect();
        serde_json::json!({
            "format_version": self.format_version,
            "experiment": self.experiment,
            "environment": self.environment,
            "records": records,
        })
    }
}

/// Evaluates every configured classifier on one experiment's data with a
/// shared fold plan. Gains are filled in when `base` is given (or when this
/// is the base run); KNN reuses the base report's neighbour count.
pub fn run_experiment<T: Scalar>(
    id: ExperimentId,
    rec: &Recording<T>,
    cfg: &ExperimentConfig,
    base: Option<&ExperimentReport>,
) -> Result<ExperimentReport> {
    if cfg.repeats == 0 {
        return Err(Error::param("repeats", "must be at least 1"));
    }
    let assembly = assemble(id, rec, cfg)?;
    let knn = if cfg.classifiers.contains(&ClassifierKind::Knn) {
        resolve_knn(rec, cfg, base)?
    } else {
        KnnChoice { k: 0, source: "unused".into(), grid: Vec::new() }
    };
    let plan = make_folds(assembly.dataset.targets(), cfg.folds, cfg.seed)?;
    let mut records = Vec::with_capacity(cfg.classifiers.len());
    for &kind in &cfg.classifiers {
        let params = cfg.hyperparameters(kind, knn.k);
        let t = timed_kfold(&params, &assembly.dataset, &plan, cfg.repeats)?;
        records.push(ClassifierRecord {
            classifier: kind,
            hyperparameters: params,
            fold_f1: t.fold_f1,
            mean_f1: t.mean_f1,
            wall_clock_seconds: t.median_seconds,
            repeat_seconds: t.repeat_seconds,
            repeats: cfg.repeats,
            base_f1: None,
            f1_gain: None,
            speedup_gain: None,
        });
    }
    let mut report = ExperimentReport {
        format_version: REPORT_FORMAT_VERSION,
        experiment: id,
        config: cfg.clone(),
        channels: assembly.channels,
        selection: assembly.selection,
        n_rows: assembly.dataset.n_rows(),
        n_features: assembly.dataset.n_features(),
        windows: assembly.windows,
        knn,
        records,
        environment: Environment::detect(cfg.repeats),
        reference: reference_values(id),
    };
    if id == ExperimentId::Base || base.is_some() {
        report.apply_gains(base)?;
    }
    Ok(report)
}

/// Runs the base experiment followed by `ids` (base is skipped if listed),
/// each with gains against that base.
pub fn run_grid<T: Scalar>(rec: &Recording<T>, cfg: &ExperimentConfig, ids: &[ExperimentId]) -> Result<Vec<ExperimentReport>> {
    let base = run_experiment(ExperimentId::Base, rec, cfg, None)?;
    let mut out = Vec::with_capacity(ids.len() + 1);
    for &id in ids.iter().filter(|&&id| id != ExperimentId::Base) {
        out.push(run_experiment(id, rec, cfg, Some(&base))?);
    }
    out.insert(0, base);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    /// Full report, lossless.
    Json,
    /// Per-fold F1 scores.
    Csv,
    /// Classifier / F1 gain / speed-up gain table.
    Markdown,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            "md" | "markdown" => Ok(ReportFormat::Markdown),
            _ => Err(Error::UnsupportedFormat(s.to_string())),
        }
    }
}

fn fmt_gain(g: Option<f64>) -> String {
    match g {
        Some(g) if g == 0.0 => "0".into(),
        Some(g) => format!("{g:+.3}"),
        None => "n/a".into(),
    }
}

fn fmt_speedup(s: Option<f64>) -> String {
    s.map_or_else(|| "n/a".into(), |s| format!("{s:.1}x"))
}

pub fn report_markdown(report: &ExperimentReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "| Classifier | F1 Score gain | Speed-up gain |");
    let _ = writeln!(out, "|---|---|---|");
    for r in &report.records {
        let _ = writeln!(out, "| {} | {} | {} |", r.classifier.label(), fmt_gain(r.f1_gain), fmt_speedup(r.speedup_gain));
    }
    out.push('\n');
    let _ = writeln!(
        out,
        "Experiment {}: {} rows x {} channels, {}-fold, median of {} repeats.",
        report.experiment, report.n_rows, report.n_features, report.config.folds, report.config.repeats
    );
    out.push('\n');
    let _ = writeln!(out, "| Classifier | F1 | Base F1 | Seconds | Published F1 gain | Published speed-up |");
    let _ = writeln!(out, "|---|---|---|---|---|---|");
    for r in &report.records {
        let reference = report.reference.iter().find(|v| v.classifier == r.classifier);
        let _ = writeln!(
            out,
            "| {} | {:.4} | {} | {:.3} | {} | {} |",
            r.classifier.label(),
            r.mean_f1,
            r.base_f1.map_or_else(|| "n/a".into(), |f| format!("{f:.4}")),
            r.wall_clock_seconds,
            fmt_gain(reference.and_then(|v| v.f1_gain)),
            fmt_speedup(reference.and_then(|v| v.speedup_gain)),
        );
    }
    out
}

pub fn report_csv(report: &ExperimentReport) -> String {
    let mut out = String::from("experiment,classifier,fold,f1\n");
    for r in &report.records {
        for (fold, f1) in r.fold_f1.iter().enumerate() {
            let _ = writeln!(out, "{},{},{},{}", report.experiment, r.classifier.label(), fold, f1);
        }
    }
    out
}

pub fn emit_report(report: &ExperimentReport, format: ReportFormat) -> Result<String> {
    Ok(match format {
        ReportFormat::Json => serde_json::to_string_pretty(report)?,
        ReportFormat::Csv => report_csv(report),
        ReportFormat::Markdown => report_markdown(report),
    })
}

pub fn parse_report(json: &str) -> Result<ExperimentReport> {
    let report: ExperimentReport = serde_json::from_str(json)?;
    if report.format_version != REPORT_FORMAT_VERSION {
        return Err(Error::Parse { what: "report", message: format!("unsupported format version {}", report.format_version) });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_rows_five_folds() {
        let targets = [0, 1, 0, 1, 0, 1, 0, 1, 0, 1];
        let plan = make_folds(&targets, 5, 3).unwrap();
        assert_eq!(plan.fold_sizes(), vec![2; 5]);
        for f in 0..5 {
            let mut labels: Vec<u8> = plan.test_rows(f).iter().map(|&r| targets[r]).collect();
            labels.sort();
            assert_eq!(labels, vec![0, 1]);
        }
        assert_eq!(plan, make_folds(&targets, 5, 3).unwrap());
        let plain = make_folds_with(&targets, 5, 3, false).unwrap();
        assert_eq!(plain.fold_sizes(), vec![2; 5]);
    }

    #[test]
    fn fold_errors() {
        assert!(make_folds(&[0, 1], 1, 0).is_err());
        assert!(make_folds(&[0, 1, 1], 4, 0).is_err());
        assert!(matches!(
            make_folds(&[0, 1, 1, 1, 1, 1], 2, 0),
            Err(Error::ClassTooSmall { class: 0, count: 1, folds: 2 })
        ));
    }

    #[test]
    fn f1_cases() {
        assert_eq!(f1_score(&[1, 0, 1], &[1, 0, 1]).unwrap(), 1.0);
        let f = f1_score(&[1, 1, 1, 1], &[1, 0, 1, 0]).unwrap();
        assert!((f - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(f1_score(&[0, 0], &[1, 0]).unwrap(), 0.0);
        assert!(f1_score(&[0], &[0, 1]).is_err());
    }

    #[test]
    fn median_rule() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0]), 2.5);
    }

    #[test]
    fn experiment_ids() {
        for id in ExperimentId::ALL {
            assert_eq!(id.to_string().parse::<ExperimentId>().unwrap(), id);
        }
        assert!("D".parse::<ExperimentId>().is_err());
        assert!(matches!("xml".parse::<ReportFormat>(), Err(Error::UnsupportedFormat(_))));
    }

    #[test]
    fn timed_kfold_shape() {
        let rows: Vec<Vec<f64>> = (0..30).map(|i| vec![i as f64, (i * i % 7) as f64]).collect();
        let labels = (0..30).map(|i| u8::from(i % 3 == 0)).collect();
        let data = Dataset::from_rows(&rows, labels).unwrap();
        let plan = make_folds(data.targets(), 5, 0).unwrap();
        let t = timed_kfold(&Hyperparameters::Knn { k: 1 }, &data, &plan, 3).unwrap();
        assert_eq!(t.fold_f1.len(), 5);
        assert_eq!(t.repeat_seconds.len(), 3);
        assert!(t.fold_f1.iter().all(|f| (0.0..=1.0).contains(f)));
        assert_eq!(t.median_seconds, median(&t.repeat_seconds));
    }
}
