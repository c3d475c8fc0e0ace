//! The experiment runner: dataset assembly, per-split pipeline
//! (normalize -> project -> tune -> train -> predict) with every fit
//! restricted to training rows, and report aggregation.

use std::path::PathBuf;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GaitError, Result};
use crate::features::{
    apply_normalizer, extract_feature_vector, fit_normalizer, FeatureMatrix, FEATURE_COUNT,
};
use crate::kelm::{accuracy, kelm_predict, kelm_train, KernelParams};
use crate::projection::{esp_fit, esp_transform_matrix, pca_fit, pca_transform, EspOptions};
use crate::pso::{pso_optimize, PsoConfig};
use crate::signal::{
    load_custom_csv_tree, load_har_windows, moving_average_filter, segment_windows, Layout,
    Sensor, SignalRecording, SubActivity, Window,
};
use crate::util::derive_seed;

use super::report::{ConfigEcho, EvalReport, StageTimings};
use super::{confidence_interval, stratified_kfold, timed, Split};

const STREAM_ANCHOR: u64 = 12;
const STREAM_FITNESS: u64 = 13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    None,
    Pca,
    Esp,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::None => "none",
            Method::Pca => "pca",
            Method::Esp => "esp",
        }
    }
}

impl FromStr for Method {
    type Err = GaitError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(Method::None),
            "pca" => Ok(Method::Pca),
            "esp" => Ok(Method::Esp),
            other => Err(GaitError::Config(format!(
                "unknown method {other:?} (expected none, pca or esp)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Protocol {
    /// Stratified k-fold over subject labels (multiclass identification).
    KFold(usize),
    /// Per-user legitimate-vs-rest evaluation with a chronological per-user
    /// session split; one reported split per user. This realizes the
    /// paper-style per-user tables, where a fully held-out subject could
    /// never be assigned its own label by a multiclass model.
    Loso,
}

impl Protocol {
    pub fn descriptor(&self) -> String {
        match self {
            Protocol::KFold(k) => format!("kfold-{k}"),
            Protocol::Loso => "loso".to_string(),
        }
    }
}

impl FromStr for Protocol {
    type Err = GaitError;
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        if lower == "loso" {
            return Ok(Protocol::Loso);
        }
        if let Some(k) = lower.strip_prefix("kfold:").or_else(|| lower.strip_prefix("kfold-")) {
            let k: usize = k
                .parse()
                .map_err(|_| GaitError::Config(format!("bad fold count in {s:?}")))?;
            return Ok(Protocol::KFold(k));
        }
        if lower == "kfold" {
            return Ok(Protocol::KFold(10));
        }
        Err(GaitError::Config(format!(
            "unknown protocol {s:?} (expected kfold[:k] or loso)"
        )))
    }
}

/// Where the windows come from.
#[derive(Debug, Clone)]
pub enum DatasetSource {
    CustomCsvDir(PathBuf),
    HarDir(PathBuf),
    Synthetic(super::SyntheticSpec),
    /// Pre-loaded recordings (tests, examples).
    Recordings(Vec<SignalRecording>),
}

impl DatasetSource {
    fn layout(&self) -> Layout {
        match self {
            DatasetSource::HarDir(_) => Layout::HarDir,
            _ => Layout::CustomCsv,
        }
    }
}

/// PSO tuning block: fitness is mean stratified inner-fold CV accuracy on
/// (a stratified subsample of) the training rows only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsoBlock {
    pub config: PsoConfig,
    /// Stratified row cap for fitness evaluation; the cross-validated solve
    /// is cubic in rows, so tuning runs on a bounded subsample.
    pub max_fitness_rows: usize,
    pub inner_folds: usize,
}

impl Default for PsoBlock {
    fn default() -> Self {
        PsoBlock {
            config: PsoConfig::default(),
            max_fitness_rows: 480,
            inner_folds: 3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub dataset: DatasetSource,
    pub sensor_filter: Option<Sensor>,
    pub activity_filter: Option<SubActivity>,
    pub window_size: usize,
    /// None uses the layout default: 0 for CUSTOM_CSV, 0.5 for HAR_DIR.
    pub overlap: Option<f64>,
    /// Moving-average order applied before segmentation.
    pub filter_order: usize,
    pub method: Method,
    /// Target dimension when method != none.
    pub n_features: usize,
    pub kernel_params: KernelParams,
    pub pso: Option<PsoBlock>,
    pub protocol: Protocol,
    pub confidence_level: f64,
    pub seed: u64,
    pub esp_options: EspOptions,
    /// ESP anchors are a stratified subsample of the training rows; the
    /// remaining rows enter through the out-of-sample transform.
    pub esp_max_anchors: usize,
    /// Chronological per-user train fraction for the loso protocol.
    pub loso_train_fraction: f64,
}

impl ExperimentConfig {
    pub fn new(dataset: DatasetSource) -> Self {
        ExperimentConfig {
            dataset,
            sensor_filter: None,
            activity_filter: None,
            window_size: 50,
            overlap: None,
            filter_order: 3,
            method: Method::None,
            n_features: 30,
            kernel_params: KernelParams::default(),
            pso: None,
            protocol: Protocol::KFold(10),
            confidence_level: 0.99,
            seed: 7,
            esp_options: EspOptions::default(),
            esp_max_anchors: 256,
            loso_train_fraction: 0.5,
        }
    }

    pub fn effective_overlap(&self) -> f64 {
        self.overlap.unwrap_or(match self.dataset.layout() {
            Layout::CustomCsv => 0.0,
            Layout::HarDir => 0.5,
        })
    }

    /// Checks every range the protocol relies on; runs before any
    /// computation so bad configs fail fast with a config error.
    pub fn validate(&self) -> Result<()> {
        if !(25..=200).contains(&self.window_size) {
            return Err(GaitError::Config(format!(
                "window_size {} outside the configured range [25, 200]",
                self.window_size
            )));
        }
        let overlap = self.effective_overlap();
        if !(0.0..1.0).contains(&overlap) {
            return Err(GaitError::Config(format!(
                "overlap {overlap} outside [0, 1)"
            )));
        }
        if self.method != Method::None {
            if !(5..=40).contains(&self.n_features) {
                return Err(GaitError::Config(format!(
                    "feature count {} outside the configured range [5, 40]",
                    self.n_features
                )));
            }
            if self.n_features > FEATURE_COUNT {
                return Err(GaitError::Config(format!(
                    "feature count {} exceeds the {FEATURE_COUNT}-dimensional input",
                    self.n_features
                )));
            }
        }
        if let Protocol::KFold(k) = self.protocol {
            if k < 2 {
                return Err(GaitError::Config(format!("kfold needs k >= 2, got {k}")));
            }
        }
        if !(0.0 < self.confidence_level && self.confidence_level < 1.0) {
            return Err(GaitError::Config(format!(
                "confidence level {} outside (0, 1)",
                self.confidence_level
            )));
        }
        if !(0.0 < self.loso_train_fraction && self.loso_train_fraction < 1.0) {
            return Err(GaitError::Config(format!(
                "loso train fraction {} outside (0, 1)",
                self.loso_train_fraction
            )));
        }
        self.kernel_params.validate().map_err(|e| GaitError::Config(e.to_string()))?;
        if let Some(pso) = &self.pso {
            pso.config
                .validate()
                .map_err(|e| GaitError::Config(e.to_string()))?;
            if pso.inner_folds < 2 {
                return Err(GaitError::Config("pso inner_folds must be >= 2".into()));
            }
        }
        Ok(())
    }

    fn echo(&self) -> ConfigEcho {
        ConfigEcho {
            window_size: self.window_size,
            overlap: self.effective_overlap(),
            method: self.method.as_str().to_string(),
            n_features: if self.method == Method::None {
                FEATURE_COUNT
            } else {
                self.n_features
            },
            sensor: self.sensor_filter.map(|s| s.as_str().to_string()),
            sub_activity: self.activity_filter.map(|a| a.as_str().to_string()),
            protocol: self.protocol.descriptor(),
            seed: self.seed,
            pso_enabled: self.pso.is_some(),
        }
    }
}

/// Loads, filters, denoises and segments the configured dataset into
/// windows. HAR rows arrive pre-segmented at 128 samples: they pass through
/// unchanged at window_size 128 and are re-segmented for smaller sizes;
/// larger sizes cannot be built from 128-sample rows and are a config error.
pub fn assemble_windows(config: &ExperimentConfig) -> Result<Vec<Window>> {
    let overlap = config.effective_overlap();
    let windows = match &config.dataset {
        DatasetSource::HarDir(dir) => {
            let rows = load_har_windows(dir)?;
            let row_len = rows.first().map(|w| w.len()).unwrap_or(0);
            if config.window_size > row_len {
                return Err(GaitError::Config(format!(
                    "window_size {} exceeds the pre-segmented HAR row length {row_len}",
                    config.window_size
                )));
            }
            let mut out = Vec::new();
            for row in rows {
                if config.window_size == row.len() {
                    out.push(row);
                    continue;
                }
                let rec = SignalRecording::new(
                    row.subject_id.clone(),
                    row.sensor,
                    row.sub_activity,
                    50.0,
                    (0..row.len())
                        .map(|i| [row.axes[0][i], row.axes[1][i], row.axes[2][i]])
                        .collect(),
                )?;
                let rec = moving_average_filter(&rec, config.filter_order)?;
                out.extend(segment_windows(&rec, config.window_size, overlap)?);
            }
            out
        }
        other => {
            let recordings = match other {
                DatasetSource::CustomCsvDir(dir) => load_custom_csv_tree(dir)?,
                DatasetSource::Synthetic(spec) => super::generate_synthetic_dataset(spec)?,
                DatasetSource::Recordings(recs) => recs.clone(),
                DatasetSource::HarDir(_) => unreachable!(),
            };
            let mut out = Vec::new();
            for rec in recordings {
                if let Some(sensor) = config.sensor_filter {
                    if rec.sensor != sensor {
                        continue;
                    }
                }
                if let Some(activity) = config.activity_filter {
                    if rec.sub_activity != activity {
                        continue;
                    }
                }
                if config.window_size > rec.len() {
                    return Err(GaitError::Config(format!(
                        "window_size {} exceeds recording length {} (subject {})",
                        config.window_size,
                        rec.len(),
                        rec.subject_id
                    )));
                }
                let filtered = moving_average_filter(&rec, config.filter_order)?;
                out.extend(segment_windows(&filtered, config.window_size, overlap)?);
            }
            out
        }
    };
    if windows.is_empty() {
        return Err(GaitError::EmptyOutput(
            "dataset produced no windows after filtering".into(),
        ));
    }
    Ok(windows)
}

/// Extracts the feature matrix from a window set.
pub fn extract_matrix(windows: &[Window]) -> Result<FeatureMatrix> {
    let rows: Vec<_> = crate::util::parallel_map(windows.len(), |i| {
        extract_feature_vector(&windows[i])
    });
    let mut vectors = Vec::with_capacity(rows.len());
    for r in rows {
        vectors.push(r?);
    }
    FeatureMatrix::from_rows(vectors)
}

/// Everything one split produced.
#[derive(Debug, Clone)]
pub struct SplitOutcome {
    pub descriptor: String,
    pub test_accuracy: f64,
    pub train_accuracy: f64,
    pub projection_s: Option<f64>,
    pub pso_s: Option<f64>,
    pub train_s: f64,
    pub predict_s: f64,
    pub params_used: KernelParams,
}

/// Runs the full leak-free pipeline on one split: the normalizer, the
/// projection, the PSO tuning and the classifier are all fitted on training
/// rows only; test rows are only transformed and scored.
pub fn run_split(
    features: &FeatureMatrix,
    labels: &[String],
    split: &Split,
    config: &ExperimentConfig,
    split_index: usize,
) -> Result<SplitOutcome> {
    if labels.len() != features.len() {
        return Err(GaitError::Shape(format!(
            "{} labels for {} rows",
            labels.len(),
            features.len()
        )));
    }
    let train = features.select(&split.train_indices)?;
    let test = features.select(&split.test_indices)?;
    let train_labels: Vec<String> = split.train_indices.iter().map(|&i| labels[i].clone()).collect();
    let test_labels: Vec<String> = split.test_indices.iter().map(|&i| labels[i].clone()).collect();

    let normalizer = fit_normalizer(&train)?;
    let train_n = apply_normalizer(&normalizer, &train)?;
    let test_n = apply_normalizer(&normalizer, &test)?;
    let train_x = train_n.values_matrix();
    let test_x = test_n.values_matrix();

    let (projected, projection_s) = match config.method {
        Method::None => ((train_x, test_x), None),
        Method::Pca => {
            let (result, secs) = timed(|| -> Result<(DMatrix<f64>, DMatrix<f64>)> {
                let model = pca_fit(&train_x, config.n_features)?;
                Ok((
                    pca_transform(&model, &train_x)?,
                    pca_transform(&model, &test_x)?,
                ))
            });
            (result?, Some(secs))
        }
        Method::Esp => {
            // Anchors stratified by (label, sub-activity) so every local
            // cluster is represented in the fitted configuration.
            let anchor_keys: Vec<String> = split
                .train_indices
                .iter()
                .zip(&train_labels)
                .map(|(&i, label)| format!("{label}|{}", features.rows[i].sub_activity.as_str()))
                .collect();
            let anchors = anchor_subsample(
                &anchor_keys,
                config.esp_max_anchors,
                derive_seed(config.seed, STREAM_ANCHOR, split_index as u64),
            );
            let (result, secs) = timed(|| -> Result<(DMatrix<f64>, DMatrix<f64>)> {
                let anchor_x = pick_rows(&train_x, &anchors);
                let model = esp_fit(&anchor_x, config.n_features, &config.esp_options)?;
                Ok((
                    esp_transform_matrix(&model, &train_x)?,
                    esp_transform_matrix(&model, &test_x)?,
                ))
            });
            (result?, Some(secs))
        }
    };
    let (train_p, test_p) = projected;

    let (params_used, pso_s) = match &config.pso {
        None => (config.kernel_params, None),
        Some(block) => {
            let fitness_seed = derive_seed(config.seed, STREAM_FITNESS, split_index as u64);
            let (outcome, secs) = timed(|| {
                tune_kernel_params(&train_p, &train_labels, block, fitness_seed)
            });
            (outcome?, Some(secs))
        }
    };

    let (model, train_s) = timed(|| kelm_train(&train_p, &train_labels, &params_used));
    let model = model?;
    let (pred_result, predict_s) = timed(|| kelm_predict(&model, &test_p));
    let (pred_test, _) = pred_result?;
    let (pred_train, _) = kelm_predict(&model, &train_p)?;

    Ok(SplitOutcome {
        descriptor: split.descriptor.clone(),
        test_accuracy: accuracy(&pred_test, &test_labels),
        train_accuracy: accuracy(&pred_train, &train_labels),
        projection_s,
        pso_s,
        train_s,
        predict_s,
        params_used,
    })
}

/// Stratified subsample of row indices, at most `cap`, balanced round-robin
/// across classes after a seeded shuffle. Indices refer to the *local*
/// (training) row order.
fn anchor_subsample(labels: &[String], cap: usize, seed: u64) -> Vec<usize> {
    let n = labels.len();
    if n <= cap {
        return (0..n).collect();
    }
    let mut by_class: std::collections::BTreeMap<&str, Vec<usize>> = Default::default();
    for (i, l) in labels.iter().enumerate() {
        by_class.entry(l.as_str()).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut queues: Vec<Vec<usize>> = by_class
        .into_values()
        .map(|mut v| {
            v.shuffle(&mut rng);
            v
        })
        .collect();
    let mut picked = Vec::with_capacity(cap);
    let mut round = 0usize;
    while picked.len() < cap {
        let mut any = false;
        for q in &mut queues {
            if round < q.len() {
                picked.push(q[round]);
                any = true;
                if picked.len() == cap {
                    break;
                }
            }
        }
        if !any {
            break;
        }
        round += 1;
    }
    picked.sort_unstable();
    picked
}

fn pick_rows(x: &DMatrix<f64>, indices: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(indices.len(), x.ncols(), |i, j| x[(indices[i], j)])
}

/// PSO fitness: mean stratified inner-fold CV accuracy on a bounded
/// stratified subsample of the training rows. Never sees test rows.
pub fn tune_kernel_params(
    train_x: &DMatrix<f64>,
    train_labels: &[String],
    block: &PsoBlock,
    seed: u64,
) -> Result<KernelParams> {
    let subsample = anchor_subsample(train_labels, block.max_fitness_rows, seed);
    let sub_x = pick_rows(train_x, &subsample);
    let sub_labels: Vec<String> = subsample.iter().map(|&i| train_labels[i].clone()).collect();
    let folds = stratified_kfold(&sub_labels, block.inner_folds, seed)?;

    let fitness = |params: &KernelParams| -> f64 {
        let mut acc_sum = 0.0;
        for fold in &folds {
            let tr_x = pick_rows(&sub_x, &fold.train_indices);
            let te_x = pick_rows(&sub_x, &fold.test_indices);
            let tr_l: Vec<String> = fold.train_indices.iter().map(|&i| sub_labels[i].clone()).collect();
            let te_l: Vec<String> = fold.test_indices.iter().map(|&i| sub_labels[i].clone()).collect();
            match kelm_train(&tr_x, &tr_l, params) {
                Ok(model) => match kelm_predict(&model, &te_x) {
                    Ok((pred, _)) => acc_sum += accuracy(&pred, &te_l),
                    Err(_) => return f64::NEG_INFINITY,
                },
                Err(_) => return f64::NEG_INFINITY,
            }
        }
        acc_sum / folds.len() as f64
    };

    let mut pso_config = block.config;
    pso_config.seed = seed;
    Ok(pso_optimize(fitness, &pso_config)?.best)
}

/// Runs the configured experiment end to end and assembles the report.
pub fn run_experiment(config: &ExperimentConfig) -> Result<EvalReport> {
    config.validate()?;
    let windows = assemble_windows(config)?;
    let (features, extraction_s) = timed(|| extract_matrix(&windows));
    let features = features?;
    let subject_labels = features.subject_labels();

    let splits_and_labels: Vec<(Split, Vec<String>)> = match config.protocol {
        Protocol::KFold(k) => {
            let splits = stratified_kfold(&subject_labels, k, config.seed)?;
            splits
                .into_iter()
                .map(|s| (s, subject_labels.clone()))
                .collect()
        }
        Protocol::Loso => per_user_session_splits(&subject_labels, config.loso_train_fraction)?,
    };

    let mut outcomes = Vec::with_capacity(splits_and_labels.len());
    for (i, (split, labels)) in splits_and_labels.iter().enumerate() {
        outcomes.push(run_split(&features, labels, split, config, i)?);
    }

    assemble_report(config, extraction_s, &outcomes)
}

/// Builds the per-user legitimate-vs-rest splits of the loso protocol: for
/// each user, rows of every subject are split chronologically (first
/// fraction trains, the rest tests) and labels are recast as binary
/// legitimate/impostor relative to that user.
pub fn per_user_session_splits(
    subject_labels: &[String],
    train_fraction: f64,
) -> Result<Vec<(Split, Vec<String>)>> {
    let mut subjects: Vec<&String> = subject_labels.iter().collect();
    subjects.sort();
    subjects.dedup();
    if subjects.len() < 2 {
        return Err(GaitError::InvalidInput(format!(
            "per-user evaluation needs at least 2 subjects, got {}",
            subjects.len()
        )));
    }
    // Chronological split per subject, shared by every user's evaluation.
    let mut train_indices = Vec::new();
    let mut test_indices = Vec::new();
    for subject in &subjects {
        let rows: Vec<usize> = subject_labels
            .iter()
            .enumerate()
            .filter(|(_, s)| s.as_str() == subject.as_str())
            .map(|(i, _)| i)
            .collect();
        let cut = ((rows.len() as f64) * train_fraction).ceil() as usize;
        let cut = cut.clamp(1, rows.len() - 1);
        train_indices.extend_from_slice(&rows[..cut]);
        test_indices.extend_from_slice(&rows[cut..]);
    }
    train_indices.sort_unstable();
    test_indices.sort_unstable();

    let subjects: Vec<String> = subjects.into_iter().cloned().collect();
    Ok(subjects
        .iter()
        .map(|user| {
            let labels: Vec<String> = subject_labels
                .iter()
                .map(|s| {
                    if s == user {
                        "legitimate".to_string()
                    } else {
                        "impostor".to_string()
                    }
                })
                .collect();
            (
                Split {
                    train_indices: train_indices.clone(),
                    test_indices: test_indices.clone(),
                    descriptor: format!("held-out subject {user}"),
                },
                labels,
            )
        })
        .collect())
}

fn assemble_report(
    config: &ExperimentConfig,
    extraction_s: f64,
    outcomes: &[SplitOutcome],
) -> Result<EvalReport> {
    let accuracies: Vec<f64> = outcomes.iter().map(|o| o.test_accuracy).collect();
    let (mean, halfwidth) = if accuracies.len() >= 2 {
        confidence_interval(&accuracies, config.confidence_level)?
    } else {
        (accuracies.first().copied().unwrap_or(0.0), 0.0)
    };
    let projection_s = if config.method == Method::None {
        None
    } else {
        Some(outcomes.iter().filter_map(|o| o.projection_s).sum())
    };
    let pso_s = if config.pso.is_some() {
        Some(outcomes.iter().filter_map(|o| o.pso_s).sum())
    } else {
        None
    };
    Ok(EvalReport {
        protocol: config.protocol.descriptor(),
        per_split_descriptors: outcomes.iter().map(|o| o.descriptor.clone()).collect(),
        per_split_accuracy: accuracies,
        mean_accuracy: mean,
        ci_halfwidth: halfwidth,
        confidence_level: config.confidence_level,
        timings: StageTimings {
            feature_extraction_s: extraction_s,
            projection_s,
            train_s: outcomes.iter().map(|o| o.train_s).sum(),
            predict_s: outcomes.iter().map(|o| o.predict_s).sum(),
            pso_s,
        },
        config: config.echo(),
        kernel_params_per_split: outcomes.iter().map(|o| o.params_used).collect(),
        fallback_count: 0,
    })
}
