//! Evaluation reports: JSON for machines, aligned text for humans, and a
//! CSV row shape mirroring the paper-style result tables
//! (method, features, window, accuracy, halfwidth, time).

use serde::{Deserialize, Serialize};

use crate::kelm::KernelParams;

/// Per-stage wall-clock seconds. Projection is absent when no reduction
/// method ran. Values are summed over the splits of one experiment; feature
/// extraction happens once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct StageTimings {
    pub feature_extraction_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub projection_s: Option<f64>,
    pub train_s: f64,
    pub predict_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pso_s: Option<f64>,
}

impl StageTimings {
    /// Train + predict: the per-experiment classification time reported in
    /// the benchmark trend.
    pub fn classification_s(&self) -> f64 {
        self.train_s + self.predict_s
    }
}

/// Configuration echo carried inside every report so result files are
/// self-describing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub window_size: usize,
    pub overlap: f64,
    pub method: String,
    pub n_features: usize,
    pub sensor: Option<String>,
    pub sub_activity: Option<String>,
    pub protocol: String,
    pub seed: u64,
    pub pso_enabled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub protocol: String,
    pub per_split_descriptors: Vec<String>,
    /// Plain per-window classification accuracy per split, in [0,1].
    pub per_split_accuracy: Vec<f64>,
    pub mean_accuracy: f64,
    /// Halfwidth of the t confidence interval at `confidence_level`.
    pub ci_halfwidth: f64,
    pub confidence_level: f64,
    pub timings: StageTimings,
    pub config: ConfigEcho,
    /// Kernel parameters used per split (PSO-tuned or the fixed config).
    pub kernel_params_per_split: Vec<KernelParams>,
    /// Splits that fell back to a global model (two-stage pipelines only).
    pub fallback_count: usize,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> crate::error::Result<Self> {
        serde_json::from_str(text).map_err(|e| crate::error::GaitError::Serialization(e.to_string()))
    }

    /// Human-readable aligned table.
    pub fn to_text_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "protocol: {}   method: {}   features: {}   window: {}\n",
            self.protocol, self.config.method, self.config.n_features, self.config.window_size
        ));
        out.push_str(&format!(
            "mean accuracy: {:.4} +/- {:.4} ({}% CI)\n",
            self.mean_accuracy,
            self.ci_halfwidth,
            (self.confidence_level * 100.0).round()
        ));
        out.push_str(&format!(
            "timings [s]: extract {:.3}{}  train {:.3}  predict {:.3}\n",
            self.timings.feature_extraction_s,
            match self.timings.projection_s {
                Some(p) => format!("  project {p:.3}"),
                None => String::new(),
            },
            self.timings.train_s,
            self.timings.predict_s
        ));
        let width = self
            .per_split_descriptors
            .iter()
            .map(|d| d.len())
            .max()
            .unwrap_or(8)
            .max(8);
        out.push_str(&format!("{:<width$}  accuracy\n", "split"));
        for (d, a) in self
            .per_split_descriptors
            .iter()
            .zip(&self.per_split_accuracy)
        {
            out.push_str(&format!("{d:<width$}  {a:.4}\n"));
        }
        out
    }

    pub fn csv_header() -> &'static str {
        "method,features,window,protocol,accuracy,halfwidth,time_s"
    }

    /// One table-shaped CSV row; `time_s` is the classification time.
    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{:.4},{:.4},{:.3}",
            self.config.method,
            self.config.n_features,
            self.config.window_size,
            self.protocol,
            self.mean_accuracy,
            self.ci_halfwidth,
            self.timings.classification_s()
        )
    }
}
