//! The 72-dimensional per-window feature vector and feature-matrix plumbing.
//!
//! Per axis, in fixed schema order: 5 basic statistics, autocorrelation
//! lags 1-4, partial autocorrelation lags 1-4, AR(3) coefficients, MA(3)
//! coefficients, ARMA(1,1) coefficients, and Haar detail energies at levels
//! 1-3 — 24 features per axis, 72 per window. The layout is a frozen
//! contract: [`feature_schema`] enumerates it and extraction follows it
//! exactly, so a column index always means the same feature.

pub mod correlation;
pub mod stats;
pub mod timeseries;
pub mod wavelet;

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{GaitError, Result};
use crate::signal::{Sensor, SubActivity, Window};

pub use correlation::{autocorrelation, partial_autocorrelation, CorrSequence};
pub use stats::{basic_stats, BasicStats};
pub use timeseries::{fit_ar, fit_arma, fit_ma, TimeSeriesFit};
pub use wavelet::haar_detail_energies;

pub const FEATURES_PER_AXIS: usize = 24;
pub const FEATURE_COUNT: usize = 72;
/// Windows shorter than this use the reduced-reliability path: features are
/// still emitted but flagged (the AR pre-fit has fewer than 10 samples per
/// coefficient).
pub const FULL_RELIABILITY_LEN: usize = 31;

const AXIS_NAMES: [&str; 3] = ["x", "y", "z"];
const PER_AXIS_NAMES: [&str; FEATURES_PER_AXIS] = [
    "mean", "median", "variance", "std", "iqr", //
    "ac1", "ac2", "ac3", "ac4", //
    "pac1", "pac2", "pac3", "pac4", //
    "ar1", "ar2", "ar3", //
    "ma1", "ma2", "ma3", //
    "arma_ar1", "arma_ma1", //
    "haar1", "haar2", "haar3",
];

/// The frozen (axis, feature-name) layout, index-aligned with extraction.
pub fn feature_schema() -> Vec<(&'static str, &'static str)> {
    let mut out = Vec::with_capacity(FEATURE_COUNT);
    for axis in AXIS_NAMES {
        for name in PER_AXIS_NAMES {
            out.push((axis, name));
        }
    }
    out
}

/// Column names in schema order, e.g. `x_mean`, ..., `z_haar3`.
pub fn feature_names() -> Vec<String> {
    feature_schema()
        .iter()
        .map(|(axis, name)| format!("{axis}_{name}"))
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureFlags {
    /// At least one axis was constant; its model coefficients are zeros.
    pub degenerate: bool,
    /// Window shorter than [`FULL_RELIABILITY_LEN`].
    pub short_window: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    /// Exactly [`FEATURE_COUNT`] finite values in schema order.
    pub values: Vec<f64>,
    pub subject_id: String,
    pub sub_activity: SubActivity,
    pub sensor: Sensor,
    pub window_size: usize,
    pub flags: FeatureFlags,
}

/// Computes the 72-feature vector of one window.
pub fn extract_feature_vector(window: &Window) -> Result<FeatureVector> {
    let len = window.len();
    let mut values = Vec::with_capacity(FEATURE_COUNT);
    let mut degenerate = false;

    for axis in &window.axes {
        let s = stats::basic_stats(axis)?;
        values.extend_from_slice(&[s.mean, s.median, s.variance, s.std_dev, s.iqr]);

        let ac = correlation::autocorrelation(axis, 4)?;
        degenerate |= ac.degenerate;
        values.extend_from_slice(&ac.values);

        let pac = correlation::partial_autocorrelation(axis, 4)?;
        values.extend_from_slice(&pac.values);

        let ar = timeseries::fit_ar(axis, 3)?;
        degenerate |= ar.degenerate;
        values.extend_from_slice(&ar.ar_coefficients);

        let ma = timeseries::fit_ma(axis, 3)?;
        degenerate |= ma.degenerate;
        values.extend_from_slice(&ma.ma_coefficients);

        let arma = timeseries::fit_arma(axis, 1, 1)?;
        degenerate |= arma.degenerate;
        values.push(arma.ar_coefficients[0]);
        values.push(arma.ma_coefficients[0]);

        let haar = wavelet::haar_detail_energies(axis, 3)?;
        values.extend_from_slice(&haar);
    }

    debug_assert_eq!(values.len(), FEATURE_COUNT);
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        let (axis, name) = feature_schema()[i];
        return Err(GaitError::InvalidInput(format!(
            "non-finite feature {axis}_{name}"
        )));
    }
    Ok(FeatureVector {
        values,
        subject_id: window.subject_id.clone(),
        sub_activity: window.sub_activity,
        sensor: window.sensor,
        window_size: len,
        flags: FeatureFlags {
            degenerate,
            short_window: len < FULL_RELIABILITY_LEN,
        },
    })
}

/// Per-column min-max parameters fitted on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl Normalization {
    pub fn dim(&self) -> usize {
        self.min.len()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureMatrix {
    pub rows: Vec<FeatureVector>,
    /// Set after [`apply_normalizer`]; carries the fit used.
    pub normalization: Option<Normalization>,
}

impl FeatureMatrix {
    pub fn from_rows(rows: Vec<FeatureVector>) -> Result<Self> {
        if let Some(first) = rows.first() {
            let ws = first.window_size;
            let dim = first.values.len();
            for (i, r) in rows.iter().enumerate() {
                if r.window_size != ws {
                    return Err(GaitError::Shape(format!(
                        "row {i} window_size {} differs from {ws}",
                        r.window_size
                    )));
                }
                if r.values.len() != dim {
                    return Err(GaitError::Shape(format!(
                        "row {i} has {} values, expected {dim}",
                        r.values.len()
                    )));
                }
            }
        }
        Ok(FeatureMatrix {
            rows,
            normalization: None,
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.rows.first().map(|r| r.values.len()).unwrap_or(0)
    }

    /// Dense values matrix, one row per window.
    pub fn values_matrix(&self) -> DMatrix<f64> {
        let n = self.len();
        let d = self.dim();
        DMatrix::from_fn(n, d, |i, j| self.rows[i].values[j])
    }

    pub fn subject_labels(&self) -> Vec<String> {
        self.rows.iter().map(|r| r.subject_id.clone()).collect()
    }

    pub fn activity_labels(&self) -> Vec<String> {
        self.rows
            .iter()
            .map(|r| r.sub_activity.as_str().to_string())
            .collect()
    }

    /// Sub-matrix with the given row indices, in the given order.
    pub fn select(&self, indices: &[usize]) -> Result<FeatureMatrix> {
        let mut rows = Vec::with_capacity(indices.len());
        for &i in indices {
            let row = self.rows.get(i).ok_or_else(|| {
                GaitError::InvalidInput(format!("row index {i} out of range ({})", self.len()))
            })?;
            rows.push(row.clone());
        }
        Ok(FeatureMatrix {
            rows,
            normalization: self.normalization.clone(),
        })
    }

    /// CSV form: a `# window_size=N` comment, the schema header with
    /// `subject,activity,sensor` appended, one window per row.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        let ws = self.rows.first().map(|r| r.window_size).unwrap_or(0);
        writeln!(out, "# window_size={ws}").expect("string write");
        let mut header = feature_names().join(",");
        header.push_str(",subject,activity,sensor");
        writeln!(out, "{header}").expect("string write");
        for row in &self.rows {
            for v in &row.values {
                write!(out, "{v:.12e},").expect("string write");
            }
            writeln!(
                out,
                "{},{},{}",
                row.subject_id,
                row.sub_activity.as_str(),
                row.sensor.as_str()
            )
            .expect("string write");
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| GaitError::io(dir.display().to_string(), e))?;
        }
        fs::write(path, self.to_csv_string())
            .map_err(|e| GaitError::io(path.display().to_string(), e))
    }

    /// Reads a CSV produced by [`FeatureMatrix::write_csv`].
    pub fn read_csv(path: &Path) -> Result<FeatureMatrix> {
        let text =
            fs::read_to_string(path).map_err(|e| GaitError::io(path.display().to_string(), e))?;
        let mut rows = Vec::new();
        let mut window_size = 0usize;
        let mut dim = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(v) = rest.trim().strip_prefix("window_size=") {
                    window_size = v.trim().parse().unwrap_or(0);
                }
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.first() == Some(&"x_mean") {
                dim = Some(fields.len().saturating_sub(3));
                continue; // header
            }
            if fields.len() < 4 {
                return Err(GaitError::Parse {
                    path: path.display().to_string(),
                    line: lineno + 1,
                    msg: "too few columns".into(),
                });
            }
            let d = dim.unwrap_or(fields.len() - 3);
            let mut values = Vec::with_capacity(d);
            for f in &fields[..d] {
                values.push(f.parse::<f64>().map_err(|_| GaitError::Parse {
                    path: path.display().to_string(),
                    line: lineno + 1,
                    msg: format!("non-numeric feature {f:?}"),
                })?);
            }
            rows.push(FeatureVector {
                values,
                subject_id: fields[d].to_string(),
                sub_activity: SubActivity::from_str(fields[d + 1])?,
                sensor: Sensor::from_str(fields[d + 2])?,
                window_size,
                flags: FeatureFlags::default(),
            });
        }
        if rows.is_empty() {
            return Err(GaitError::EmptyInput(format!(
                "{} holds no feature rows",
                path.display()
            )));
        }
        FeatureMatrix::from_rows(rows)
    }
}

/// Fits per-column min-max parameters on training rows only.
pub fn fit_normalizer(train: &FeatureMatrix) -> Result<Normalization> {
    if train.is_empty() {
        return Err(GaitError::EmptyInput(
            "cannot fit a normalizer on an empty matrix".into(),
        ));
    }
    let d = train.dim();
    let mut min = vec![f64::INFINITY; d];
    let mut max = vec![f64::NEG_INFINITY; d];
    for row in &train.rows {
        for (j, v) in row.values.iter().enumerate() {
            min[j] = min[j].min(*v);
            max[j] = max[j].max(*v);
        }
    }
    Ok(Normalization { min, max })
}

/// Applies min-max scaling: training values land in [0,1] by construction,
/// out-of-range (test) values are clipped to [0,1], and columns that were
/// constant in training map to 0.5.
pub fn apply_normalizer(params: &Normalization, matrix: &FeatureMatrix) -> Result<FeatureMatrix> {
    if params.dim() != matrix.dim() && !matrix.is_empty() {
        return Err(GaitError::Shape(format!(
            "normalizer has {} columns, matrix has {}",
            params.dim(),
            matrix.dim()
        )));
    }
    let mut rows = matrix.rows.clone();
    for row in &mut rows {
        for (j, v) in row.values.iter_mut().enumerate() {
            let range = params.max[j] - params.min[j];
            *v = if range <= 0.0 {
                0.5
            } else {
                ((*v - params.min[j]) / range).clamp(0.0, 1.0)
            };
        }
    }
    Ok(FeatureMatrix {
        rows,
        normalization: Some(params.clone()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::Window;

    fn window_from(axes: [Vec<f64>; 3]) -> Window {
        Window::new("s1", Sensor::Acc, SubActivity::Flp, axes).unwrap()
    }

    fn noisy_window(n: usize, seed: u64) -> Window {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let gen = |rng: &mut rand_chacha::ChaCha8Rng| {
            (0..n)
                .map(|i| (i as f64 * 0.3).sin() + rng.random_range(-0.2..0.2))
                .collect::<Vec<f64>>()
        };
        let a = gen(&mut rng);
        let b = gen(&mut rng);
        let c = gen(&mut rng);
        window_from([a, b, c])
    }

    #[test]
    fn schema_has_72_unique_entries() {
        let schema = feature_schema();
        assert_eq!(schema.len(), FEATURE_COUNT);
        let names = feature_names();
        let unique: std::collections::BTreeSet<_> = names.iter().collect();
        assert_eq!(unique.len(), FEATURE_COUNT);
    }

    #[test]
    fn vector_has_exactly_72_finite_values() {
        for n in [25usize, 50, 100, 200] {
            let fv = extract_feature_vector(&noisy_window(n, n as u64)).unwrap();
            assert_eq!(fv.values.len(), 72);
            assert!(fv.values.iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn all_zero_window_degenerates_cleanly() {
        let w = window_from([vec![0.0; 50], vec![0.0; 50], vec![0.0; 50]]);
        let fv = extract_feature_vector(&w).unwrap();
        assert!(fv.flags.degenerate);
        assert!(fv.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn extraction_is_deterministic() {
        let w = noisy_window(50, 77);
        let a = extract_feature_vector(&w).unwrap();
        let b = extract_feature_vector(&w).unwrap();
        assert_eq!(a.values, b.values);
    }

    #[test]
    fn short_window_flagged_but_emitted() {
        let fv = extract_feature_vector(&noisy_window(25, 5)).unwrap();
        assert!(fv.flags.short_window);
        assert_eq!(fv.values.len(), 72);
        let fv = extract_feature_vector(&noisy_window(31, 5)).unwrap();
        assert!(!fv.flags.short_window);
    }

    #[test]
    fn scale_covariance() {
        // Multiplying an axis by s > 0 leaves AC/PAC/AR/MA/ARMA unchanged,
        // scales variance and haar energies by s^2, std and iqr by s.
        let w = noisy_window(100, 13);
        let base = extract_feature_vector(&w).unwrap();
        let s = 3.7;
        let mut scaled_axes = w.axes.clone();
        for v in &mut scaled_axes[0] {
            *v *= s;
        }
        let scaled = extract_feature_vector(&window_from(scaled_axes)).unwrap();
        let schema = feature_schema();
        for (i, (axis, name)) in schema.iter().enumerate() {
            let (b, sc) = (base.values[i], scaled.values[i]);
            if *axis != "x" {
                assert_eq!(b, sc, "{axis}_{name} must not change");
                continue;
            }
            let expected = match *name {
                "mean" | "median" => b * s,
                "variance" | "haar1" | "haar2" | "haar3" => b * s * s,
                "std" | "iqr" => b * s,
                _ => b, // correlation and model coefficients are scale-free
            };
            assert!(
                (sc - expected).abs() <= 1e-9 * expected.abs().max(1.0),
                "x_{name}: got {sc}, expected {expected}"
            );
        }
    }

    #[test]
    fn normalizer_basics() {
        let mk = |vals: Vec<f64>| FeatureVector {
            values: vals,
            subject_id: "s".into(),
            sub_activity: SubActivity::Generic,
            sensor: Sensor::Acc,
            window_size: 50,
            flags: FeatureFlags::default(),
        };
        let train = FeatureMatrix::from_rows(vec![
            mk(vec![2.0, 1.0]),
            mk(vec![4.0, 1.0]),
            mk(vec![6.0, 1.0]),
        ])
        .unwrap();
        let params = fit_normalizer(&train).unwrap();
        let normed = apply_normalizer(&params, &train).unwrap();
        let col: Vec<f64> = normed.rows.iter().map(|r| r.values[0]).collect();
        assert_eq!(col, vec![0.0, 0.5, 1.0]);
        // constant column maps to 0.5
        assert!(normed.rows.iter().all(|r| r.values[1] == 0.5));
        // out-of-range test value clips to 1.0
        let test = FeatureMatrix::from_rows(vec![mk(vec![8.0, 1.0])]).unwrap();
        let normed_test = apply_normalizer(&params, &test).unwrap();
        assert_eq!(normed_test.rows[0].values[0], 1.0);
    }

    #[test]
    fn normalizer_shape_mismatch() {
        let params = Normalization {
            min: vec![0.0; 3],
            max: vec![1.0; 3],
        };
        let m = FeatureMatrix::from_rows(vec![FeatureVector {
            values: vec![1.0, 2.0],
            subject_id: "s".into(),
            sub_activity: SubActivity::Generic,
            sensor: Sensor::Acc,
            window_size: 10,
            flags: FeatureFlags::default(),
        }])
        .unwrap();
        assert!(matches!(
            apply_normalizer(&params, &m),
            Err(GaitError::Shape(_))
        ));
    }

    #[test]
    fn normalized_training_columns_span_unit_interval() {
        let mut rows = Vec::new();
        for i in 0..20 {
            let w = noisy_window(50, 100 + i);
            rows.push(extract_feature_vector(&w).unwrap());
        }
        let m = FeatureMatrix::from_rows(rows).unwrap();
        let params = fit_normalizer(&m).unwrap();
        let normed = apply_normalizer(&params, &m).unwrap();
        for j in 0..normed.dim() {
            let col: Vec<f64> = normed.rows.iter().map(|r| r.values[j]).collect();
            let lo = col.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if params.max[j] > params.min[j] {
                assert_eq!(lo, 0.0, "column {j} min");
                assert_eq!(hi, 1.0, "column {j} max");
            } else {
                assert!(col.iter().all(|&v| v == 0.5));
            }
        }
    }

    #[test]
    fn csv_round_trip() {
        let mut rows = Vec::new();
        for i in 0..4 {
            rows.push(extract_feature_vector(&noisy_window(50, 200 + i)).unwrap());
        }
        let m = FeatureMatrix::from_rows(rows).unwrap();
        let dir = std::env::temp_dir().join(format!("gaitid_feat_{}", std::process::id()));
        let path = dir.join("features.csv");
        m.write_csv(&path).unwrap();
        let back = FeatureMatrix::read_csv(&path).unwrap();
        assert_eq!(back.len(), m.len());
        assert_eq!(back.rows[0].window_size, 50);
        for (a, b) in back.rows.iter().zip(&m.rows) {
            assert_eq!(a.subject_id, b.subject_id);
            for (x, y) in a.values.iter().zip(&b.values) {
                assert!((x - y).abs() < 1e-10);
            }
        }
        std::fs::remove_dir_all(&dir).ok();
    }
}
