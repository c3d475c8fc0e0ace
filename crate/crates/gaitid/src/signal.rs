//! Raw tri-axial signal ingestion: CSV and HAR-style dataset readers, the
//! moving-average noise filter, and sliding-window segmentation.
//!
//! Two on-disk layouts are supported:
//!
//! * `CUSTOM_CSV` — one UTF-8 file per (subject, sensor, sub-activity)
//!   session, optional `t,ax,ay,az` header, one sample per row, organised as
//!   `<root>/<subject_id>/<sensor>/<sub_activity>[_s<k>].csv`.
//! * `HAR_DIR` — space-separated fixed-width text files with one
//!   pre-segmented window per row (per-axis signal files plus a subject-id
//!   file, optionally an activity-label file).

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{GaitError, Result};

/// Minimum window length: lag-4 statistics and 3-level Haar analysis both
/// need at least 8 samples.
pub const MIN_WINDOW_LEN: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Sensor {
    /// Raw accelerometer (gravity included).
    Acc,
    /// Linear acceleration (gravity removed).
    Lacc,
}

impl Sensor {
    pub fn as_str(&self) -> &'static str {
        match self {
            Sensor::Acc => "ACC",
            Sensor::Lacc => "LACC",
        }
    }
}

impl FromStr for Sensor {
    type Err = GaitError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "ACC" => Ok(Sensor::Acc),
            "LACC" => Ok(Sensor::Lacc),
            other => Err(GaitError::InvalidParameter(format!(
                "unknown sensor {other:?} (expected ACC or LACC)"
            ))),
        }
    }
}

impl fmt::Display for Sensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Walking variant defined by phone placement (pants pocket), plus a
/// catch-all for datasets without pocket annotations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum SubActivity {
    /// Back-left pocket.
    Blp,
    /// Back-right pocket.
    Brp,
    /// Front-left pocket.
    Flp,
    /// Front-right pocket.
    Frp,
    Generic,
}

impl SubActivity {
    pub const POCKETS: [SubActivity; 4] = [
        SubActivity::Blp,
        SubActivity::Brp,
        SubActivity::Flp,
        SubActivity::Frp,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SubActivity::Blp => "BLP",
            SubActivity::Brp => "BRP",
            SubActivity::Flp => "FLP",
            SubActivity::Frp => "FRP",
            SubActivity::Generic => "GENERIC",
        }
    }
}

impl FromStr for SubActivity {
    type Err = GaitError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "BLP" => Ok(SubActivity::Blp),
            "BRP" => Ok(SubActivity::Brp),
            "FLP" => Ok(SubActivity::Flp),
            "FRP" => Ok(SubActivity::Frp),
            "GENERIC" => Ok(SubActivity::Generic),
            other => Err(GaitError::InvalidParameter(format!(
                "unknown sub-activity {other:?}"
            ))),
        }
    }
}

impl fmt::Display for SubActivity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// On-disk dataset layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    CustomCsv,
    HarDir,
}

impl FromStr for Layout {
    type Err = GaitError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "custom_csv" | "csv" => Ok(Layout::CustomCsv),
            "har_dir" | "har" => Ok(Layout::HarDir),
            other => Err(GaitError::InvalidParameter(format!(
                "unknown layout {other:?} (expected custom_csv or har_dir)"
            ))),
        }
    }
}

/// One subject/sensor/sub-activity session of tri-axial samples at a fixed
/// rate. Samples are `[ax, ay, az]` accelerations in m/s².
#[derive(Debug, Clone, PartialEq)]
pub struct SignalRecording {
    pub subject_id: String,
    pub sensor: Sensor,
    pub sub_activity: SubActivity,
    pub sample_rate_hz: f64,
    pub samples: Vec<[f64; 3]>,
}

impl SignalRecording {
    pub fn new(
        subject_id: impl Into<String>,
        sensor: Sensor,
        sub_activity: SubActivity,
        sample_rate_hz: f64,
        samples: Vec<[f64; 3]>,
    ) -> Result<Self> {
        if samples.is_empty() {
            return Err(GaitError::EmptyInput("recording has no samples".into()));
        }
        if !(sample_rate_hz > 0.0) {
            return Err(GaitError::InvalidParameter(format!(
                "sample_rate_hz must be positive, got {sample_rate_hz}"
            )));
        }
        if let Some(i) = samples
            .iter()
            .position(|s| s.iter().any(|v| !v.is_finite()))
        {
            return Err(GaitError::InvalidInput(format!(
                "non-finite sample at index {i}"
            )));
        }
        Ok(SignalRecording {
            subject_id: subject_id.into(),
            sensor,
            sub_activity,
            sample_rate_hz,
            samples,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// One axis as a contiguous sequence (0 = x, 1 = y, 2 = z).
    pub fn axis(&self, idx: usize) -> Vec<f64> {
        self.samples.iter().map(|s| s[idx]).collect()
    }
}

/// A fixed-length slice of a recording, the unit of feature extraction.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub subject_id: String,
    pub sensor: Sensor,
    pub sub_activity: SubActivity,
    pub axes: [Vec<f64>; 3],
}

impl Window {
    pub fn new(
        subject_id: impl Into<String>,
        sensor: Sensor,
        sub_activity: SubActivity,
        axes: [Vec<f64>; 3],
    ) -> Result<Self> {
        let len = axes[0].len();
        if axes[1].len() != len || axes[2].len() != len {
            return Err(GaitError::Shape(format!(
                "axis lengths differ: {}, {}, {}",
                axes[0].len(),
                axes[1].len(),
                axes[2].len()
            )));
        }
        if len < MIN_WINDOW_LEN {
            return Err(GaitError::InvalidInput(format!(
                "window length {len} below minimum {MIN_WINDOW_LEN}"
            )));
        }
        Ok(Window {
            subject_id: subject_id.into(),
            sensor,
            sub_activity,
            axes,
        })
    }

    pub fn len(&self) -> usize {
        self.axes[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.axes[0].is_empty()
    }
}

/// Reads one CUSTOM_CSV session file.
///
/// Rows are `t,ax,ay,az`; the header is optional. Subject, sensor and
/// sub-activity are recovered from the `<subject>/<sensor>/<activity>.csv`
/// path convention when present, otherwise placeholders are used.
/// Timestamps are checked for monotonicity (warning on stderr, not an
/// error) and otherwise ignored; the rate defaults to 50 Hz.
pub fn load_recording(path: &Path) -> Result<SignalRecording> {
    let text = fs::read_to_string(path).map_err(|e| GaitError::io(path.display().to_string(), e))?;
    let (subject, sensor, activity) = metadata_from_path(path);

    let mut samples = Vec::new();
    let mut last_t: Option<f64> = None;
    let mut warned = false;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if lineno == 0 && fields.first().map(|f| f.eq_ignore_ascii_case("t")) == Some(true) {
            continue; // header
        }
        if fields.len() != 4 {
            return Err(GaitError::Parse {
                path: path.display().to_string(),
                line: lineno + 1,
                msg: format!("expected 4 comma-separated values, got {}", fields.len()),
            });
        }
        let mut vals = [0.0f64; 4];
        for (i, f) in fields.iter().enumerate() {
            vals[i] = f.parse::<f64>().map_err(|_| GaitError::Parse {
                path: path.display().to_string(),
                line: lineno + 1,
                msg: format!("non-numeric field {f:?}"),
            })?;
        }
        if let Some(prev) = last_t {
            if vals[0] < prev && !warned {
                eprintln!(
                    "warning: {}: non-monotonic timestamp at line {}",
                    path.display(),
                    lineno + 1
                );
                warned = true;
            }
        }
        last_t = Some(vals[0]);
        samples.push([vals[1], vals[2], vals[3]]);
    }
    if samples.is_empty() {
        return Err(GaitError::EmptyInput(format!(
            "{} holds no samples",
            path.display()
        )));
    }
    SignalRecording::new(subject, sensor, activity, 50.0, samples)
}

fn metadata_from_path(path: &Path) -> (String, Sensor, SubActivity) {
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("GENERIC");
    // Session suffix `_s<k>` is stripped before matching the activity code.
    let activity_code = match stem.rfind("_s") {
        Some(pos) if stem[pos + 2..].chars().all(|c| c.is_ascii_digit()) => &stem[..pos],
        _ => stem,
    };
    let activity = SubActivity::from_str(activity_code).unwrap_or(SubActivity::Generic);
    let sensor = path
        .parent()
        .and_then(|p| p.file_name())
        .and_then(|s| s.to_str())
        .and_then(|s| Sensor::from_str(s).ok())
        .unwrap_or(Sensor::Acc);
    let subject = path
        .parent()
        .and_then(|p| p.parent())
        .and_then(|p| p.file_name())
        .and_then(|s| s.to_str())
        .unwrap_or("unknown")
        .to_string();
    (subject, sensor, activity)
}

/// Writes a recording in CUSTOM_CSV form (`t,ax,ay,az` header, timestamps
/// from the sample rate). Inverse of [`load_recording`] up to numeric text
/// formatting.
pub fn save_recording_csv(rec: &SignalRecording, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| GaitError::io(dir.display().to_string(), e))?;
    }
    let mut out = String::with_capacity(rec.len() * 32);
    out.push_str("t,ax,ay,az\n");
    let dt = 1.0 / rec.sample_rate_hz;
    for (i, s) in rec.samples.iter().enumerate() {
        out.push_str(&format!(
            "{:.6},{:.9},{:.9},{:.9}\n",
            i as f64 * dt,
            s[0],
            s[1],
            s[2]
        ));
    }
    let mut f = fs::File::create(path).map_err(|e| GaitError::io(path.display().to_string(), e))?;
    f.write_all(out.as_bytes())
        .map_err(|e| GaitError::io(path.display().to_string(), e))?;
    Ok(())
}

/// Loads every session under a CUSTOM_CSV tree, sorted by
/// (subject, sensor, sub-activity, session) for reproducible ordering.
pub fn load_custom_csv_tree(root: &Path) -> Result<Vec<SignalRecording>> {
    let mut paths = Vec::new();
    collect_csv_paths(root, &mut paths)?;
    if paths.is_empty() {
        return Err(GaitError::EmptyInput(format!(
            "no .csv files under {}",
            root.display()
        )));
    }
    paths.sort();
    paths.iter().map(|p| load_recording(p)).collect()
}

fn collect_csv_paths(dir: &Path, out: &mut Vec<std::path::PathBuf>) -> Result<()> {
    let entries = fs::read_dir(dir).map_err(|e| GaitError::io(dir.display().to_string(), e))?;
    for entry in entries {
        let entry = entry.map_err(|e| GaitError::io(dir.display().to_string(), e))?;
        let path = entry.path();
        if path.is_dir() {
            collect_csv_paths(&path, out)?;
        } else if path.extension().map(|e| e == "csv").unwrap_or(false) {
            out.push(path);
        }
    }
    Ok(())
}

/// Reads a HAR-style directory: per-axis files of space-separated rows
/// (one pre-segmented window per row, 128 samples in the public dataset),
/// a `subject*` id file, and optionally a `y*` activity file. When the
/// activity file is present only walking rows (label 1) are kept. The
/// sensor is LACC and the sub-activity GENERIC, matching how the public
/// dataset was captured.
pub fn load_har_windows(dir: &Path) -> Result<Vec<Window>> {
    let mut axis_files: BTreeMap<char, std::path::PathBuf> = BTreeMap::new();
    let mut subject_file = None;
    let mut activity_file = None;

    let entries = fs::read_dir(dir).map_err(|e| GaitError::io(dir.display().to_string(), e))?;
    for entry in entries {
        let entry = entry.map_err(|e| GaitError::io(dir.display().to_string(), e))?;
        let path = entry.path();
        if !path.is_file() || path.extension().map(|e| e == "txt") != Some(true) {
            continue;
        }
        let name = path
            .file_name()
            .and_then(|s| s.to_str())
            .unwrap_or("")
            .to_ascii_lowercase();
        if name.starts_with("subject") {
            subject_file = Some(path);
        } else if name.starts_with("y_") || name == "y.txt" {
            activity_file = Some(path);
        } else if name.contains("acc") {
            for ax in ['x', 'y', 'z'] {
                if name.contains(&format!("_{ax}_")) || name.contains(&format!("_{ax}.")) {
                    axis_files.insert(ax, path.clone());
                }
            }
        }
    }

    let (xs, ys, zs) = match (
        axis_files.get(&'x'),
        axis_files.get(&'y'),
        axis_files.get(&'z'),
    ) {
        (Some(x), Some(y), Some(z)) => (
            read_har_rows(x)?,
            read_har_rows(y)?,
            read_har_rows(z)?,
        ),
        _ => {
            return Err(GaitError::InvalidInput(format!(
                "{} is missing per-axis acc files (need *acc*_x_*, _y_, _z_)",
                dir.display()
            )))
        }
    };
    let subject_path = subject_file.ok_or_else(|| {
        GaitError::InvalidInput(format!("{} is missing a subject id file", dir.display()))
    })?;
    let subjects = read_har_labels(&subject_path)?;

    let n = xs.len();
    if ys.len() != n || zs.len() != n || subjects.len() != n {
        return Err(GaitError::Shape(format!(
            "HAR row counts differ: x={} y={} z={} subjects={}",
            xs.len(),
            ys.len(),
            zs.len(),
            subjects.len()
        )));
    }
    let walking: Option<Vec<bool>> = match activity_file {
        Some(p) => {
            let labels = read_har_labels(&p)?;
            if labels.len() != n {
                return Err(GaitError::Shape(format!(
                    "activity file rows ({}) differ from signal rows ({n})",
                    labels.len()
                )));
            }
            Some(labels.iter().map(|l| l == "1").collect())
        }
        None => None,
    };

    let mut windows = Vec::new();
    for i in 0..n {
        if let Some(mask) = &walking {
            if !mask[i] {
                continue;
            }
        }
        windows.push(Window::new(
            format!("user{}", subjects[i]),
            Sensor::Lacc,
            SubActivity::Generic,
            [xs[i].clone(), ys[i].clone(), zs[i].clone()],
        )?);
    }
    if windows.is_empty() {
        return Err(GaitError::EmptyOutput(format!(
            "{} yielded no windows after filtering",
            dir.display()
        )));
    }
    Ok(windows)
}

fn read_har_rows(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path).map_err(|e| GaitError::io(path.display().to_string(), e))?;
    let mut rows = Vec::new();
    let mut width = None;
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for field in line.split_ascii_whitespace() {
            row.push(field.parse::<f64>().map_err(|_| GaitError::Parse {
                path: path.display().to_string(),
                line: lineno + 1,
                msg: format!("non-numeric field {field:?}"),
            })?);
        }
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(GaitError::Parse {
                    path: path.display().to_string(),
                    line: lineno + 1,
                    msg: format!("row width {} differs from {}", row.len(), w),
                })
            }
            _ => {}
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(GaitError::EmptyInput(format!(
            "{} holds no rows",
            path.display()
        )));
    }
    Ok(rows)
}

fn read_har_labels(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| GaitError::io(path.display().to_string(), e))?;
    Ok(text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.trim().to_string())
        .collect())
}

/// Centered moving-average filter of odd `order`. Boundary samples average
/// over the truncated neighborhood so the length is unchanged and no samples
/// are fabricated.
pub fn moving_average_filter(rec: &SignalRecording, order: usize) -> Result<SignalRecording> {
    if order == 0 || order % 2 == 0 {
        return Err(GaitError::InvalidParameter(format!(
            "filter order must be odd and positive, got {order}"
        )));
    }
    if order > rec.len() {
        return Err(GaitError::InvalidParameter(format!(
            "filter order {order} exceeds recording length {}",
            rec.len()
        )));
    }
    let half = order / 2;
    let n = rec.len();
    let mut samples = Vec::with_capacity(n);
    for i in 0..n {
        let lo = i.saturating_sub(half);
        let hi = (i + half + 1).min(n);
        let span = (hi - lo) as f64;
        let mut acc = [0.0f64; 3];
        for s in &rec.samples[lo..hi] {
            for (a, v) in acc.iter_mut().zip(s.iter()) {
                *a += v;
            }
        }
        samples.push([acc[0] / span, acc[1] / span, acc[2] / span]);
    }
    SignalRecording::new(
        rec.subject_id.clone(),
        rec.sensor,
        rec.sub_activity,
        rec.sample_rate_hz,
        samples,
    )
}

/// Slices a recording into fixed-size windows.
///
/// Stride is `round(window_size * (1 - overlap_fraction))`, floored at 1;
/// a trailing partial window is discarded. Metadata is copied from the
/// recording.
pub fn segment_windows(
    rec: &SignalRecording,
    window_size: usize,
    overlap_fraction: f64,
) -> Result<Vec<Window>> {
    if !(0.0..1.0).contains(&overlap_fraction) {
        return Err(GaitError::InvalidParameter(format!(
            "overlap_fraction must lie in [0,1), got {overlap_fraction}"
        )));
    }
    if window_size < MIN_WINDOW_LEN {
        return Err(GaitError::InvalidParameter(format!(
            "window_size {window_size} below minimum {MIN_WINDOW_LEN}"
        )));
    }
    if window_size > rec.len() {
        return Err(GaitError::EmptyOutput(format!(
            "window_size {window_size} exceeds recording length {}",
            rec.len()
        )));
    }
    let stride = ((window_size as f64) * (1.0 - overlap_fraction)).round() as usize;
    let stride = stride.max(1);
    let mut windows = Vec::new();
    let mut start = 0;
    while start + window_size <= rec.len() {
        let mut axes: [Vec<f64>; 3] = [
            Vec::with_capacity(window_size),
            Vec::with_capacity(window_size),
            Vec::with_capacity(window_size),
        ];
        for s in &rec.samples[start..start + window_size] {
            axes[0].push(s[0]);
            axes[1].push(s[1]);
            axes[2].push(s[2]);
        }
        windows.push(Window::new(
            rec.subject_id.clone(),
            rec.sensor,
            rec.sub_activity,
            axes,
        )?);
        start += stride;
    }
    Ok(windows)
}
