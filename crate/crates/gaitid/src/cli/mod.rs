//! Command-line orchestration behind the `gaitid` binary.
//!
//! Subcommands: `synth`, `extract`, `reduce`, `train`, `evaluate`,
//! `benchmark`. Exit codes are a stable scripting contract: 0 success,
//! 2 usage/config error (raised before any computation), 1 runtime failure.
//! Sweep configuration comes from a flat `key = value` file with
//! comma-separated lists; command-line flags override file values. Reports
//! are written atomically (temp file + rename) and never overwritten
//! without `--force`. `GAITID_THREADS` caps worker threads everywhere.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{GaitError, Result};
use crate::eval::experiment::{assemble_windows, extract_matrix};
use crate::eval::{
    run_experiment, DatasetSource, EvalReport, ExperimentConfig, Method, Protocol, PsoBlock,
    SyntheticSpec,
};
use crate::features::{apply_normalizer, fit_normalizer, FeatureMatrix};
use crate::kelm::{kelm_train, KelmModel, KernelParams};
use crate::projection::{esp_fit, pca_fit, pca_transform, EspOptions};
use crate::signal::{save_recording_csv, Layout, Sensor, SubActivity};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

const USAGE: &str = "\
gaitid — gait-based legitimate-user identification toolkit

USAGE:
    gaitid <SUBCOMMAND> [FLAGS]

SUBCOMMANDS:
    synth      generate a synthetic CUSTOM_CSV dataset tree
               --out DIR --users N --sessions N [--duration S] [--rate HZ]
               [--sensor acc|lacc] [--seed N] [--force]
    extract    extract 72-dimensional window features to CSV
               --data PATH [--layout custom_csv|har_dir] [--window N]
               [--overlap F] [--filter-order N] [--sensor S] [--activity A]
               --out FILE [--force]
    reduce     fit ESP or PCA on a feature CSV and save the model
               --features FILE --method pca|esp [--dim M] --save FILE
               [--out FILE] [--no-normalize] [--seed N] [--force]
    train      train a wavelet-KELM on a feature CSV and save the model
               --features FILE --save FILE [--a X --b X --c X | --pso]
               [--no-normalize] [--seed N] [--force]
    evaluate   run experiment sweeps and write reports
               [--config FILE] [--data PATH --layout L | --synthetic]
               [--users N --sessions N --duration S] [--windows LIST]
               [--features-list LIST] [--methods LIST] [--protocol P]
               [--pso on|off] [--seed N] --out DIR [--force]
    benchmark  per-stage timing over window sizes
               [--windows LIST] [--users N --sessions N --duration S]
               [--protocol P] [--seed N] --out DIR [--force]

Exit codes: 0 ok, 2 usage/config error, 1 runtime failure.
";

/// Parsed command line: positional subcommand plus `--flag [value]` pairs.
#[derive(Debug, Default)]
struct Flags {
    values: BTreeMap<String, String>,
    switches: Vec<String>,
}

const SWITCH_FLAGS: [&str; 4] = ["force", "pso", "no-normalize", "help"];

impl Flags {
    fn parse(args: &[String]) -> std::result::Result<Flags, String> {
        let mut flags = Flags::default();
        let mut i = 0;
        while i < args.len() {
            let arg = &args[i];
            let name = arg
                .strip_prefix("--")
                .ok_or_else(|| format!("unexpected argument {arg:?}"))?;
            if SWITCH_FLAGS.contains(&name) {
                flags.switches.push(name.to_string());
                i += 1;
                continue;
            }
            let value = args
                .get(i + 1)
                .ok_or_else(|| format!("flag --{name} needs a value"))?;
            flags.values.insert(name.to_string(), value.clone());
            i += 2;
        }
        Ok(flags)
    }

    fn get(&self, name: &str) -> Option<&str> {
        self.values.get(name).map(|s| s.as_str())
    }

    fn has(&self, name: &str) -> bool {
        self.switches.iter().any(|s| s == name)
    }

    fn require(&self, name: &str) -> std::result::Result<&str, String> {
        self.get(name).ok_or_else(|| format!("missing required flag --{name}"))
    }

    fn parse_num<T: FromStr>(&self, name: &str, default: T) -> std::result::Result<T, String> {
        match self.get(name) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| format!("bad value for --{name}: {v:?}")),
        }
    }
}

/// Entry point used by the binary; returns the process exit code.
pub fn run(args: &[String]) -> i32 {
    let Some(subcommand) = args.first() else {
        eprint!("{USAGE}");
        return EXIT_USAGE;
    };
    if subcommand == "--help" || subcommand == "help" {
        print!("{USAGE}");
        return EXIT_OK;
    }
    let flags = match Flags::parse(&args[1..]) {
        Ok(f) => f,
        Err(msg) => {
            eprintln!("error: {msg}");
            eprint!("{USAGE}");
            return EXIT_USAGE;
        }
    };
    if flags.has("help") {
        print!("{USAGE}");
        return EXIT_OK;
    }
    let outcome = match subcommand.as_str() {
        "synth" => cmd_synth(&flags),
        "extract" => cmd_extract(&flags),
        "reduce" => cmd_reduce(&flags),
        "train" => cmd_train(&flags),
        "evaluate" => cmd_evaluate(&flags),
        "benchmark" => cmd_benchmark(&flags),
        other => {
            eprintln!("error: unknown subcommand {other:?}");
            eprint!("{USAGE}");
            return EXIT_USAGE;
        }
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(CmdError::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(CmdError::Runtime(e)) => {
            eprintln!("error: {e}");
            EXIT_RUNTIME
        }
    }
}

/// Usage/config errors exit with 2, runtime failures with 1.
enum CmdError {
    Usage(String),
    Runtime(GaitError),
}

impl From<String> for CmdError {
    fn from(msg: String) -> Self {
        CmdError::Usage(msg)
    }
}

impl From<GaitError> for CmdError {
    fn from(e: GaitError) -> Self {
        match e {
            GaitError::Config(_) | GaitError::InvalidParameter(_) => CmdError::Usage(e.to_string()),
            other => CmdError::Runtime(other),
        }
    }
}

type CmdResult = std::result::Result<(), CmdError>;

fn cmd_synth(flags: &Flags) -> CmdResult {
    let out = PathBuf::from(flags.require("out")?);
    let spec = SyntheticSpec {
        n_users: flags.parse_num("users", 4usize)?,
        n_sessions: flags.parse_num("sessions", 8usize)?,
        duration_s: flags.parse_num("duration", 60.0f64)?,
        sample_rate_hz: flags.parse_num("rate", 50.0f64)?,
        sensor: match flags.get("sensor") {
            None => Sensor::Acc,
            Some(s) => Sensor::from_str(s).map_err(|e| e.to_string())?,
        },
        seed: flags.parse_num("seed", 7u64)?,
    };
    if spec.n_users < 2 {
        return Err(CmdError::Usage(format!(
            "--users must be >= 2, got {}",
            spec.n_users
        )));
    }
    let recordings = crate::eval::generate_synthetic_dataset(&spec)?;
    let mut written = 0usize;
    let mut session_counter: BTreeMap<(String, SubActivity), usize> = BTreeMap::new();
    for rec in &recordings {
        let key = (rec.subject_id.clone(), rec.sub_activity);
        let session = *session_counter
            .entry(key.clone())
            .and_modify(|s| *s += 1)
            .or_insert(0);
        let name = if spec.n_sessions == 1 {
            format!("{}.csv", rec.sub_activity.as_str())
        } else {
            format!("{}_s{}.csv", rec.sub_activity.as_str(), session)
        };
        let path = out
            .join(&rec.subject_id)
            .join(rec.sensor.as_str())
            .join(name);
        if path.exists() && !flags.has("force") {
            return Err(CmdError::Usage(format!(
                "{} exists; pass --force to overwrite",
                path.display()
            )));
        }
        save_recording_csv(rec, &path)?;
        written += 1;
    }
    println!(
        "synth: wrote {written} recordings ({} users x {} sessions x 4 pockets) under {}",
        spec.n_users,
        spec.n_sessions,
        out.display()
    );
    Ok(())
}

fn dataset_from_flags(flags: &Flags, file: &BTreeMap<String, String>) -> std::result::Result<DatasetSource, CmdError> {
    let lookup = |key: &str| -> Option<String> {
        flags
            .get(key)
            .map(str::to_string)
            .or_else(|| file.get(key).cloned())
    };
    if let Some(data) = lookup("data") {
        let layout = match lookup("layout") {
            None => Layout::CustomCsv,
            Some(l) => Layout::from_str(&l).map_err(|e| CmdError::Usage(e.to_string()))?,
        };
        let path = PathBuf::from(data);
        return Ok(match layout {
            Layout::CustomCsv => DatasetSource::CustomCsvDir(path),
            Layout::HarDir => DatasetSource::HarDir(path),
        });
    }
    // Synthetic fallback.
    let parse = |key: &str, default: f64| -> std::result::Result<f64, CmdError> {
        match lookup(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| CmdError::Usage(format!("bad value for {key}: {v:?}"))),
        }
    };
    let spec = SyntheticSpec {
        n_users: parse("users", 4.0)? as usize,
        n_sessions: parse("sessions", 8.0)? as usize,
        duration_s: parse("duration", 60.0)?,
        sample_rate_hz: parse("rate", 50.0)?,
        sensor: Sensor::Acc,
        seed: parse("seed", 7.0)? as u64,
    };
    Ok(DatasetSource::Synthetic(spec))
}

fn cmd_extract(flags: &Flags) -> CmdResult {
    let data = flags.require("data")?;
    let out = PathBuf::from(flags.require("out")?);
    ensure_writable(&out, flags.has("force"))?;
    let layout = match flags.get("layout") {
        None => Layout::CustomCsv,
        Some(l) => Layout::from_str(l).map_err(|e| CmdError::Usage(e.to_string()))?,
    };
    let dataset = match layout {
        Layout::CustomCsv => DatasetSource::CustomCsvDir(PathBuf::from(data)),
        Layout::HarDir => DatasetSource::HarDir(PathBuf::from(data)),
    };
    let mut config = ExperimentConfig::new(dataset);
    config.window_size = flags.parse_num("window", 50usize)?;
    if let Some(overlap) = flags.get("overlap") {
        config.overlap = Some(
            overlap
                .parse()
                .map_err(|_| format!("bad value for --overlap: {overlap:?}"))?,
        );
    }
    config.filter_order = flags.parse_num("filter-order", 3usize)?;
    if let Some(s) = flags.get("sensor") {
        config.sensor_filter = Some(Sensor::from_str(s).map_err(|e| e.to_string())?);
    }
    if let Some(a) = flags.get("activity") {
        config.activity_filter = Some(SubActivity::from_str(a).map_err(|e| e.to_string())?);
    }

    let (windows, features, extract_s) = {
        let windows = assemble_windows(&config)?;
        let (features, secs) = crate::eval::timed(|| extract_matrix(&windows));
        (windows.len(), features?, secs)
    };
    write_atomic_string(&out, &features.to_csv_string(), flags.has("force"))?;
    println!(
        "extract: {} windows -> {} feature rows in {:.3}s -> {}",
        windows,
        features.len(),
        extract_s,
        out.display()
    );
    Ok(())
}

fn load_features(flags: &Flags) -> std::result::Result<(FeatureMatrix, bool), CmdError> {
    let path = PathBuf::from(flags.require("features")?);
    let raw = FeatureMatrix::read_csv(&path)?;
    let normalize = !flags.has("no-normalize");
    if normalize {
        let params = fit_normalizer(&raw)?;
        Ok((apply_normalizer(&params, &raw)?, true))
    } else {
        Ok((raw, false))
    }
}

fn cmd_reduce(flags: &Flags) -> CmdResult {
    let save = PathBuf::from(flags.require("save")?);
    ensure_writable(&save, flags.has("force"))?;
    let method = Method::from_str(flags.require("method")?).map_err(|e| e.to_string())?;
    let dim = flags.parse_num("dim", 30usize)?;
    let (features, _) = load_features(flags)?;
    let x = features.values_matrix();

    let (json, projected) = match method {
        Method::Pca => {
            let model = pca_fit(&x, dim)?;
            let projected = pca_transform(&model, &x)?;
            (
                serde_json::to_string_pretty(&model.to_doc())
                    .map_err(|e| GaitError::Serialization(e.to_string()))?,
                projected,
            )
        }
        Method::Esp => {
            let model = esp_fit(&x, dim, &EspOptions::default())?;
            let projected = crate::projection::esp_transform_matrix(&model, &x)?;
            println!(
                "reduce: esp stress {:.6} -> {:.6} over {} iterations",
                model.stress_trace.first().unwrap(),
                model.final_stress(),
                model.stress_trace.len() - 1
            );
            (
                serde_json::to_string_pretty(&model.to_doc())
                    .map_err(|e| GaitError::Serialization(e.to_string()))?,
                projected,
            )
        }
        Method::None => {
            return Err(CmdError::Usage("reduce needs --method pca or esp".into()))
        }
    };
    write_atomic_string(&save, &json, flags.has("force"))?;
    println!("reduce: saved {} model to {}", method.as_str(), save.display());

    if let Some(out) = flags.get("out") {
        let out = PathBuf::from(out);
        ensure_writable(&out, flags.has("force"))?;
        let mut text = String::new();
        for j in 0..dim {
            if j > 0 {
                text.push(',');
            }
            text.push_str(&format!("c{j}"));
        }
        text.push_str(",subject,activity,sensor\n");
        for (i, row) in features.rows.iter().enumerate() {
            for j in 0..dim {
                text.push_str(&format!("{:.12e},", projected[(i, j)]));
            }
            text.push_str(&format!(
                "{},{},{}\n",
                row.subject_id,
                row.sub_activity.as_str(),
                row.sensor.as_str()
            ));
        }
        write_atomic_string(&out, &text, flags.has("force"))?;
        println!("reduce: wrote projected features to {}", out.display());
    }
    Ok(())
}

fn cmd_train(flags: &Flags) -> CmdResult {
    let save = PathBuf::from(flags.require("save")?);
    ensure_writable(&save, flags.has("force"))?;
    let (features, normalized) = load_features(flags)?;
    let x = features.values_matrix();
    let labels = features.subject_labels();

    let params = if flags.has("pso") {
        let block = PsoBlock {
            config: crate::pso::PsoConfig {
                seed: flags.parse_num("seed", 7u64)?,
                ..Default::default()
            },
            ..Default::default()
        };
        let subsample_note = if features.len() > block.max_fitness_rows {
            format!(" (fitness on {} stratified rows)", block.max_fitness_rows)
        } else {
            String::new()
        };
        println!("train: tuning kernel parameters with pso{subsample_note}");
        crate::eval::experiment::tune_kernel_params(&x, &labels, &block, flags.parse_num("seed", 7u64)?)?
    } else {
        KernelParams {
            a: flags.parse_num("a", 1.0f64)?,
            b: flags.parse_num("b", 1.0f64)?,
            c: flags.parse_num("c", 100.0f64)?,
        }
    };

    let model = kelm_train(&x, &labels, &params)?;
    let mut doc = model.to_doc();
    if normalized {
        doc.normalization = features.normalization.clone();
    }
    let json =
        serde_json::to_string_pretty(&doc).map_err(|e| GaitError::Serialization(e.to_string()))?;
    write_atomic_string(&save, &json, flags.has("force"))?;
    println!(
        "train: {} rows, {} classes, kernel a={:.4} b={:.4} C={:.4}, solve {} (residual {:.2e}) -> {}",
        features.len(),
        model.classes.len(),
        params.a,
        params.b,
        params.c,
        model.solve_info.method,
        model.solve_info.residual_inf,
        save.display()
    );
    Ok(())
}

fn parse_list<T: FromStr>(text: &str, what: &str) -> std::result::Result<Vec<T>, CmdError> {
    let mut out = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        out.push(
            part.parse::<T>()
                .map_err(|_| CmdError::Usage(format!("bad {what} entry {part:?}")))?,
        );
    }
    if out.is_empty() {
        return Err(CmdError::Usage(format!("{what} list is empty")));
    }
    Ok(out)
}

/// Flat `key = value` config file; `#` starts a comment. Lists use commas.
pub fn parse_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path).map_err(|e| GaitError::io(path.display().to_string(), e))?;
    let mut map = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(GaitError::Config(format!(
                "{}:{}: expected key = value",
                path.display(),
                lineno + 1
            )));
        };
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn cmd_evaluate(flags: &Flags) -> CmdResult {
    let file_config = match flags.get("config") {
        Some(path) => parse_config_file(Path::new(path))?,
        None => BTreeMap::new(),
    };
    let lookup = |key: &str| -> Option<String> {
        flags
            .get(key)
            .map(str::to_string)
            .or_else(|| file_config.get(key).cloned())
    };
    let out_dir = PathBuf::from(
        lookup("out").ok_or_else(|| CmdError::Usage("missing required flag --out".into()))?,
    );
    let force = flags.has("force") || file_config.get("force").map(|v| v == "true") == Some(true);

    // Model-scoring mode: --model + --features scores a saved classifier.
    if let Some(model_path) = lookup("model") {
        return evaluate_saved_model(flags, Path::new(&model_path), &out_dir, force);
    }

    let dataset = dataset_from_flags(flags, &file_config)?;
    let seed: u64 = match lookup("seed") {
        None => 7,
        Some(v) => v
            .parse()
            .map_err(|_| CmdError::Usage(format!("bad seed {v:?}")))?,
    };
    let protocol = match lookup("protocol") {
        None => Protocol::KFold(10),
        Some(p) => Protocol::from_str(&p)?,
    };
    let windows: Vec<usize> = match lookup("windows") {
        None => vec![50],
        Some(list) => parse_list(&list, "window")?,
    };
    let feature_counts: Vec<usize> = match lookup("features-list").or_else(|| lookup("features")) {
        None => vec![30],
        Some(list) => parse_list(&list, "feature count")?,
    };
    let methods: Vec<Method> = match lookup("methods").or_else(|| lookup("method")) {
        None => vec![Method::Esp],
        Some(list) => {
            let names: Vec<String> = parse_list(&list, "method")?;
            let mut out = Vec::new();
            for n in names {
                out.push(Method::from_str(&n)?);
            }
            out
        }
    };
    let pso_on = match lookup("pso").as_deref() {
        None | Some("off") | Some("false") => false,
        Some("on") | Some("true") => true,
        Some(other) => {
            return Err(CmdError::Usage(format!(
                "bad --pso value {other:?} (expected on or off)"
            )))
        }
    };

    fs::create_dir_all(&out_dir).map_err(|e| GaitError::io(out_dir.display().to_string(), e))?;
    let mut summary = String::from(EvalReport::csv_header());
    summary.push('\n');
    let mut count = 0usize;
    for &window in &windows {
        for &n_features in &feature_counts {
            for &method in &methods {
                let mut config = ExperimentConfig::new(dataset.clone());
                config.window_size = window;
                config.n_features = n_features;
                config.method = method;
                config.protocol = protocol;
                config.seed = seed;
                if let Some(overlap) = lookup("overlap") {
                    config.overlap = Some(overlap.parse().map_err(|_| {
                        CmdError::Usage(format!("bad overlap {overlap:?}"))
                    })?);
                }
                if pso_on {
                    config.pso = Some(PsoBlock {
                        config: crate::pso::PsoConfig {
                            seed,
                            swarm_size: 12,
                            iterations: 12,
                            ..Default::default()
                        },
                        ..Default::default()
                    });
                }
                let name = format!(
                    "{}_f{}_w{}_{}",
                    method.as_str(),
                    n_features,
                    window,
                    protocol.descriptor()
                );
                let report = run_experiment(&config).map_err(|e| match e {
                    GaitError::Config(msg) => {
                        CmdError::Usage(format!("experiment {name}: {msg}"))
                    }
                    other => CmdError::Runtime(GaitError::Training(format!(
                        "experiment {name} failed: {other}"
                    ))),
                })?;
                let path = out_dir.join(format!("{name}.json"));
                write_atomic_string(&path, &report.to_json(), force)?;
                summary.push_str(&report.to_csv_row());
                summary.push('\n');
                println!(
                    "evaluate: {name}: mean accuracy {:.4} +/- {:.4}",
                    report.mean_accuracy, report.ci_halfwidth
                );
                count += 1;
            }
        }
    }
    let summary_path = out_dir.join("summary.csv");
    write_atomic_string(&summary_path, &summary, force)?;
    println!(
        "evaluate: {count} experiments -> {} and per-experiment JSON",
        summary_path.display()
    );
    Ok(())
}

fn evaluate_saved_model(
    flags: &Flags,
    model_path: &Path,
    out_dir: &Path,
    force: bool,
) -> CmdResult {
    let text = fs::read_to_string(model_path)
        .map_err(|e| GaitError::io(model_path.display().to_string(), e))?;
    let doc: crate::kelm::KelmModelDoc =
        serde_json::from_str(&text).map_err(|e| GaitError::Serialization(e.to_string()))?;
    let model = KelmModel::from_doc(&doc)?;
    let features_path = PathBuf::from(flags.require("features")?);
    let raw = FeatureMatrix::read_csv(&features_path)?;
    let features = match &doc.normalization {
        Some(params) => apply_normalizer(params, &raw)?,
        None => raw,
    };
    let x = features.values_matrix();
    let truth = features.subject_labels();
    let (pred, _) = crate::kelm::kelm_predict(&model, &x)?;
    let acc = crate::kelm::accuracy(&pred, &truth);
    fs::create_dir_all(out_dir).map_err(|e| GaitError::io(out_dir.display().to_string(), e))?;
    let report = serde_json::json!({
        "format": "gaitid-model-eval",
        "version": 1,
        "model": model_path.display().to_string(),
        "features": features_path.display().to_string(),
        "rows": features.len(),
        "accuracy": acc,
    });
    let path = out_dir.join("model_eval.json");
    write_atomic_string(&path, &serde_json::to_string_pretty(&report).unwrap(), force)?;
    println!("evaluate: saved-model accuracy {acc:.4} on {} rows -> {}", features.len(), path.display());
    Ok(())
}

fn cmd_benchmark(flags: &Flags) -> CmdResult {
    let out_dir = PathBuf::from(flags.require("out")?);
    let windows: Vec<usize> = match flags.get("windows") {
        None => vec![25, 50, 100, 200],
        Some(list) => parse_list(list, "window")?,
    };
    let seed: u64 = flags.parse_num("seed", 7u64)?;
    let repetitions: usize = flags.parse_num("repetitions", 1usize)?;
    let protocol = match flags.get("protocol") {
        None => Protocol::KFold(3),
        Some(p) => Protocol::from_str(p)?,
    };
    let spec = SyntheticSpec {
        n_users: flags.parse_num("users", 3usize)?,
        n_sessions: flags.parse_num("sessions", 2usize)?,
        duration_s: flags.parse_num("duration", 40.0f64)?,
        sample_rate_hz: 50.0,
        sensor: Sensor::Acc,
        seed,
    };
    fs::create_dir_all(&out_dir).map_err(|e| GaitError::io(out_dir.display().to_string(), e))?;
    let force = flags.has("force");

    let mut csv = String::from(
        "window,repetition,extract_s,projection_s,train_s,predict_s,classification_s,accuracy\n",
    );
    let mut mean_classification: BTreeMap<usize, f64> = BTreeMap::new();
    for &window in &windows {
        let mut acc_class = 0.0;
        for rep in 0..repetitions.max(1) {
            let mut config = ExperimentConfig::new(DatasetSource::Synthetic(spec));
            config.window_size = window;
            config.method = Method::None;
            config.protocol = protocol;
            config.seed = seed;
            let report = run_experiment(&config)?;
            let t = &report.timings;
            csv.push_str(&format!(
                "{},{},{:.4},{},{:.4},{:.4},{:.4},{:.4}\n",
                window,
                rep,
                t.feature_extraction_s,
                t.projection_s
                    .map(|p| format!("{p:.4}"))
                    .unwrap_or_else(|| "".into()),
                t.train_s,
                t.predict_s,
                t.classification_s(),
                report.mean_accuracy
            ));
            acc_class += t.classification_s();
            let path = out_dir.join(format!("benchmark_w{window}_r{rep}.json"));
            write_atomic_string(&path, &report.to_json(), force)?;
        }
        mean_classification.insert(window, acc_class / repetitions.max(1) as f64);
    }
    let path = out_dir.join("benchmark.csv");
    write_atomic_string(&path, &csv, force)?;
    for (window, secs) in &mean_classification {
        println!("benchmark: window {window}: classification {secs:.3}s");
    }
    println!("benchmark: wrote {}", path.display());
    Ok(())
}

fn ensure_writable(path: &Path, force: bool) -> std::result::Result<(), CmdError> {
    if path.exists() && !force {
        return Err(CmdError::Usage(format!(
            "{} exists; pass --force to overwrite",
            path.display()
        )));
    }
    Ok(())
}

/// Atomic write: same-directory temp file, then rename. Refuses to replace
/// an existing file unless `force` is set.
pub fn write_atomic_string(path: &Path, content: &str, force: bool) -> Result<()> {
    if path.exists() && !force {
        return Err(GaitError::Config(format!(
            "{} exists; pass --force to overwrite",
            path.display()
        )));
    }
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(dir).map_err(|e| GaitError::io(dir.display().to_string(), e))?;
    let tmp = dir.join(format!(
        ".{}.tmp{}",
        path.file_name().and_then(|n| n.to_str()).unwrap_or("out"),
        std::process::id()
    ));
    fs::write(&tmp, content).map_err(|e| GaitError::io(tmp.display().to_string(), e))?;
    fs::rename(&tmp, path).map_err(|e| GaitError::io(path.display().to_string(), e))?;
    Ok(())
}
