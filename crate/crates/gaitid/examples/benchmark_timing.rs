//! Stage timing across window sizes: smaller windows mean more windows per
//! recording, so classification time grows as the window shrinks.
//!
//! Run with: `cargo run --release --example benchmark_timing`

use gaitid::eval::{run_experiment, DatasetSource, ExperimentConfig, Method, Protocol, SyntheticSpec};

fn main() -> gaitid::Result<()> {
    let spec = SyntheticSpec {
        n_users: 3,
        n_sessions: 2,
        duration_s: 40.0,
        ..SyntheticSpec::default()
    };
    println!("{:>7} {:>8} {:>10} {:>9} {:>11} {:>9}", "window", "rows", "extract_s", "train_s", "predict_s", "accuracy");
    for window in [25usize, 50, 100, 200] {
        let mut config = ExperimentConfig::new(DatasetSource::Synthetic(spec));
        config.window_size = window;
        config.method = Method::None;
        config.protocol = Protocol::KFold(3);
        let report = run_experiment(&config)?;
        println!(
            "{:>7} {:>8} {:>10.3} {:>9.3} {:>11.3} {:>9.4}",
            window,
            (spec.duration_s as usize * 50 / window) * 24,
            report.timings.feature_extraction_s,
            report.timings.train_s,
            report.timings.predict_s,
            report.mean_accuracy
        );
    }
    Ok(())
}
