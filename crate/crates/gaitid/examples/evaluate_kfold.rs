//! Full experiment: synthetic dataset -> features -> ESP -> PSO-tuned KELM
//! -> stratified k-fold report with confidence interval and stage timings.
//!
//! Run with: `cargo run --release --example evaluate_kfold`

use gaitid::eval::{
    run_experiment, DatasetSource, ExperimentConfig, Method, Protocol, PsoBlock, SyntheticSpec,
};
use gaitid::pso::PsoConfig;

fn main() -> gaitid::Result<()> {
    let spec = SyntheticSpec {
        n_users: 4,
        n_sessions: 2,
        duration_s: 20.0,
        ..SyntheticSpec::default()
    };
    let mut config = ExperimentConfig::new(DatasetSource::Synthetic(spec));
    config.window_size = 50;
    config.method = Method::Esp;
    config.n_features = 15;
    config.protocol = Protocol::KFold(5);
    config.pso = Some(PsoBlock {
        config: PsoConfig {
            swarm_size: 8,
            iterations: 8,
            seed: 7,
            ..PsoConfig::default()
        },
        ..PsoBlock::default()
    });

    let report = run_experiment(&config)?;
    print!("{}", report.to_text_table());
    println!("\ncsv: {}", gaitid::eval::EvalReport::csv_header());
    println!("     {}", report.to_csv_row());
    Ok(())
}
