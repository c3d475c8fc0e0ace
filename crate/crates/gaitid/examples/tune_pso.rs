//! Particle swarm optimization: first on a convex benchmark with a known
//! optimum, then tuning wavelet-kernel parameters against cross-validated
//! accuracy.
//!
//! Run with: `cargo run --release --example tune_pso`

use gaitid::eval::experiment::tune_kernel_params;
use gaitid::eval::{
    assemble_windows, extract_matrix, DatasetSource, ExperimentConfig, PsoBlock, SyntheticSpec,
};
use gaitid::pso::{pso_optimize, PsoConfig};

fn main() -> gaitid::Result<()> {
    // Convex bowl in log space: optimum at (0.5, -1.0, 1.5).
    let target = [0.5, -1.0, 1.5];
    let outcome = pso_optimize(
        |p| {
            let pos = [p.a.log10(), p.b.log10(), p.c.log10()];
            -pos.iter()
                .zip(&target)
                .map(|(x, t)| (x - t) * (x - t))
                .sum::<f64>()
        },
        &PsoConfig {
            seed: 1,
            ..PsoConfig::default()
        },
    )?;
    println!(
        "bowl: best position ({:.3}, {:.3}, {:.3}), fitness {:.2e}, history length {}",
        outcome.best_position[0],
        outcome.best_position[1],
        outcome.best_position[2],
        outcome.best_fitness,
        outcome.history.len()
    );

    // Kernel tuning on a small synthetic identification task.
    let spec = SyntheticSpec {
        n_users: 3,
        n_sessions: 2,
        duration_s: 20.0,
        ..SyntheticSpec::default()
    };
    let config = ExperimentConfig::new(DatasetSource::Synthetic(spec));
    let windows = assemble_windows(&config)?;
    let features = extract_matrix(&windows)?;
    let norm = gaitid::features::fit_normalizer(&features)?;
    let normed = gaitid::features::apply_normalizer(&norm, &features)?;
    let block = PsoBlock {
        config: PsoConfig {
            swarm_size: 10,
            iterations: 10,
            seed: 3,
            ..PsoConfig::default()
        },
        ..PsoBlock::default()
    };
    let params = tune_kernel_params(
        &normed.values_matrix(),
        &normed.subject_labels(),
        &block,
        3,
    )?;
    println!(
        "tuned kernel: a = {:.4}, b = {:.4}, C = {:.4}",
        params.a, params.b, params.c
    );
    Ok(())
}
