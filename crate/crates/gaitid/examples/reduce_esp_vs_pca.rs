//! Fit the Extended Sammon Projection and the PCA baseline on the same
//! normalized feature matrix and compare what each preserves.
//!
//! Run with: `cargo run --release --example reduce_esp_vs_pca`

use gaitid::eval::experiment::{assemble_windows, extract_matrix};
use gaitid::eval::{DatasetSource, ExperimentConfig, SyntheticSpec};
use gaitid::features::{apply_normalizer, fit_normalizer};
use gaitid::projection::{
    esp_fit, esp_transform, pairwise_distances, pca_fit, sammon_stress, EspOptions,
};

fn main() -> gaitid::Result<()> {
    let spec = SyntheticSpec {
        n_users: 3,
        n_sessions: 1,
        duration_s: 20.0,
        ..SyntheticSpec::default()
    };
    let mut config = ExperimentConfig::new(DatasetSource::Synthetic(spec));
    config.window_size = 50;
    let windows = assemble_windows(&config)?;
    let features = extract_matrix(&windows)?;
    let norm = fit_normalizer(&features)?;
    let normed = apply_normalizer(&norm, &features)?;
    let x = normed.values_matrix();
    println!("feature matrix: {} x {}", x.nrows(), x.ncols());

    let target_dim = 8;
    let esp = esp_fit(&x, target_dim, &EspOptions::default())?;
    println!(
        "ESP to {target_dim} dims: stress {:.6} -> {:.6} in {} iterations ({} epsilon-guarded pairs)",
        esp.stress_trace.first().unwrap(),
        esp.final_stress(),
        esp.stress_trace.len() - 1,
        esp.zero_distance_warnings,
    );

    let pca = pca_fit(&x, target_dim)?;
    println!(
        "PCA to {target_dim} dims: explained variance ratio {:.4}",
        pca.explained_variance_ratio()
    );
    // How much distance structure does the PCA truncation lose, measured by
    // the same Sammon stress ESP minimizes?
    let projected = gaitid::projection::pca_transform(&pca, &x)?;
    let d_high = pairwise_distances(&x);
    let pca_stress = sammon_stress(&d_high, &pairwise_distances(&projected))?;
    println!("PCA configuration stress under the same measure: {pca_stress:.6}");

    // Out-of-sample mapping: transform a fresh point.
    let probe: Vec<f64> = (0..x.ncols()).map(|j| x[(0, j)]).collect();
    let mapped = esp_transform(&esp, &probe)?;
    println!(
        "out-of-sample transform of row 0 lands at distance {:.2e} from its anchor",
        mapped
            .iter()
            .zip(esp.anchors_low.row(0).iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    );
    Ok(())
}
