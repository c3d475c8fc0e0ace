//! Train the wavelet-kernel ELM, save it as a versioned JSON document,
//! reload it and predict.
//!
//! Run with: `cargo run --example train_kelm`

use gaitid::kelm::{kelm_predict, kelm_train, wavelet_kernel, KelmModel, KernelParams};
use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> gaitid::Result<()> {
    let params = KernelParams {
        a: 4.0,
        b: 2.0,
        c: 100.0,
    };
    println!(
        "wavelet kernel: k(x,x) = {}, k((0,0),(1,1)) = {:.5}",
        wavelet_kernel(&[0.5, 0.5], &[0.5, 0.5], &params)?,
        wavelet_kernel(&[0.0, 0.0], &[1.0, 1.0], &params)?
    );

    // Three noisy clusters.
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let centers = [[0.0, 0.0], [3.0, 0.5], [1.0, 3.0]];
    let per_class = 15;
    let n = centers.len() * per_class;
    let mut x = DMatrix::zeros(n, 2);
    let mut labels = Vec::new();
    for (c, center) in centers.iter().enumerate() {
        for i in 0..per_class {
            let row = c * per_class + i;
            x[(row, 0)] = center[0] + rng.random_range(-0.3..0.3);
            x[(row, 1)] = center[1] + rng.random_range(-0.3..0.3);
        }
        labels.extend(std::iter::repeat_n(format!("class{c}"), per_class));
    }

    let model = kelm_train(&x, &labels, &params)?;
    println!(
        "trained on {n} rows, {} classes; solve: {} residual {:.2e} cond ~{:.1e}",
        model.classes.len(),
        model.solve_info.method,
        model.solve_info.residual_inf,
        model.solve_info.condition_estimate
    );
    let (pred, _) = kelm_predict(&model, &x)?;
    let train_acc = gaitid::kelm::accuracy(&pred, &labels);
    println!("training accuracy: {train_acc:.3}");

    let path = std::env::temp_dir().join("gaitid_example_kelm.json");
    std::fs::write(&path, serde_json::to_string_pretty(&model.to_doc()).unwrap())
        .expect("write model");
    let reloaded = KelmModel::from_doc(
        &serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap(),
    )?;
    let probe = DMatrix::from_row_slice(1, 2, &[2.9, 0.4]);
    let (pred, scores) = kelm_predict(&reloaded, &probe)?;
    println!(
        "reloaded model predicts {:?} for (2.9, 0.4), scores {:?}",
        pred[0],
        scores.row(0).iter().map(|s| (s * 100.0).round() / 100.0).collect::<Vec<_>>()
    );
    Ok(())
}
