//! Two-stage identification: recognize the pocket sub-activity first, then
//! decide whether the window belongs to the claimed device owner.
//!
//! Run with: `cargo run --release --example two_stage_identification`

use gaitid::eval::{
    assemble_windows, extract_matrix, identify_two_stage, DatasetSource, ExperimentConfig,
    SyntheticSpec,
};
use gaitid::kelm::KernelParams;

fn main() -> gaitid::Result<()> {
    let spec = SyntheticSpec {
        n_users: 3,
        n_sessions: 2,
        duration_s: 20.0,
        ..SyntheticSpec::default()
    };
    let config = ExperimentConfig::new(DatasetSource::Synthetic(spec));
    let windows = assemble_windows(&config)?;
    let features = extract_matrix(&windows)?;

    // Chronological split: first session trains, second tests.
    let labels = features.subject_labels();
    let half: Vec<usize> = (0..features.len()).collect();
    let (train_idx, test_idx): (Vec<usize>, Vec<usize>) = {
        let per_rec = features.len() / (3 * 2 * 4);
        half.iter()
            .partition(|&&i| (i / per_rec / 4) % 2 == 0)
    };
    let train = features.select(&train_idx)?;
    let test = features.select(&test_idx)?;

    let claimed = "user1";
    let params = KernelParams {
        a: 100.0,
        b: 10.0,
        c: 100.0,
    };
    let outcome = identify_two_stage(&train, &test, claimed, &params)?;

    let activity_truth = test.activity_labels();
    let subject_truth: Vec<String> = test_idx.iter().map(|&i| labels[i].clone()).collect();
    let stage1_hits = outcome
        .rows
        .iter()
        .zip(&activity_truth)
        .filter(|(r, t)| &r.predicted_activity == *t)
        .count();
    let stage2_hits = outcome
        .rows
        .iter()
        .zip(&subject_truth)
        .filter(|(r, t)| &r.predicted_subject == *t)
        .count();
    let n = outcome.rows.len();
    println!("test windows: {n}");
    println!(
        "stage 1 (pocket) accuracy:  {:.4}",
        stage1_hits as f64 / n as f64
    );
    println!(
        "stage 2 (subject) accuracy: {:.4}  (fallback used on {} rows)",
        stage2_hits as f64 / n as f64,
        outcome.fallback_count
    );

    // Legitimate-user decision quality for the claimed owner.
    let mut true_accept = 0usize;
    let mut false_accept = 0usize;
    let (mut owners, mut impostors) = (0usize, 0usize);
    for (row, truth) in outcome.rows.iter().zip(&subject_truth) {
        if truth == claimed {
            owners += 1;
            if row.legitimate {
                true_accept += 1;
            }
        } else {
            impostors += 1;
            if row.legitimate {
                false_accept += 1;
            }
        }
    }
    println!(
        "claimed owner {claimed}: accepts {}/{} owner windows, wrongly accepts {}/{} impostor windows",
        true_accept, owners, false_accept, impostors
    );
    Ok(())
}
