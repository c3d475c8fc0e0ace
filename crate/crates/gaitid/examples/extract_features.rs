//! Filter, segment and extract the 72-dimensional feature vector from
//! synthetic recordings, then write the feature CSV.
//!
//! Run with: `cargo run --example extract_features`

use gaitid::eval::{generate_synthetic_dataset, SyntheticSpec};
use gaitid::features::{extract_feature_vector, feature_names, FeatureMatrix};
use gaitid::signal::{moving_average_filter, segment_windows};

fn main() -> gaitid::Result<()> {
    let spec = SyntheticSpec {
        n_users: 2,
        n_sessions: 1,
        duration_s: 30.0,
        ..SyntheticSpec::default()
    };
    let recordings = generate_synthetic_dataset(&spec)?;

    let mut rows = Vec::new();
    for rec in &recordings {
        let filtered = moving_average_filter(rec, 3)?;
        for window in segment_windows(&filtered, 50, 0.0)? {
            rows.push(extract_feature_vector(&window)?);
        }
    }
    let matrix = FeatureMatrix::from_rows(rows)?;
    println!(
        "{} windows x {} features from {} recordings",
        matrix.len(),
        matrix.dim(),
        recordings.len()
    );

    let names = feature_names();
    let first = &matrix.rows[0];
    println!("first window ({} / {}):", first.subject_id, first.sub_activity);
    for idx in [0usize, 2, 5, 9, 13, 16, 19, 21] {
        println!("  {:<12} = {:>12.6}", names[idx], first.values[idx]);
    }

    let path = std::env::temp_dir().join("gaitid_example_features.csv");
    matrix.write_csv(&path)?;
    println!("wrote {}", path.display());
    Ok(())
}
