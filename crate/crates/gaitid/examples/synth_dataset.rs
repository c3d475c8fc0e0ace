//! Generate a small synthetic gait dataset and write it as a CUSTOM_CSV
//! tree: `<root>/<subject>/<sensor>/<pocket>_s<k>.csv`.
//!
//! Run with: `cargo run --example synth_dataset`

use gaitid::eval::{generate_synthetic_dataset, SyntheticSpec};
use gaitid::signal::save_recording_csv;

fn main() -> gaitid::Result<()> {
    let spec = SyntheticSpec {
        n_users: 3,
        n_sessions: 2,
        duration_s: 20.0,
        ..SyntheticSpec::default()
    };
    let recordings = generate_synthetic_dataset(&spec)?;
    println!(
        "generated {} recordings ({} users x {} sessions x 4 pockets), {} samples each",
        recordings.len(),
        spec.n_users,
        spec.n_sessions,
        recordings[0].len()
    );

    let root = std::env::temp_dir().join("gaitid_example_dataset");
    let mut session = std::collections::BTreeMap::new();
    for rec in &recordings {
        let key = (rec.subject_id.clone(), rec.sub_activity);
        let s = *session.entry(key).and_modify(|v| *v += 1).or_insert(0usize);
        let path = root
            .join(&rec.subject_id)
            .join(rec.sensor.as_str())
            .join(format!("{}_s{s}.csv", rec.sub_activity.as_str()));
        save_recording_csv(rec, &path)?;
    }
    println!("wrote CUSTOM_CSV tree under {}", root.display());

    // Round trip one file to show the reader sees the same samples.
    let probe = root.join("user1").join("ACC").join("BLP_s0.csv");
    let loaded = gaitid::signal::load_recording(&probe)?;
    println!(
        "readback: subject {} pocket {} -> {} samples, first = {:?}",
        loaded.subject_id,
        loaded.sub_activity,
        loaded.len(),
        loaded.samples[0]
    );
    Ok(())
}
