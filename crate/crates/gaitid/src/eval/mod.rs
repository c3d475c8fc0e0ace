//! Experimental protocols: stratified folds, leave-one-subject-out splits,
//! Student-t confidence intervals, stage timing, synthetic data, and the
//! experiment runner.

pub mod experiment;
pub mod report;
pub mod synthetic;
pub mod two_stage;

use std::collections::BTreeMap;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{GaitError, Result};

pub use experiment::{
    assemble_windows, extract_matrix, run_experiment, run_split, DatasetSource, ExperimentConfig,
    Method, Protocol, PsoBlock, SplitOutcome,
};
pub use report::{EvalReport, StageTimings};
pub use synthetic::{generate_synthetic_dataset, SyntheticSpec};
pub use two_stage::{identify_two_stage, TwoStageOutcome, TwoStageRow};

/// Disjoint train/test index sets over a feature matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    pub descriptor: String,
}

/// Stratified k-fold assignment: each class is shuffled under the seed and
/// dealt round-robin, so per-fold class counts differ from proportionality
/// by at most one sample.
pub fn stratified_kfold(labels: &[String], k: usize, seed: u64) -> Result<Vec<Split>> {
    if k < 2 {
        return Err(GaitError::InvalidParameter(format!(
            "k must be >= 2, got {k}"
        )));
    }
    if labels.is_empty() {
        return Err(GaitError::EmptyInput("no labels to split".into()));
    }
    let mut by_class: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, label) in labels.iter().enumerate() {
        by_class.entry(label.as_str()).or_default().push(i);
    }
    for (class, members) in &by_class {
        if members.len() < k {
            return Err(GaitError::Stratification {
                class: class.to_string(),
                count: members.len(),
                required: k,
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold_of = vec![0usize; labels.len()];
    for members in by_class.values() {
        let mut shuffled = members.clone();
        shuffled.shuffle(&mut rng);
        for (pos, &idx) in shuffled.iter().enumerate() {
            fold_of[idx] = pos % k;
        }
    }
    let mut splits = Vec::with_capacity(k);
    for fold in 0..k {
        let test_indices: Vec<usize> = (0..labels.len()).filter(|&i| fold_of[i] == fold).collect();
        let train_indices: Vec<usize> = (0..labels.len()).filter(|&i| fold_of[i] != fold).collect();
        splits.push(Split {
            train_indices,
            test_indices,
            descriptor: format!("fold {}/{}", fold + 1, k),
        });
    }
    Ok(splits)
}

/// One split per distinct subject; that subject's rows form the test set.
pub fn loso_splits(subject_ids: &[String]) -> Result<Vec<Split>> {
    let mut subjects: Vec<&String> = subject_ids.iter().collect();
    subjects.sort();
    subjects.dedup();
    if subjects.len() < 2 {
        return Err(GaitError::InvalidInput(format!(
            "leave-one-subject-out needs at least 2 subjects, got {}",
            subjects.len()
        )));
    }
    Ok(subjects
        .iter()
        .map(|subject| {
            let test_indices: Vec<usize> = subject_ids
                .iter()
                .enumerate()
                .filter(|(_, s)| s.as_str() == subject.as_str())
                .map(|(i, _)| i)
                .collect();
            let train_indices: Vec<usize> = subject_ids
                .iter()
                .enumerate()
                .filter(|(_, s)| s.as_str() != subject.as_str())
                .map(|(i, _)| i)
                .collect();
            Split {
                train_indices,
                test_indices,
                descriptor: format!("held-out subject {subject}"),
            }
        })
        .collect())
}

/// Mean and t-based halfwidth at the given confidence level:
/// `halfwidth = t_{(1+level)/2, n-1} * s / sqrt(n)`.
pub fn confidence_interval(values: &[f64], level: f64) -> Result<(f64, f64)> {
    if values.len() < 2 {
        return Err(GaitError::InvalidInput(format!(
            "confidence interval needs >= 2 values, got {}",
            values.len()
        )));
    }
    if !(0.0 < level && level < 1.0) {
        return Err(GaitError::InvalidParameter(format!(
            "confidence level must lie in (0,1), got {level}"
        )));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    let s = var.sqrt();
    let t = student_t_quantile((1.0 + level) / 2.0, values.len() - 1);
    Ok((mean, t * s / n.sqrt()))
}

/// Student-t quantile by bisection on the CDF; accurate far below the 1e-3
/// contract.
pub fn student_t_quantile(p: f64, df: usize) -> f64 {
    assert!(p > 0.0 && p < 1.0, "quantile probability out of range");
    assert!(df >= 1, "degrees of freedom must be >= 1");
    if (p - 0.5).abs() < 1e-15 {
        return 0.0;
    }
    if p < 0.5 {
        return -student_t_quantile(1.0 - p, df);
    }
    let mut hi = 1.0;
    while student_t_cdf(hi, df) < p {
        hi *= 2.0;
        if hi > 1e12 {
            break;
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if student_t_cdf(mid, df) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// CDF of the t distribution via the regularized incomplete beta function.
pub fn student_t_cdf(t: f64, df: usize) -> f64 {
    let v = df as f64;
    let x = v / (v + t * t);
    let tail = 0.5 * regularized_incomplete_beta(0.5 * v, 0.5, x);
    if t >= 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

fn ln_gamma(x: f64) -> f64 {
    // Lanczos approximation, g = 7.
    const COEFFS: [f64; 8] = [
        676.5203681218851,
        -1259.1392167224028,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507343278686905,
        -0.13857109526572012,
        9.984_369_578_019_572e-6,
        1.5056327351493116e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        pi.ln() - (pi * x).sin().ln() - ln_gamma(1.0 - x)
    } else {
        let x = x - 1.0;
        let mut acc = 0.999_999_999_999_809_9;
        for (i, c) in COEFFS.iter().enumerate() {
            acc += c / (x + (i + 1) as f64);
        }
        let t = x + 7.5;
        0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
    }
}

/// Regularized incomplete beta I_x(a, b) by Lentz's continued fraction.
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    }
}

fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-15;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..300 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Wall-clock measurement around a computation.
pub fn timed<T>(computation: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let result = computation();
    (result, start.elapsed().as_secs_f64())
}
