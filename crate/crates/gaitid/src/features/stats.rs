//! Order statistics and moments of a single axis.

use crate::error::{GaitError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasicStats {
    pub mean: f64,
    pub median: f64,
    /// Unbiased (n-1) sample variance.
    pub variance: f64,
    pub std_dev: f64,
    /// Q3 - Q1 with linear-interpolation quantiles.
    pub iqr: f64,
}

pub fn basic_stats(xs: &[f64]) -> Result<BasicStats> {
    if xs.len() < 2 {
        return Err(GaitError::InvalidInput(format!(
            "basic_stats needs at least 2 samples, got {}",
            xs.len()
        )));
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let variance = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);

    let mut sorted = xs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let median = quantile(&sorted, 0.5);
    let iqr = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);

    Ok(BasicStats {
        mean,
        median,
        variance,
        std_dev: variance.sqrt(),
        iqr,
    })
}

/// Linear-interpolation quantile of a sorted slice (position q*(n-1)).
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let frac = pos - lo as f64;
        sorted[lo] * (1.0 - frac) + sorted[hi] * frac
    }
}
