//! Autocorrelation and partial autocorrelation of a windowed axis.
//!
//! Constant (zero-variance) signals are not an error: they yield all-zero
//! coefficients plus a degenerate flag, so idle segments still produce
//! rectangular feature matrices.

use crate::error::{GaitError, Result};

/// Relative threshold under which a centered sum of squares counts as zero.
const DEGENERATE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct CorrSequence {
    /// Coefficients for lags 1..=max_lag.
    pub values: Vec<f64>,
    /// True when the input was (numerically) constant.
    pub degenerate: bool,
}

/// Sample autocorrelation r(k) = sum_{t>k}(x_t - m)(x_{t-k} - m) / sum(x_t - m)^2
/// for k = 1..=max_lag.
pub fn autocorrelation(xs: &[f64], max_lag: usize) -> Result<CorrSequence> {
    if max_lag == 0 {
        return Err(GaitError::InvalidParameter("max_lag must be >= 1".into()));
    }
    if max_lag >= xs.len() {
        return Err(GaitError::InvalidInput(format!(
            "max_lag {max_lag} must be below sequence length {}",
            xs.len()
        )));
    }
    let n = xs.len();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = xs.iter().map(|x| x - mean).collect();
    let denom: f64 = centered.iter().map(|c| c * c).sum();
    let scale = xs.iter().map(|x| x.abs()).fold(0.0f64, f64::max).max(1.0);
    if denom <= DEGENERATE_EPS * scale * scale {
        return Ok(CorrSequence {
            values: vec![0.0; max_lag],
            degenerate: true,
        });
    }
    let values = (1..=max_lag)
        .map(|k| {
            let num: f64 = (k..n).map(|t| centered[t] * centered[t - k]).sum();
            num / denom
        })
        .collect();
    Ok(CorrSequence {
        values,
        degenerate: false,
    })
}

/// Partial autocorrelation via the Durbin-Levinson recursion on the sample
/// autocorrelations. PAC(1) = AC(1) by the base case.
pub fn partial_autocorrelation(xs: &[f64], max_lag: usize) -> Result<CorrSequence> {
    let ac = autocorrelation(xs, max_lag)?;
    if ac.degenerate {
        return Ok(ac);
    }
    let pac = durbin_levinson(&ac.values);
    Ok(CorrSequence {
        values: pac,
        degenerate: false,
    })
}

/// Runs the Durbin-Levinson recursion on autocorrelations r(1..=m) and
/// returns the reflection coefficients phi_{k,k} (the PACF). If the
/// innovation variance collapses the remaining lags are reported as zero.
pub fn durbin_levinson(r: &[f64]) -> Vec<f64> {
    let m = r.len();
    let mut pac = vec![0.0; m];
    if m == 0 {
        return pac;
    }
    let mut phi = vec![0.0; m]; // phi_{k,j}, 0-indexed j
    let mut prev = vec![0.0; m];
    let mut err = 1.0; // normalized innovation variance
    for k in 0..m {
        let num = r[k] - (0..k).map(|j| phi[j] * r[k - 1 - j]).sum::<f64>();
        if err <= DEGENERATE_EPS {
            break; // remaining coefficients stay zero
        }
        let refl = num / err;
        pac[k] = refl;
        prev[..k].copy_from_slice(&phi[..k]);
        phi[k] = refl;
        for j in 0..k {
            phi[j] = prev[j] - refl * prev[k - 1 - j];
        }
        err *= 1.0 - refl * refl;
    }
    pac
}
