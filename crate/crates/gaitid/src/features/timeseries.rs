//! AR / MA / ARMA coefficient estimation for window features.
//!
//! The estimators are the deterministic, iteration-bounded classics:
//! Yule-Walker for AR, the innovations algorithm for MA, and two-stage
//! Hannan-Rissanen (long-AR pre-fit, then least squares on lagged values
//! and estimated innovations) for ARMA. No numerical optimizer is involved,
//! so the same window always produces the same coefficients.

use nalgebra::{DMatrix, DVector};

use crate::error::{GaitError, Result};

const DEGENERATE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesFit {
    pub ar_coefficients: Vec<f64>,
    pub ma_coefficients: Vec<f64>,
    pub noise_variance: f64,
    /// True when the signal was constant or the system was singular; the
    /// coefficients are then all zero.
    pub degenerate: bool,
}

impl TimeSeriesFit {
    fn degenerate(p: usize, q: usize) -> Self {
        TimeSeriesFit {
            ar_coefficients: vec![0.0; p],
            ma_coefficients: vec![0.0; q],
            noise_variance: 0.0,
            degenerate: true,
        }
    }
}

/// Biased sample autocovariances gamma(0..=max_lag) of the centered series.
fn autocovariances(xs: &[f64], max_lag: usize) -> Vec<f64> {
    let n = xs.len();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let c: Vec<f64> = xs.iter().map(|x| x - mean).collect();
    (0..=max_lag)
        .map(|k| (k..n).map(|t| c[t] * c[t - k]).sum::<f64>() / n as f64)
        .collect()
}

fn is_degenerate(xs: &[f64]) -> bool {
    let n = xs.len();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    let scale = xs.iter().map(|x| x.abs()).fold(0.0f64, f64::max).max(1.0);
    ss <= DEGENERATE_EPS * scale * scale
}

/// Yule-Walker AR(p): solves the order-p Toeplitz system of autocovariances
/// by Levinson-Durbin.
pub fn fit_ar(xs: &[f64], p: usize) -> Result<TimeSeriesFit> {
    if p == 0 {
        return Err(GaitError::InvalidParameter("AR order must be >= 1".into()));
    }
    if xs.len() <= p + 1 {
        return Err(GaitError::InvalidInput(format!(
            "AR({p}) needs more than {} samples, got {}",
            p + 1,
            xs.len()
        )));
    }
    if is_degenerate(xs) {
        return Ok(TimeSeriesFit::degenerate(p, 0));
    }
    let gamma = autocovariances(xs, p);
    let (phi, var) = levinson(&gamma, p);
    match phi {
        Some(phi) => Ok(TimeSeriesFit {
            ar_coefficients: phi,
            ma_coefficients: vec![],
            noise_variance: var.max(0.0),
            degenerate: false,
        }),
        None => Ok(TimeSeriesFit::degenerate(p, 0)),
    }
}

/// Levinson-Durbin on autocovariances gamma(0..=p). Returns (phi, innovation
/// variance), or None when the recursion collapses.
fn levinson(gamma: &[f64], p: usize) -> (Option<Vec<f64>>, f64) {
    let mut phi = vec![0.0; p];
    let mut prev = vec![0.0; p];
    let mut var = gamma[0];
    for k in 0..p {
        if var.abs() <= DEGENERATE_EPS * gamma[0].abs().max(1.0) {
            return (None, 0.0);
        }
        let num = gamma[k + 1] - (0..k).map(|j| phi[j] * gamma[k - j]).sum::<f64>();
        let refl = num / var;
        prev[..k].copy_from_slice(&phi[..k]);
        phi[k] = refl;
        for j in 0..k {
            phi[j] = prev[j] - refl * prev[k - 1 - j];
        }
        var *= 1.0 - refl * refl;
    }
    (Some(phi), var)
}

/// MA(q) via the innovations algorithm on the sample autocovariances. The
/// recursion is run past q (to `m` stages) and the last row read off, the
/// standard consistency device.
pub fn fit_ma(xs: &[f64], q: usize) -> Result<TimeSeriesFit> {
    if q == 0 {
        return Err(GaitError::InvalidParameter("MA order must be >= 1".into()));
    }
    if xs.len() <= q + 1 {
        return Err(GaitError::InvalidInput(format!(
            "MA({q}) needs more than {} samples, got {}",
            q + 1,
            xs.len()
        )));
    }
    if is_degenerate(xs) {
        return Ok(TimeSeriesFit::degenerate(0, q));
    }
    let n = xs.len();
    let m = (n - 1).min((20).max(5 * q));
    let gamma = autocovariances(xs, m);

    // theta[k][j] holds theta_{k, j+1}; v[k] the innovation variances.
    let mut theta: Vec<Vec<f64>> = vec![vec![]; m + 1];
    let mut v = vec![0.0; m + 1];
    v[0] = gamma[0];
    for k in 1..=m {
        theta[k] = vec![0.0; k];
        for j in 0..k {
            // theta_{k, k-j} indexed as theta[k][k-j-1]
            let mut acc = gamma[k - j];
            for i in 0..j {
                acc -= theta[j][j - 1 - i] * theta[k][k - 1 - i] * v[i];
            }
            if v[j].abs() <= DEGENERATE_EPS * gamma[0].abs().max(1.0) {
                return Ok(TimeSeriesFit::degenerate(0, q));
            }
            theta[k][k - 1 - j] = acc / v[j];
        }
        v[k] = gamma[0]
            - (0..k)
                .map(|j| theta[k][k - 1 - j] * theta[k][k - 1 - j] * v[j])
                .sum::<f64>();
    }
    let coeffs: Vec<f64> = (0..q).map(|j| theta[m].get(j).copied().unwrap_or(0.0)).collect();
    Ok(TimeSeriesFit {
        ar_coefficients: vec![],
        ma_coefficients: coeffs,
        noise_variance: v[m].max(0.0),
        degenerate: false,
    })
}

/// Two-stage Hannan-Rissanen ARMA(p, q): a long-AR pre-fit estimates the
/// innovations, then x_t is regressed on its own p lags and the q lagged
/// innovation estimates.
pub fn fit_arma(xs: &[f64], p: usize, q: usize) -> Result<TimeSeriesFit> {
    if p == 0 || q == 0 {
        return Err(GaitError::InvalidParameter(
            "ARMA orders must both be >= 1".into(),
        ));
    }
    let n = xs.len();
    // Long-AR order: grows slowly with n, floored so the innovations are
    // usable even on short windows.
    let h = ((n as f64).ln().round() as usize)
        .max(2 * (p + q))
        .min(n / 3);
    if h < p.max(q) || n < h + q + p + 2 {
        return Err(GaitError::InvalidInput(format!(
            "ARMA({p},{q}) needs a longer series than {n} samples"
        )));
    }
    if is_degenerate(xs) {
        return Ok(TimeSeriesFit::degenerate(p, q));
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let c: Vec<f64> = xs.iter().map(|x| x - mean).collect();

    let gamma = autocovariances(xs, h);
    let (long_ar, _) = levinson(&gamma, h);
    let long_ar = match long_ar {
        Some(a) => a,
        None => return Ok(TimeSeriesFit::degenerate(p, q)),
    };

    // Innovation estimates e_t for t >= h.
    let mut resid = vec![0.0; n];
    for t in h..n {
        let pred: f64 = (0..h).map(|j| long_ar[j] * c[t - 1 - j]).sum();
        resid[t] = c[t] - pred;
    }

    // Least squares: c_t ~ [c_{t-1..t-p}, e_{t-1..t-q}] over t in valid range.
    let t0 = h + q;
    let rows = n - t0;
    let cols = p + q;
    if rows <= cols {
        return Ok(TimeSeriesFit::degenerate(p, q));
    }
    let mut design = DMatrix::zeros(rows, cols);
    let mut target = DVector::zeros(rows);
    for (r, t) in (t0..n).enumerate() {
        for j in 0..p {
            design[(r, j)] = c[t - 1 - j];
        }
        for j in 0..q {
            design[(r, p + j)] = resid[t - 1 - j];
        }
        target[r] = c[t];
    }
    let gram = design.transpose() * &design;
    let rhs = design.transpose() * &target;
    let sol = match gram.lu().solve(&rhs) {
        Some(s) if s.iter().all(|v| v.is_finite()) => s,
        _ => return Ok(TimeSeriesFit::degenerate(p, q)),
    };
    let fitted = design * &sol;
    let sse: f64 = (0..rows).map(|r| (target[r] - fitted[r]).powi(2)).sum();
    Ok(TimeSeriesFit {
        ar_coefficients: (0..p).map(|j| sol[j]).collect(),
        ma_coefficients: (0..q).map(|j| sol[p + j]).collect(),
        noise_variance: sse / rows as f64,
        degenerate: false,
    })
}
