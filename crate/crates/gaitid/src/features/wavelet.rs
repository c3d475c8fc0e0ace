//! Haar wavelet detail energies.
//!
//! Orthonormal Haar pairs: detail (a - b)/sqrt(2), approximation
//! (a + b)/sqrt(2). Odd-length levels are extended periodically (wrap to
//! the first element). The per-level energy is the mean squared detail
//! coefficient, which keeps the feature comparable across window sizes.

use crate::error::{GaitError, Result};

pub fn haar_detail_energies(xs: &[f64], levels: usize) -> Result<Vec<f64>> {
    if levels == 0 {
        return Err(GaitError::InvalidParameter("levels must be >= 1".into()));
    }
    if xs.len() < (1usize << levels) {
        return Err(GaitError::InvalidInput(format!(
            "sequence of length {} too short for {} wavelet levels (needs >= {})",
            xs.len(),
            levels,
            1usize << levels
        )));
    }
    let sqrt2 = std::f64::consts::SQRT_2;
    let mut approx = xs.to_vec();
    let mut energies = Vec::with_capacity(levels);
    for _ in 0..levels {
        let mut padded;
        let current: &[f64] = if approx.len() % 2 == 1 {
            padded = approx.clone();
            padded.push(approx[0]); // periodic extension
            &padded
        } else {
            &approx
        };
        let pairs = current.len() / 2;
        let mut next = Vec::with_capacity(pairs);
        let mut energy = 0.0;
        for i in 0..pairs {
            let a = current[2 * i];
            let b = current[2 * i + 1];
            let detail = (a - b) / sqrt2;
            energy += detail * detail;
            next.push((a + b) / sqrt2);
        }
        energies.push(energy / pairs as f64);
        approx = next;
    }
    Ok(energies)
}
