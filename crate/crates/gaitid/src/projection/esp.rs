//! Extended Sammon Projection: a Sammon mapping with deterministic PCA
//! initialization, a monotone safeguard on every update, and an
//! out-of-sample transform against the stored anchors.
//!
//! Stress is the canonical Sammon form
//!
//! ```text
//! E = (1 / sum_{i<j} d_ij) * sum_{i<j} (d_ij - d*_ij)^2 / d_ij
//! ```
//!
//! with `d` the original-space and `d*` the projected-space Euclidean
//! distances. Coordinates follow the pseudo-Newton rule
//! `delta = -alpha * (dE/dy) / |d2E/dy2|`; any step that would increase the
//! stress is rejected and the step size halved before retrying, which makes
//! the recorded stress trace non-increasing by construction.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{GaitError, Result};
use crate::matdoc::MatrixDoc;
use crate::projection::pca::{pca_fit, pca_transform, PcaModel, PcaModelDoc};

/// Guard distance substituted for coincident points.
pub const DISTANCE_EPS: f64 = 1e-12;
const MAX_BACKTRACKS: usize = 20;
/// Floor on |second derivative| so a vanishing curvature cannot produce an
/// unbounded step (backtracking still bounds the stress).
const CURVATURE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EspOptions {
    /// Step-size factor; the classic recommendation is 0.3-0.4.
    pub alpha: f64,
    pub max_iter: usize,
    /// Stop when the relative stress improvement falls below this.
    pub rel_tol: f64,
    /// Iteration cap for the out-of-sample transform.
    pub transform_max_iter: usize,
    /// Early-stop threshold for the out-of-sample transform.
    pub transform_rel_tol: f64,
}

impl Default for EspOptions {
    fn default() -> Self {
        EspOptions {
            alpha: 0.35,
            max_iter: 500,
            rel_tol: 1e-6,
            transform_max_iter: 100,
            transform_rel_tol: 1e-7,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EspModel {
    /// Training anchors in the original space (after duplicate perturbation).
    pub anchors_high: DMatrix<f64>,
    /// Their projected coordinates.
    pub anchors_low: DMatrix<f64>,
    pub alpha: f64,
    /// Stress after initialization and after each accepted iteration;
    /// non-increasing.
    pub stress_trace: Vec<f64>,
    /// Cached normalization constant c = sum_{i<j} d_ij.
    pub distance_sum: f64,
    /// PCA used for initialization and for out-of-sample starting points.
    pub init_pca: PcaModel,
    /// Number of anchor pairs that hit the epsilon guard.
    pub zero_distance_warnings: usize,
    pub transform_max_iter: usize,
    pub transform_rel_tol: f64,
}

impl EspModel {
    pub fn input_dim(&self) -> usize {
        self.anchors_high.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.anchors_low.ncols()
    }

    pub fn final_stress(&self) -> f64 {
        *self.stress_trace.last().expect("non-empty trace")
    }
}

/// Symmetric Euclidean distance matrix with zero diagonal.
///
/// Uses the Gram identity `|x_i - x_j|^2 = |x_i|^2 + |x_j|^2 - 2 x_i.x_j`;
/// the brute-force double loop is the test oracle.
pub fn pairwise_distances(x: &DMatrix<f64>) -> DMatrix<f64> {
    let n = x.nrows();
    let sq: Vec<f64> = (0..n).map(|i| x.row(i).norm_squared()).collect();
    let gram = x * x.transpose();
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = (sq[i] + sq[j] - 2.0 * gram[(i, j)]).max(0.0).sqrt();
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    d
}

/// Canonical Sammon stress between two distance matrices. Zero off-diagonal
/// entries of `d_high` are replaced by the epsilon guard.
pub fn sammon_stress(d_high: &DMatrix<f64>, d_low: &DMatrix<f64>) -> Result<f64> {
    check_square_pair(d_high, d_low)?;
    let n = d_high.nrows();
    let mut c = 0.0;
    let mut acc = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let dh = d_high[(i, j)].max(DISTANCE_EPS);
            let dl = d_low[(i, j)];
            c += dh;
            acc += (dh - dl) * (dh - dl) / dh;
        }
    }
    if c <= 0.0 {
        return Err(GaitError::DegenerateInput(
            "all high-dimensional distances are zero".into(),
        ));
    }
    Ok(acc / c)
}

fn check_square_pair(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<()> {
    if a.nrows() != a.ncols() || b.nrows() != b.ncols() || a.nrows() != b.nrows() {
        return Err(GaitError::Shape(format!(
            "distance matrices must be square and equal-sized, got {}x{} and {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    Ok(())
}

/// Stress of a low-dimensional configuration `y` against fixed
/// high-dimensional distances. Convenience for tests and finite-difference
/// checks.
pub fn configuration_stress(d_high: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<f64> {
    sammon_stress(d_high, &pairwise_distances(y))
}

/// Analytic stress gradient with respect to every low-space coordinate.
/// Returns (stress, gradient) where the gradient matches `y`'s shape.
pub fn stress_and_gradient(d_high: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<(f64, DMatrix<f64>)> {
    let (stress, grad, _) = stress_gradient_curvature(d_high, y)?;
    Ok((stress, grad))
}

/// Shared pass computing stress, gradient and the diagonal second
/// derivatives in O(n^2 m).
fn stress_gradient_curvature(
    d_high: &DMatrix<f64>,
    y: &DMatrix<f64>,
) -> Result<(f64, DMatrix<f64>, DMatrix<f64>)> {
    let n = y.nrows();
    let m = y.ncols();
    if d_high.nrows() != n || d_high.ncols() != n {
        return Err(GaitError::Shape(format!(
            "distance matrix is {}x{}, configuration has {n} rows",
            d_high.nrows(),
            d_high.ncols()
        )));
    }
    let mut c = 0.0;
    let mut stress_acc = 0.0;
    let mut grad = DMatrix::zeros(n, m);
    let mut curv = DMatrix::zeros(n, m);
    for i in 0..n {
        for j in (i + 1)..n {
            let dh = d_high[(i, j)].max(DISTANCE_EPS);
            c += dh;
            let mut dl_sq = 0.0;
            for q in 0..m {
                let u = y[(i, q)] - y[(j, q)];
                dl_sq += u * u;
            }
            let dl = dl_sq.sqrt().max(DISTANCE_EPS);
            stress_acc += (dh - dl) * (dh - dl) / dh;
            // (d - d*)/(d d*) = 1/d* - 1/d
            let w = 1.0 / dl - 1.0 / dh;
            let dl3 = dl * dl * dl;
            for q in 0..m {
                let u = y[(i, q)] - y[(j, q)];
                let g = w * u;
                grad[(i, q)] += g;
                grad[(j, q)] -= g;
                let h = w - u * u / dl3;
                curv[(i, q)] += h;
                curv[(j, q)] += h;
            }
        }
    }
    if c <= 0.0 {
        return Err(GaitError::DegenerateInput(
            "all high-dimensional distances are zero".into(),
        ));
    }
    let scale = -2.0 / c;
    grad.scale_mut(scale);
    curv.scale_mut(scale);
    Ok((stress_acc / c, grad, curv))
}

fn pseudo_newton_step(
    y: &DMatrix<f64>,
    grad: &DMatrix<f64>,
    curv: &DMatrix<f64>,
    alpha: f64,
) -> DMatrix<f64> {
    let mut out = y.clone();
    for i in 0..y.nrows() {
        for q in 0..y.ncols() {
            let h = curv[(i, q)].abs().max(CURVATURE_FLOOR);
            out[(i, q)] -= alpha * grad[(i, q)] / h;
        }
    }
    out
}

/// Fits the projection. `x` rows are the training points; duplicated rows
/// are perturbed by 1e-9 of the feature range before fitting so distances
/// stay positive.
pub fn esp_fit(x: &DMatrix<f64>, target_dim: usize, opts: &EspOptions) -> Result<EspModel> {
    let (n, d) = (x.nrows(), x.ncols());
    if target_dim == 0 || target_dim > d {
        return Err(GaitError::InvalidParameter(format!(
            "target dimension {target_dim} outside [1, {d}]"
        )));
    }
    if n <= target_dim {
        return Err(GaitError::InvalidParameter(format!(
            "need more points ({n}) than target dimensions ({target_dim})"
        )));
    }
    if !(opts.alpha > 0.0 && opts.alpha <= 1.0) {
        return Err(GaitError::InvalidParameter(format!(
            "alpha must lie in (0, 1], got {}",
            opts.alpha
        )));
    }

    let (anchors_high, zero_distance_warnings) = perturb_duplicates(x)?;
    let d_high = pairwise_distances(&anchors_high);
    let distance_sum: f64 = {
        let mut c = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                c += d_high[(i, j)].max(DISTANCE_EPS);
            }
        }
        c
    };

    let init_pca = pca_fit(&anchors_high, target_dim)?;
    let mut y = pca_transform(&init_pca, &anchors_high)?;

    let (mut stress, mut grad, mut curv) = stress_gradient_curvature(&d_high, &y)?;
    let mut trace = vec![stress];

    for _ in 0..opts.max_iter {
        let mut step = opts.alpha;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let cand = pseudo_newton_step(&y, &grad, &curv, step);
            let (s_cand, g_cand, c_cand) = stress_gradient_curvature(&d_high, &cand)?;
            if s_cand <= stress {
                accepted = Some((cand, s_cand, g_cand, c_cand));
                break;
            }
            step *= 0.5;
        }
        match accepted {
            None => {
                // No step size improves the stress: converged.
                trace.push(stress);
                break;
            }
            Some((cand, s_cand, g_cand, c_cand)) => {
                let improvement = (stress - s_cand) / stress.max(f64::MIN_POSITIVE);
                y = cand;
                stress = s_cand;
                grad = g_cand;
                curv = c_cand;
                trace.push(stress);
                if improvement < opts.rel_tol {
                    break;
                }
            }
        }
    }

    Ok(EspModel {
        anchors_high,
        anchors_low: y,
        alpha: opts.alpha,
        stress_trace: trace,
        distance_sum,
        init_pca,
        zero_distance_warnings,
        transform_max_iter: opts.transform_max_iter,
        transform_rel_tol: opts.transform_rel_tol,
    })
}

/// Rows equal within the guard are nudged apart along the all-ones
/// direction, scaled by 1e-9 of the per-column range. Errors if every row
/// is identical.
fn perturb_duplicates(x: &DMatrix<f64>) -> Result<(DMatrix<f64>, usize)> {
    let n = x.nrows();
    let d = x.ncols();
    let mut range = 0.0f64;
    for j in 0..d {
        let col = x.column(j);
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in col.iter() {
            lo = lo.min(*v);
            hi = hi.max(*v);
        }
        range = range.max(hi - lo);
    }
    if range <= 0.0 {
        return Err(GaitError::DegenerateInput(
            "all rows identical; nothing to project".into(),
        ));
    }
    let mut out = x.clone();
    let mut warnings = 0usize;
    let nudge = 1e-9 * range;
    for i in 0..n {
        for j in 0..i {
            let mut same = true;
            for q in 0..d {
                if (out[(i, q)] - out[(j, q)]).abs() > DISTANCE_EPS {
                    same = false;
                    break;
                }
            }
            if same {
                warnings += 1;
                for q in 0..d {
                    out[(i, q)] += nudge * (i + 1) as f64;
                }
                break;
            }
        }
    }
    Ok((out, warnings))
}

/// Maps a new point into the fitted low-dimensional space by minimizing its
/// Sammon stress terms against the anchors, starting from the PCA
/// projection. Deterministic: no randomness anywhere in the path.
pub fn esp_transform(model: &EspModel, x_new: &[f64]) -> Result<Vec<f64>> {
    let d = model.input_dim();
    let m = model.output_dim();
    if x_new.len() != d {
        return Err(GaitError::Shape(format!(
            "point has {} coordinates, model expects {d}",
            x_new.len()
        )));
    }
    let n = model.anchors_high.nrows();

    // High-space distances to every anchor, guarded.
    let mut dist_high = Vec::with_capacity(n);
    for j in 0..n {
        let mut acc = 0.0;
        for q in 0..d {
            let u = x_new[q] - model.anchors_high[(j, q)];
            acc += u * u;
        }
        dist_high.push(acc.sqrt().max(DISTANCE_EPS));
    }
    let c: f64 = dist_high.iter().sum();

    let x_row = DMatrix::from_fn(1, d, |_, q| x_new[q]);
    let y0 = pca_transform(&model.init_pca, &x_row)?;
    let mut y: Vec<f64> = (0..m).map(|q| y0[(0, q)]).collect();

    let point_stress = |y: &[f64]| -> f64 {
        let mut acc = 0.0;
        for j in 0..n {
            let mut dl_sq = 0.0;
            for q in 0..m {
                let u = y[q] - model.anchors_low[(j, q)];
                dl_sq += u * u;
            }
            let dl = dl_sq.sqrt();
            let dh = dist_high[j];
            acc += (dh - dl) * (dh - dl) / dh;
        }
        acc / c
    };

    let mut stress = point_stress(&y);
    for _ in 0..model.transform_max_iter {
        // Gradient and curvature of the point's own stress terms.
        let mut grad = vec![0.0; m];
        let mut curv = vec![0.0; m];
        for j in 0..n {
            let mut dl_sq = 0.0;
            for q in 0..m {
                let u = y[q] - model.anchors_low[(j, q)];
                dl_sq += u * u;
            }
            let dl = dl_sq.sqrt().max(DISTANCE_EPS);
            let w = 1.0 / dl - 1.0 / dist_high[j];
            let dl3 = dl * dl * dl;
            for q in 0..m {
                let u = y[q] - model.anchors_low[(j, q)];
                grad[q] += w * u;
                curv[q] += w - u * u / dl3;
            }
        }
        let scale = -2.0 / c;
        for q in 0..m {
            grad[q] *= scale;
            curv[q] *= scale;
        }

        let mut step = model.alpha;
        let mut accepted = false;
        for _ in 0..MAX_BACKTRACKS {
            let cand: Vec<f64> = (0..m)
                .map(|q| y[q] - step * grad[q] / curv[q].abs().max(CURVATURE_FLOOR))
                .collect();
            let s_cand = point_stress(&cand);
            if s_cand <= stress {
                let improvement = (stress - s_cand) / stress.max(f64::MIN_POSITIVE);
                y = cand;
                stress = s_cand;
                accepted = improvement >= model.transform_rel_tol;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Ok(y)
}

/// Projects every row of `x` with [`esp_transform`]. Rows are independent,
/// so the work is spread across the thread budget.
pub fn esp_transform_matrix(model: &EspModel, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if x.ncols() != model.input_dim() {
        return Err(GaitError::Shape(format!(
            "input has {} columns, model expects {}",
            x.ncols(),
            model.input_dim()
        )));
    }
    let n = x.nrows();
    let m = model.output_dim();
    let rows: Vec<Result<Vec<f64>>> = crate::util::parallel_map(n, |i| {
        let row: Vec<f64> = (0..x.ncols()).map(|q| x[(i, q)]).collect();
        esp_transform(model, &row)
    });
    let mut out = DMatrix::zeros(n, m);
    for (i, r) in rows.into_iter().enumerate() {
        let r = r?;
        for q in 0..m {
            out[(i, q)] = r[q];
        }
    }
    Ok(out)
}

/// Wire form of a fitted ESP model.
#[derive(Debug, Serialize, Deserialize)]
pub struct EspModelDoc {
    pub format: String,
    pub version: u32,
    pub anchors_high: MatrixDoc,
    pub anchors_low: MatrixDoc,
    pub alpha: f64,
    pub stress_trace: Vec<f64>,
    pub distance_sum: f64,
    pub init_pca: PcaModelDoc,
    pub zero_distance_warnings: usize,
    pub transform_max_iter: usize,
    pub transform_rel_tol: f64,
}

impl EspModel {
    pub fn to_doc(&self) -> EspModelDoc {
        EspModelDoc {
            format: "gaitid-esp".into(),
            version: 1,
            anchors_high: MatrixDoc::from_matrix(&self.anchors_high),
            anchors_low: MatrixDoc::from_matrix(&self.anchors_low),
            alpha: self.alpha,
            stress_trace: self.stress_trace.clone(),
            distance_sum: self.distance_sum,
            init_pca: self.init_pca.to_doc(),
            zero_distance_warnings: self.zero_distance_warnings,
            transform_max_iter: self.transform_max_iter,
            transform_rel_tol: self.transform_rel_tol,
        }
    }

    pub fn from_doc(doc: &EspModelDoc) -> Result<Self> {
        if doc.format != "gaitid-esp" {
            return Err(GaitError::Serialization(format!(
                "unexpected format {:?}",
                doc.format
            )));
        }
        Ok(EspModel {
            anchors_high: doc.anchors_high.to_matrix()?,
            anchors_low: doc.anchors_low.to_matrix()?,
            alpha: doc.alpha,
            stress_trace: doc.stress_trace.clone(),
            distance_sum: doc.distance_sum,
            init_pca: PcaModel::from_doc(&doc.init_pca)?,
            zero_distance_warnings: doc.zero_distance_warnings,
            transform_max_iter: doc.transform_max_iter,
            transform_rel_tol: doc.transform_rel_tol,
        })
    }
}
