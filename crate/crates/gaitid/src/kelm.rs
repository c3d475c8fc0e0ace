//! Wavelet-kernel extreme learning machine.
//!
//! The kernel is `k(x, y) = cos(|x-y|^2 / a) * exp(-|x-y|^2 / b)`; training
//! solves the regularized system `(I/C + M) W = T` where `M` is the kernel
//! Gram matrix and `T` the +/-1 one-hot target matrix. The cosine factor can
//! make `M` indefinite, so the solver is a general symmetric factorization
//! (Bunch-Kaufman) with an LU fallback and a conditioning report — never a
//! positive-definite-only path alone.

use faer::prelude::Solve;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{GaitError, Result};
use crate::matdoc::MatrixDoc;

/// Acceptable infinity-norm residual of the training solve.
const RESIDUAL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    /// Cosine scale.
    pub a: f64,
    /// Exponential scale.
    pub b: f64,
    /// Ridge regularization coefficient C; the solve adds (1/C) I.
    pub c: f64,
}

impl Default for KernelParams {
    /// Order-of-magnitude defaults for [0,1]-normalized features, used when
    /// PSO tuning is skipped.
    fn default() -> Self {
        KernelParams {
            a: 1.0,
            b: 1.0,
            c: 100.0,
        }
    }
}

impl KernelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.b > 0.0 && self.c > 0.0) {
            return Err(GaitError::InvalidParameter(format!(
                "kernel parameters must be positive: a={}, b={}, C={}",
                self.a, self.b, self.c
            )));
        }
        Ok(())
    }
}

/// `cos(r2/a) * exp(-r2/b)` with `r2 = |x-y|^2`; equals 1 exactly at x = y.
pub fn wavelet_kernel(x: &[f64], y: &[f64], params: &KernelParams) -> Result<f64> {
    if x.len() != y.len() {
        return Err(GaitError::Shape(format!(
            "kernel arguments differ in dimension: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    let r2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(kernel_of_r2(r2, params))
}

#[inline]
fn kernel_of_r2(r2: f64, params: &KernelParams) -> f64 {
    (r2 / params.a).cos() * (-r2 / params.b).exp()
}

/// Kernel matrix with entry (i, j) = k(row i of x1, row j of x2).
///
/// Squared distances come from the Gram identity; when both arguments are
/// the same allocation the diagonal is set to 1 exactly and the matrix
/// mirrored, which keeps k(x, x) = 1 free of round-off.
pub fn kernel_matrix(
    x1: &DMatrix<f64>,
    x2: &DMatrix<f64>,
    params: &KernelParams,
) -> Result<DMatrix<f64>> {
    if x1.ncols() != x2.ncols() {
        return Err(GaitError::Shape(format!(
            "kernel inputs differ in feature dimension: {} vs {}",
            x1.ncols(),
            x2.ncols()
        )));
    }
    params.validate()?;
    let same = std::ptr::eq(x1, x2);
    let n1 = x1.nrows();
    let n2 = x2.nrows();
    let sq1: Vec<f64> = (0..n1).map(|i| x1.row(i).norm_squared()).collect();
    let sq2: Vec<f64> = if same {
        sq1.clone()
    } else {
        (0..n2).map(|j| x2.row(j).norm_squared()).collect()
    };
    let gram = x1 * x2.transpose();
    let mut k = DMatrix::zeros(n1, n2);
    if same {
        for i in 0..n1 {
            k[(i, i)] = 1.0;
            for j in (i + 1)..n2 {
                let r2 = (sq1[i] + sq2[j] - 2.0 * gram[(i, j)]).max(0.0);
                let v = kernel_of_r2(r2, params);
                k[(i, j)] = v;
                k[(j, i)] = v;
            }
        }
    } else {
        for i in 0..n1 {
            for j in 0..n2 {
                let r2 = (sq1[i] + sq2[j] - 2.0 * gram[(i, j)]).max(0.0);
                k[(i, j)] = kernel_of_r2(r2, params);
            }
        }
    }
    Ok(k)
}

/// How the regularized system was factorized, plus the solve diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveInfo {
    pub method: String,
    /// Infinity norm of (I/C + M) W - T.
    pub residual_inf: f64,
    /// Rough condition estimate from the factor diagonal.
    pub condition_estimate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KelmModel {
    pub train_inputs: DMatrix<f64>,
    /// The solved (I/C + M)^{-1} T, one column per class.
    pub output_weights: DMatrix<f64>,
    /// Ordered class labels; scores column k belongs to classes[k].
    pub classes: Vec<String>,
    pub params: KernelParams,
    pub solve_info: SolveInfo,
}

impl KelmModel {
    pub fn feature_dim(&self) -> usize {
        self.train_inputs.ncols()
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }
}

/// Trains the classifier: builds +/-1 one-hot targets over the sorted
/// distinct labels and solves (I/C + M) W = T with a symmetric solve (no
/// explicit inverse).
pub fn kelm_train(x: &DMatrix<f64>, labels: &[String], params: &KernelParams) -> Result<KelmModel> {
    params.validate()?;
    let n = x.nrows();
    if n < 2 {
        return Err(GaitError::InvalidLabel(format!(
            "training needs at least 2 samples, got {n}"
        )));
    }
    if labels.len() != n {
        return Err(GaitError::Shape(format!(
            "{} labels for {n} rows",
            labels.len()
        )));
    }
    let mut classes: Vec<String> = labels.to_vec();
    classes.sort();
    classes.dedup();
    if classes.len() < 2 {
        return Err(GaitError::InvalidLabel(
            "training needs at least 2 distinct classes".into(),
        ));
    }
    let k = classes.len();
    let mut targets = DMatrix::from_element(n, k, -1.0);
    for (i, label) in labels.iter().enumerate() {
        let idx = classes.binary_search(label).expect("label in classes");
        targets[(i, idx)] = 1.0;
    }

    let gram = kernel_matrix(x, x, params)?;
    let (weights, solve_info) = solve_regularized(&gram, &targets, params.c)?;

    Ok(KelmModel {
        train_inputs: x.clone(),
        output_weights: weights,
        classes,
        params: *params,
        solve_info,
    })
}

/// Solves (I/C + M) W = T. Primary path: Bunch-Kaufman (general symmetric,
/// valid for the indefinite Gram matrices the cosine factor can produce).
/// Fallback: partial-pivot LU. The residual is checked either way.
fn solve_regularized(
    gram: &DMatrix<f64>,
    targets: &DMatrix<f64>,
    c: f64,
) -> Result<(DMatrix<f64>, SolveInfo)> {
    let n = gram.nrows();
    let k = targets.ncols();
    let ridge = 1.0 / c;

    let mut a = faer::Mat::<f64>::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            a[(i, j)] = gram[(i, j)];
        }
        a[(j, j)] += ridge;
    }
    let mut rhs = faer::Mat::<f64>::zeros(n, k);
    for j in 0..k {
        for i in 0..n {
            rhs[(i, j)] = targets[(i, j)];
        }
    }

    let lblt = a.lblt(faer::Side::Lower);
    let sol = lblt.solve(&rhs);
    let diag: Vec<f64> = (0..n).map(|i| lblt.B_diag()[i].abs()).collect();
    let cond = condition_from_diag(&diag);
    let residual = residual_inf(&a, &sol, &rhs);
    if residual <= RESIDUAL_TOL {
        let weights = DMatrix::from_fn(n, k, |i, j| sol[(i, j)]);
        return Ok((
            weights,
            SolveInfo {
                method: "lblt".into(),
                residual_inf: residual,
                condition_estimate: cond,
            },
        ));
    }

    // Symmetric factorization rejected by the residual check: retry with
    // partial-pivot LU before giving up.
    let lu = a.partial_piv_lu();
    let sol = lu.solve(&rhs);
    let diag: Vec<f64> = (0..n).map(|i| lu.U()[(i, i)].abs()).collect();
    let cond_lu = condition_from_diag(&diag);
    let residual_lu = residual_inf(&a, &sol, &rhs);
    if residual_lu <= RESIDUAL_TOL {
        let weights = DMatrix::from_fn(n, k, |i, j| sol[(i, j)]);
        return Ok((
            weights,
            SolveInfo {
                method: "lu".into(),
                residual_inf: residual_lu,
                condition_estimate: cond_lu,
            },
        ));
    }
    Err(GaitError::Training(format!(
        "regularized system is numerically singular: residual {residual_lu:.3e} \
         (condition estimate {cond_lu:.3e}); increase C or deduplicate the training set"
    )))
}

fn condition_from_diag(diag: &[f64]) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for &v in diag {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if lo <= 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

fn residual_inf(a: &faer::Mat<f64>, sol: &faer::Mat<f64>, rhs: &faer::Mat<f64>) -> f64 {
    let prod = a * sol;
    let mut worst = 0.0f64;
    for j in 0..rhs.ncols() {
        for i in 0..rhs.nrows() {
            worst = worst.max((prod[(i, j)] - rhs[(i, j)]).abs());
        }
    }
    worst
}

/// Scores every row and picks the class of the maximal score; ties break to
/// the lowest class index.
pub fn kelm_predict(model: &KelmModel, x: &DMatrix<f64>) -> Result<(Vec<String>, DMatrix<f64>)> {
    if x.ncols() != model.feature_dim() {
        return Err(GaitError::Shape(format!(
            "input has {} columns, model expects {}",
            x.ncols(),
            model.feature_dim()
        )));
    }
    let k = kernel_matrix(x, &model.train_inputs, &model.params)?;
    let scores = k * &model.output_weights;
    let mut labels = Vec::with_capacity(x.nrows());
    for i in 0..scores.nrows() {
        let mut best = 0usize;
        for j in 1..scores.ncols() {
            if scores[(i, j)] > scores[(i, best)] {
                best = j;
            }
        }
        labels.push(model.classes[best].clone());
    }
    Ok((labels, scores))
}

/// Fraction of rows whose predicted label equals the reference label.
pub fn accuracy(predicted: &[String], truth: &[String]) -> f64 {
    if predicted.is_empty() {
        return 0.0;
    }
    let hits = predicted
        .iter()
        .zip(truth)
        .filter(|(p, t)| p == t)
        .count();
    hits as f64 / predicted.len() as f64
}

/// Wire form of a trained model.
#[derive(Debug, Serialize, Deserialize)]
pub struct KelmModelDoc {
    pub format: String,
    pub version: u32,
    pub classes: Vec<String>,
    pub params: KernelParams,
    pub train_inputs: MatrixDoc,
    pub output_weights: MatrixDoc,
    pub solve_info: SolveInfo,
    /// Min-max scaling the inputs were trained under, when the producer
    /// normalized; consumers must apply it to new data before scoring.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalization: Option<crate::features::Normalization>,
}

impl KelmModel {
    pub fn to_doc(&self) -> KelmModelDoc {
        KelmModelDoc {
            format: "gaitid-kelm".into(),
            version: 1,
            classes: self.classes.clone(),
            params: self.params,
            train_inputs: MatrixDoc::from_matrix(&self.train_inputs),
            output_weights: MatrixDoc::from_matrix(&self.output_weights),
            solve_info: self.solve_info.clone(),
            normalization: None,
        }
    }

    pub fn from_doc(doc: &KelmModelDoc) -> Result<Self> {
        if doc.format != "gaitid-kelm" {
            return Err(GaitError::Serialization(format!(
                "unexpected format {:?}",
                doc.format
            )));
        }
        Ok(KelmModel {
            train_inputs: doc.train_inputs.to_matrix()?,
            output_weights: doc.output_weights.to_matrix()?,
            classes: doc.classes.clone(),
            params: doc.params,
            solve_info: doc.solve_info.clone(),
        })
    }
}
