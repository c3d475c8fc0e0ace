//! Principal component analysis baseline.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{GaitError, Result};
use crate::matdoc::MatrixDoc;

#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    pub mean: DVector<f64>,
    /// d x k matrix of orthonormal columns, eigenvalue order descending.
    pub components: DMatrix<f64>,
    pub eigenvalues: Vec<f64>,
    /// Trace of the sample covariance (sum of all d eigenvalues).
    pub total_variance: f64,
}

impl PcaModel {
    pub fn input_dim(&self) -> usize {
        self.components.nrows()
    }

    pub fn output_dim(&self) -> usize {
        self.components.ncols()
    }

    /// Fraction of total variance captured by the retained components.
    pub fn explained_variance_ratio(&self) -> f64 {
        if self.total_variance <= 0.0 {
            return 0.0;
        }
        self.eigenvalues.iter().sum::<f64>() / self.total_variance
    }
}

/// Fits the top-k principal components of the sample covariance.
pub fn pca_fit(x: &DMatrix<f64>, k: usize) -> Result<PcaModel> {
    let (n, d) = (x.nrows(), x.ncols());
    if n < 2 {
        return Err(GaitError::InvalidInput(format!(
            "PCA needs at least 2 rows, got {n}"
        )));
    }
    if k == 0 || k > d.min(n - 1) {
        return Err(GaitError::InvalidParameter(format!(
            "PCA target dimension {k} outside [1, min(n-1, d)] = [1, {}]",
            d.min(n - 1)
        )));
    }
    let mean = DVector::from_fn(d, |j, _| x.column(j).sum() / n as f64);
    let mut centered = x.clone();
    for i in 0..n {
        for j in 0..d {
            centered[(i, j)] -= mean[j];
        }
    }
    let cov = centered.transpose() * &centered / (n as f64 - 1.0);
    let total_variance = cov.trace();
    let eig = cov.symmetric_eigen();

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .expect("finite eigenvalues")
    });

    let mut components = DMatrix::zeros(d, k);
    let mut eigenvalues = Vec::with_capacity(k);
    for (col, &idx) in order.iter().take(k).enumerate() {
        let v = eig.eigenvectors.column(idx);
        // Deterministic sign: the entry of largest magnitude is positive.
        let pivot = (0..d)
            .max_by(|&a, &b| v[a].abs().partial_cmp(&v[b].abs()).expect("finite"))
            .unwrap_or(0);
        let sign = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
        for r in 0..d {
            components[(r, col)] = sign * v[r];
        }
        eigenvalues.push(eig.eigenvalues[idx].max(0.0));
    }
    Ok(PcaModel {
        mean,
        components,
        eigenvalues,
        total_variance,
    })
}

/// Projects rows of `x` onto the fitted components: (x - mean) * components.
pub fn pca_transform(model: &PcaModel, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if x.ncols() != model.input_dim() {
        return Err(GaitError::Shape(format!(
            "input has {} columns, model expects {}",
            x.ncols(),
            model.input_dim()
        )));
    }
    let mut centered = x.clone();
    for i in 0..x.nrows() {
        for j in 0..x.ncols() {
            centered[(i, j)] -= model.mean[j];
        }
    }
    Ok(centered * &model.components)
}

/// Wire form of a fitted PCA model.
#[derive(Debug, Serialize, Deserialize)]
pub struct PcaModelDoc {
    pub format: String,
    pub version: u32,
    pub mean: Vec<f64>,
    pub components: MatrixDoc,
    pub eigenvalues: Vec<f64>,
    pub total_variance: f64,
}

impl PcaModel {
    pub fn to_doc(&self) -> PcaModelDoc {
        PcaModelDoc {
            format: "gaitid-pca".into(),
            version: 1,
            mean: self.mean.iter().copied().collect(),
            components: MatrixDoc::from_matrix(&self.components),
            eigenvalues: self.eigenvalues.clone(),
            total_variance: self.total_variance,
        }
    }

    pub fn from_doc(doc: &PcaModelDoc) -> Result<Self> {
        if doc.format != "gaitid-pca" {
            return Err(GaitError::Serialization(format!(
                "unexpected format {:?}",
                doc.format
            )));
        }
        Ok(PcaModel {
            mean: DVector::from_vec(doc.mean.clone()),
            components: doc.components.to_matrix()?,
            eigenvalues: doc.eigenvalues.clone(),
            total_variance: doc.total_variance,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Cyclic Jacobi eigensolver, the independent oracle route.
    fn jacobi_eigen(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
        let n = a.nrows();
        let mut m = a.clone();
        let mut v = DMatrix::identity(n, n);
        for _ in 0..100 {
            let mut off = 0.0;
            for i in 0..n {
                for j in (i + 1)..n {
                    off += m[(i, j)] * m[(i, j)];
                }
            }
            if off < 1e-24 {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    if m[(p, q)].abs() < 1e-18 {
                        continue;
                    }
                    let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * m[(p, q)]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let mkp = m[(k, p)];
                        let mkq = m[(k, q)];
                        m[(k, p)] = c * mkp - s * mkq;
                        m[(k, q)] = s * mkp + c * mkq;
                    }
                    for k in 0..n {
                        let mpk = m[(p, k)];
                        let mqk = m[(q, k)];
                        m[(p, k)] = c * mpk - s * mqk;
                        m[(q, k)] = s * mpk + c * mqk;
                    }
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = c * vkp - s * vkq;
                        v[(k, q)] = s * vkp + c * vkq;
                    }
                }
            }
        }
        ((0..n).map(|i| m[(i, i)]).collect(), v)
    }

    #[test]
    fn rank_one_data_fully_explained() {
        // points on a line in 3D
        let dir = [1.0, -2.0, 0.5];
        let x = DMatrix::from_fn(30, 3, |i, j| {
            let t: f64 = (i as f64) * 0.1 + 0.05;
            t * dir[j]
        });
        let model = pca_fit(&x, 1).unwrap();
        assert!(
            (model.explained_variance_ratio() - 1.0).abs() < 1e-10,
            "ratio {}",
            model.explained_variance_ratio()
        );
    }

    #[test]
    fn transform_of_mean_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = DMatrix::from_fn(20, 6, |_, _| rng.random_range(-1.0..1.0));
        let model = pca_fit(&x, 3).unwrap();
        let mean_row = DMatrix::from_fn(1, 6, |_, j| model.mean[j]);
        let y = pca_transform(&model, &mean_row).unwrap();
        assert!(y.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn components_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = DMatrix::from_fn(40, 8, |_, _| rng.random_range(-2.0..2.0));
        let model = pca_fit(&x, 5).unwrap();
        let gram = model.components.transpose() * &model.components;
        for i in 0..5 {
            for j in 0..5 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((gram[(i, j)] - expect).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn matches_jacobi_oracle_up_to_sign() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = DMatrix::from_fn(20, 6, |_, _| rng.random_range(-1.0..1.0));
        let model = pca_fit(&x, 6).unwrap();

        // oracle covariance + eigensolve
        let n = x.nrows();
        let mean: Vec<f64> = (0..6).map(|j| x.column(j).sum() / n as f64).collect();
        let mut c = x.clone();
        for i in 0..n {
            for j in 0..6 {
                c[(i, j)] -= mean[j];
            }
        }
        let cov = c.transpose() * &c / (n as f64 - 1.0);
        let (vals, vecs) = jacobi_eigen(&cov);
        let mut order: Vec<usize> = (0..6).collect();
        order.sort_by(|&a, &b| vals[b].partial_cmp(&vals[a]).unwrap());

        for (col, &idx) in order.iter().enumerate() {
            assert!(
                (model.eigenvalues[col] - vals[idx]).abs() < 1e-8,
                "eigenvalue {col}: {} vs oracle {}",
                model.eigenvalues[col],
                vals[idx]
            );
            // column match up to sign
            let dot: f64 = (0..6).map(|r| model.components[(r, col)] * vecs[(r, idx)]).sum();
            for r in 0..6 {
                let got = model.components[(r, col)];
                let want = vecs[(r, idx)] * dot.signum();
                assert!((got - want).abs() < 1e-8, "component ({r},{col})");
            }
        }
    }

    #[test]
    fn k_too_large_rejected() {
        let x = DMatrix::from_fn(5, 3, |i, j| (i * 3 + j) as f64);
        assert!(pca_fit(&x, 4).is_err()); // k > d
        let x = DMatrix::from_fn(3, 8, |i, j| ((i + 1) * (j + 2)) as f64);
        assert!(pca_fit(&x, 3).is_err()); // k > n-1
    }

    #[test]
    fn reconstruction_error_non_increasing_in_k() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let x = DMatrix::from_fn(25, 6, |_, _| rng.random_range(-1.0..1.0));
        let mut prev = f64::INFINITY;
        for k in 1..=6 {
            let model = pca_fit(&x, k).unwrap();
            let y = pca_transform(&model, &x).unwrap();
            let mut recon = y * model.components.transpose();
            for i in 0..x.nrows() {
                for j in 0..x.ncols() {
                    recon[(i, j)] += model.mean[j];
                }
            }
            let err = (&x - &recon).norm();
            assert!(err <= prev + 1e-10, "k={k}: {err} > {prev}");
            prev = err;
        }
    }

    #[test]
    fn doc_round_trip() {
        let x = DMatrix::from_fn(10, 4, |i, j| ((i * 7 + j * 3) % 11) as f64);
        let model = pca_fit(&x, 2).unwrap();
        let doc = model.to_doc();
        let json = serde_json::to_string(&doc).unwrap();
        let back: PcaModelDoc = serde_json::from_str(&json).unwrap();
        let restored = PcaModel::from_doc(&back).unwrap();
        assert_eq!(restored.components, model.components);
        assert_eq!(restored.mean, model.mean);
    }
}
