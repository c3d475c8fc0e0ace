//! Row-major matrix document used by every serialized model.
//!
//! Wire layout is pinned: a dimensions header plus row-major data, so saved
//! models stay readable regardless of the in-memory matrix library.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{GaitError, Result};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MatrixDoc {
    pub rows: usize,
    pub cols: usize,
    /// Entries in row-major order, `rows * cols` of them.
    pub data: Vec<f64>,
}

impl MatrixDoc {
    pub fn from_matrix(m: &DMatrix<f64>) -> Self {
        let mut data = Vec::with_capacity(m.nrows() * m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                data.push(m[(i, j)]);
            }
        }
        MatrixDoc {
            rows: m.nrows(),
            cols: m.ncols(),
            data,
        }
    }

    pub fn to_matrix(&self) -> Result<DMatrix<f64>> {
        if self.data.len() != self.rows * self.cols {
            return Err(GaitError::Shape(format!(
                "matrix document declares {}x{} but holds {} entries",
                self.rows,
                self.cols,
                self.data.len()
            )));
        }
        Ok(DMatrix::from_row_slice(self.rows, self.cols, &self.data))
    }
}
