use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Principal components from the SVD of the centered data.
///
/// Each component is sign-normalized so that its entry of largest magnitude
/// is non-negative. Explained variances use divisor `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// `d × D`, orthonormal rows.
    pub components: Matrix,
    /// Descending.
    pub explained_variance: Vec<f64>,
    /// Sum over all `min(n, D)` directions, kept and discarded.
    pub total_variance: f64,
}

impl PcaModel {
    pub fn fit(x: &Matrix, dim: usize) -> Result<Self> {
        let (n, big_d) = x.shape();
        if dim == 0 || dim > n.min(big_d) {
            return Err(Error::input(format!(
                "PCA target dimension {dim} must be in 1..={} for {n}x{big_d} data",
                n.min(big_d)
            )));
        }
        let mut mean = vec![0.0; big_d];
        for row in x.iter_rows() {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);
        let centered = DMatrix::from_fn(n, big_d, |i, j| x.get(i, j) - mean[j]);
        let svd = nalgebra::linalg::SVD::try_new(centered, false, true, f64::EPSILON, 0)
            .ok_or_else(|| Error::Numeric("SVD failed to converge".into()))?;
        let v_t = svd.v_t.as_ref().expect("requested V^T");
        let sv = &svd.singular_values;

        let mut order: Vec<usize> = (0..sv.len()).collect();
        order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]).then(a.cmp(&b)));

        let mut components = Matrix::zeros(dim, big_d);
        for (k, &src) in order.iter().take(dim).enumerate() {
            let row: Vec<f64> = (0..big_d).map(|j| v_t[(src, j)]).collect();
            let pivot = row
                .iter()
                .copied()
                .reduce(|a, b| if b.abs() > a.abs() { b } else { a })
                .unwrap_or(0.0);
            let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
            for (j, v) in row.into_iter().enumerate() {
                components.set(k, j, sign * v);
            }
        }
        let nf = n as f64;
        let explained_variance = order.iter().take(dim).map(|&k| sv[k] * sv[k] / nf).collect();
        let total_variance = sv.iter().map(|s| s * s / nf).sum();
        Ok(Self {
            mean,
            components,
            explained_variance,
            total_variance,
        })
    }

    pub fn dim(&self) -> usize {
        self.components.rows()
    }

    /// `(x − mean) · componentsᵀ`
    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.mean.len() {
            return Err(Error::input(format!(
                "PCA fitted on {} features, got {}",
                self.mean.len(),
                x.cols()
            )));
        }
        let d = self.dim();
        let mut out = Matrix::zeros(x.rows(), d);
        for i in 0..x.rows() {
            let row = x.row(i);
            for k in 0..d {
                let comp = self.components.row(k);
                let v = row.iter().zip(&self.mean).zip(comp).map(|((v, m), c)| (v - m) * c).sum();
                out.set(i, k, v);
            }
        }
        Ok(out)
    }

    /// `scores · components + mean`
    pub fn inverse_transform(&self, scores: &Matrix) -> Matrix {
        let big_d = self.mean.len();
        let mut out = Matrix::zeros(scores.rows(), big_d);
        for i in 0..scores.rows() {
            for j in 0..big_d {
                let v: f64 = (0..self.dim()).map(|k| scores.get(i, k) * self.components.get(k, j)).sum();
                out.set(i, j, v + self.mean[j]);
            }
        }
        out
    }
}
