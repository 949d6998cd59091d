//! Datasets and preprocessing.

mod cache;
mod csv_load;
mod idx;
mod pca;

pub use csv_load::load_csv;
pub use idx::{load_idx, parse_idx_images, parse_idx_labels, IdxImages};
pub use pca::PcaModel;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Feature matrix with ±1 labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub x: Matrix,
    pub y: Vec<i8>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, x: Matrix, y: Vec<i8>) -> Result<Self> {
        if x.rows() != y.len() {
            return Err(Error::input(format!("{} rows but {} labels", x.rows(), y.len())));
        }
        if !x.is_finite() {
            return Err(Error::input("dataset contains NaN or infinite values"));
        }
        if let Some(v) = y.iter().find(|&&v| v != 1 && v != -1) {
            return Err(Error::input(format!("labels must be -1 or +1, found {v}")));
        }
        Ok(Self {
            name: name.into(),
            x,
            y,
        })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.x.cols()
    }

    pub fn select(&self, idx: &[usize]) -> Dataset {
        Dataset {
            name: self.name.clone(),
            x: self.x.select_rows(idx),
            y: idx.iter().map(|&i| self.y[i]).collect(),
        }
    }

    /// `(negatives, positives)`
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.y.iter().filter(|&&v| v > 0).count();
        (self.y.len() - pos, pos)
    }

    /// Concatenates two datasets with the same width.
    pub fn concat(&self, other: &Dataset) -> Result<Dataset> {
        if self.dim() != other.dim() {
            return Err(Error::input("cannot concatenate datasets of different width"));
        }
        let mut data = self.x.as_slice().to_vec();
        data.extend_from_slice(other.x.as_slice());
        let mut y = self.y.clone();
        y.extend_from_slice(&other.y);
        Dataset::new(self.name.clone(), Matrix::from_vec(self.len() + other.len(), self.dim(), data)?, y)
    }
}

/// Per-column mean and population standard deviation (divisor `n`).
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &Matrix) -> Self {
        let (n, d) = x.shape();
        let nf = n.max(1) as f64;
        let mut mean = vec![0.0; d];
        for row in x.iter_rows() {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= nf);
        let mut var = vec![0.0; d];
        for row in x.iter_rows() {
            for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        // Columns whose spread is at rounding level are treated as constant.
        let std = var
            .iter()
            .zip(&mean)
            .map(|(s, m)| {
                let sd = (s / nf).sqrt();
                if sd <= 1e-12 * m.abs().max(1.0) {
                    0.0
                } else {
                    sd
                }
            })
            .collect();
        Self { mean, std }
    }

    /// Zero-variance columns map to zeros.
    pub fn transform(&self, x: &Matrix) -> Matrix {
        let mut out = x.clone();
        for i in 0..out.rows() {
            for (j, v) in out.row_mut(i).iter_mut().enumerate() {
                *v = if self.std[j] > 0.0 {
                    (*v - self.mean[j]) / self.std[j]
                } else {
                    0.0
                };
            }
        }
        out
    }
}

/// Column-wise standardization to mean 0 and population std 1.
pub fn standardize(x: &Matrix) -> (Matrix, Vec<f64>, Vec<f64>) {
    let s = Standardizer::fit(x);
    let out = s.transform(x);
    (out, s.mean, s.std)
}

/// Where PCA (and the standardization before it) gets its statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PcaFit {
    /// All rows of the pool, training and test alike.
    #[default]
    Pool,
    /// Training rows only.
    Train,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PreprocessOptions {
    pub dim: usize,
    pub restandardize: bool,
    pub pca_fit: PcaFit,
}

/// standardize → PCA to `dim` → optionally re-standardize.
///
/// `train_rows` selects the rows used for fitting when `pca_fit` is
/// [`PcaFit::Train`]; every row is transformed.
pub fn preprocess(x: &Matrix, train_rows: &[usize], opts: &PreprocessOptions) -> Result<Matrix> {
    let fit_rows = |m: &Matrix| match opts.pca_fit {
        PcaFit::Pool => m.clone(),
        PcaFit::Train => m.select_rows(train_rows),
    };
    let standardizer = Standardizer::fit(&fit_rows(x));
    let z = standardizer.transform(x);
    let pca = PcaModel::fit(&fit_rows(&z), opts.dim)?;
    let reduced = pca.transform(&z)?;
    if !opts.restandardize {
        return Ok(reduced);
    }
    Ok(Standardizer::fit(&fit_rows(&reduced)).transform(&reduced))
}

/// Stratified sample of `n` rows: `⌈n/2⌉` from one class and `⌊n/2⌋` from the
/// other (the larger class gets the extra row), drawn without replacement.
pub fn stratified_sample(y: &[i8], n: usize, seed: u64) -> Result<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut neg, mut pos) = class_members(y);
    neg.shuffle(&mut rng);
    pos.shuffle(&mut rng);
    let (n_neg, n_pos) = class_quota(n, neg.len(), pos.len());
    if n_neg > neg.len() || n_pos > pos.len() {
        return Err(Error::input(format!(
            "need {n_neg} negative and {n_pos} positive rows, have {} and {}",
            neg.len(),
            pos.len()
        )));
    }
    let mut idx: Vec<usize> = neg[..n_neg].iter().chain(&pos[..n_pos]).copied().collect();
    idx.sort_unstable();
    Ok(idx)
}

fn class_members(y: &[i8]) -> (Vec<usize>, Vec<usize>) {
    (0..y.len()).partition(|&i| y[i] < 0)
}

fn class_quota(n: usize, n_neg: usize, n_pos: usize) -> (usize, usize) {
    let half = n / 2;
    if n.is_multiple_of(2) {
        (half, half)
    } else if n_neg >= n_pos {
        (half + 1, half)
    } else {
        (half, half + 1)
    }
}

/// Disjoint stratified train/test index sets; per side the class counts
/// differ by at most one.
pub fn split_indices(y: &[i8], n_train: usize, n_test: usize, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut neg, mut pos) = class_members(y);
    neg.shuffle(&mut rng);
    pos.shuffle(&mut rng);
    let (tr_neg, tr_pos) = class_quota(n_train, neg.len(), pos.len());
    let (te_neg, te_pos) = class_quota(n_test, neg.len() - tr_neg.min(neg.len()), pos.len() - tr_pos.min(pos.len()));
    if tr_neg + te_neg > neg.len() || tr_pos + te_pos > pos.len() {
        return Err(Error::input(format!(
            "split of {n_train}+{n_test} needs {} negative and {} positive rows, have {} and {}",
            tr_neg + te_neg,
            tr_pos + te_pos,
            neg.len(),
            pos.len()
        )));
    }
    let mut train: Vec<usize> = neg[..tr_neg].iter().chain(&pos[..tr_pos]).copied().collect();
    let mut test: Vec<usize> = neg[tr_neg..tr_neg + te_neg]
        .iter()
        .chain(&pos[tr_pos..tr_pos + te_pos])
        .copied()
        .collect();
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

pub fn split_train_test(ds: &Dataset, n_train: usize, n_test: usize, seed: u64) -> Result<(Dataset, Dataset)> {
    let (train, test) = split_indices(&ds.y, n_train, n_test, seed)?;
    Ok((ds.select(&train), ds.select(&test)))
}

/// Two unit-covariance Gaussian blobs at `±(separation/2)·u` for a seeded
/// random unit direction `u`. The first `n/2` rows are labelled −1.
pub fn synthetic_two_class(n: usize, dim: usize, separation: f64, seed: u64) -> Result<Dataset> {
    if n == 0 || !n.is_multiple_of(2) {
        return Err(Error::input(format!("synthetic dataset size must be even and positive, got {n}")));
    }
    if dim == 0 {
        return Err(Error::input("synthetic dataset needs dim >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u: Vec<f64> = loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            break v.into_iter().map(|x| x / norm).collect();
        }
    };
    let mut data = Vec::with_capacity(n * dim);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let label: i8 = if i < n / 2 { -1 } else { 1 };
        let shift = f64::from(label) * separation / 2.0;
        for uj in &u {
            let noise: f64 = rng.sample(StandardNormal);
            data.push(noise + shift * uj);
        }
        y.push(label);
    }
    Dataset::new(
        format!("synthetic-sep{separation}-seed{seed}"),
        Matrix::from_vec(n, dim, data)?,
        y,
    )
}
