//! Support-vector classification on precomputed kernels.
//!
//! Labels are `i8` values in `{−1, +1}` throughout.

mod model_io;
mod select;
mod solver;

pub use select::{
    rbf_bandwidth_curve, rbf_gamma_scale, rbf_joint_grid_search, select_c_by_cv, select_c_by_train_score,
    stratified_folds, BandwidthPoint, CGrid, CvSelection, RbfSearch, DEFAULT_C_GRID, DEFAULT_GAMMA_MULTIPLIERS,
};
pub use solver::SolverOptions;

use crate::error::{Error, Result};
use crate::kernels::{CrossKernel, GramMatrix};

/// A Gram matrix paired with ±1 labels.
#[derive(Debug, Clone)]
pub struct LabeledKernelProblem {
    k: GramMatrix,
    y: Vec<i8>,
}

impl LabeledKernelProblem {
    pub fn new(k: GramMatrix, y: Vec<i8>) -> Result<Self> {
        if k.n() != y.len() {
            return Err(Error::input(format!(
                "kernel is {n}x{n} but there are {} labels",
                y.len(),
                n = k.n()
            )));
        }
        check_labels(&y)?;
        Ok(Self { k, y })
    }

    pub fn kernel(&self) -> &GramMatrix {
        &self.k
    }

    pub fn labels(&self) -> &[i8] {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// Restriction to the points in `idx` (kernel sliced, no recomputation).
    pub fn subset(&self, idx: &[usize]) -> Result<Self> {
        Self::new(self.k.submatrix(idx), idx.iter().map(|&i| self.y[i]).collect())
    }
}

fn check_labels(y: &[i8]) -> Result<()> {
    if let Some(bad) = y.iter().find(|&&v| v != 1 && v != -1) {
        return Err(Error::input(format!("labels must be -1 or +1, found {bad}")));
    }
    if !(y.contains(&1) && y.contains(&-1)) {
        return Err(Error::input("both classes must be present"));
    }
    Ok(())
}

/// A trained classifier: dual coefficients and bias.
#[derive(Debug, Clone, PartialEq)]
pub struct SvcModel {
    pub alpha: Vec<f64>,
    pub labels: Vec<i8>,
    pub bias: f64,
    pub c: f64,
    pub support_indices: Vec<usize>,
    /// Pair updates performed by the solver.
    pub iterations: u64,
    /// Final maximal violating-pair gap.
    pub kkt_gap: f64,
}

impl SvcModel {
    pub fn n_train(&self) -> usize {
        self.alpha.len()
    }

    pub fn n_support(&self) -> usize {
        self.support_indices.len()
    }

    /// Support vectors per class, `(negative, positive)`.
    pub fn n_support_per_class(&self) -> (usize, usize) {
        let pos = self.support_indices.iter().filter(|&&i| self.labels[i] > 0).count();
        (self.support_indices.len() - pos, pos)
    }

    /// `f_t = Σ_i α_i y_i K(t, i) + b`.
    pub fn decision_values(&self, cross: &CrossKernel) -> Result<Vec<f64>> {
        if cross.n_train() != self.n_train() {
            return Err(Error::input(format!(
                "cross kernel has {} training columns, model has {}",
                cross.n_train(),
                self.n_train()
            )));
        }
        Ok((0..cross.n_test())
            .map(|t| {
                let row = cross.row(t);
                self.support_indices
                    .iter()
                    .map(|&i| self.alpha[i] * f64::from(self.labels[i]) * row[i])
                    .sum::<f64>()
                    + self.bias
            })
            .collect())
    }

    pub fn predict(&self, cross: &CrossKernel) -> Result<Vec<i8>> {
        Ok(self.decision_values(cross)?.into_iter().map(sign_label).collect())
    }

    /// `Σα − ½ αᵀQα` on the training kernel.
    pub fn dual_objective(&self, k: &GramMatrix) -> f64 {
        dual_objective(k, &self.labels, &self.alpha)
    }
}

/// `+1` for a positive decision value, `−1` otherwise.
pub fn sign_label(f: f64) -> i8 {
    if f > 0.0 {
        1
    } else {
        -1
    }
}

pub fn dual_objective(k: &GramMatrix, y: &[i8], alpha: &[f64]) -> f64 {
    let n = alpha.len();
    let mut quad = 0.0;
    for i in 0..n {
        if alpha[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            quad += alpha[i] * alpha[j] * f64::from(y[i]) * f64::from(y[j]) * k.get(i, j);
        }
    }
    alpha.iter().sum::<f64>() - 0.5 * quad
}

/// Trains with the default solver options.
pub fn train_svc(problem: &LabeledKernelProblem, c: f64) -> Result<SvcModel> {
    train_svc_with(problem, c, &SolverOptions::default())
}

pub fn train_svc_with(problem: &LabeledKernelProblem, c: f64, opts: &SolverOptions) -> Result<SvcModel> {
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::input(format!("penalty C must be positive, got {c}")));
    }
    let y: Vec<f64> = problem.y.iter().map(|&v| f64::from(v)).collect();
    let sol = solver::solve(problem.k.matrix(), &y, c, opts)?;
    let bias = bias_from_gradient(&y, &sol.alpha, &sol.gradient, c);
    let threshold = 1e-8 * c;
    let support_indices = (0..y.len()).filter(|&i| sol.alpha[i] > threshold).collect();
    Ok(SvcModel {
        alpha: sol.alpha,
        labels: problem.y.clone(),
        bias,
        c,
        support_indices,
        iterations: sol.iterations,
        kkt_gap: sol.gap,
    })
}

/// Bias as the mean of `y_i − Σ_j α_j y_j K_ij` over free vectors, or the
/// midpoint of the KKT-feasible interval when none are free.
fn bias_from_gradient(y: &[f64], alpha: &[f64], grad: &[f64], c: f64) -> f64 {
    // y_i − Σ_j α_j y_j K_ij = −y_i G_i
    let g = |i: usize| -y[i] * grad[i];
    let free: Vec<usize> = (0..y.len()).filter(|&i| alpha[i] > 0.0 && alpha[i] < c).collect();
    if !free.is_empty() {
        return free.iter().map(|&i| g(i)).sum::<f64>() / free.len() as f64;
    }
    let mut lower = f64::NEG_INFINITY;
    let mut upper = f64::INFINITY;
    for i in 0..y.len() {
        let at_zero = alpha[i] <= 0.0;
        match (y[i] > 0.0, at_zero) {
            (true, true) | (false, false) => lower = lower.max(g(i)),
            (false, true) | (true, false) => upper = upper.min(g(i)),
        }
    }
    match (lower.is_finite(), upper.is_finite()) {
        (true, true) => 0.5 * (lower + upper),
        (true, false) => lower,
        (false, true) => upper,
        (false, false) => 0.0,
    }
}

/// Mean of the two per-class recalls.
pub fn balanced_accuracy(y_pred: &[i8], y_true: &[i8]) -> Result<f64> {
    if y_pred.len() != y_true.len() {
        return Err(Error::input(format!(
            "{} predictions for {} labels",
            y_pred.len(),
            y_true.len()
        )));
    }
    let (mut tp, mut pos, mut tn, mut neg) = (0usize, 0usize, 0usize, 0usize);
    for (&p, &t) in y_pred.iter().zip(y_true) {
        if t > 0 {
            pos += 1;
            tp += usize::from(p > 0);
        } else {
            neg += 1;
            tn += usize::from(p <= 0);
        }
    }
    if pos == 0 || neg == 0 {
        return Err(Error::input("balanced accuracy needs both classes in the true labels"));
    }
    Ok(0.5 * (tp as f64 / pos as f64 + tn as f64 / neg as f64))
}

/// Balanced accuracy of `model` on its own training kernel.
pub fn training_score(model: &SvcModel, problem: &LabeledKernelProblem) -> Result<f64> {
    let cross = CrossKernel::from(problem.k.clone());
    balanced_accuracy(&model.predict(&cross)?, &problem.y)
}
