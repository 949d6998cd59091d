//! Two-variable working-set solver for the SVC dual
//!
//! ```text
//! min_α  ½ αᵀQα − Σα      Q_ij = y_i y_j K_ij
//! s.t.   Σ α_i y_i = 0,   0 ≤ α_i ≤ C
//! ```
//!
//! The first index of each pair is the maximal KKT violator; the second is
//! picked among violating partners by second-order gain. Iteration stops when
//! the maximal violating-pair gap drops below the tolerance.

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Curvature floor for non-PSD or degenerate pairs.
const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Stop when the maximal violating-pair gap is below this.
    pub tolerance: f64,
    /// Cap on pair updates.
    pub max_iterations: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-4,
            max_iterations: 10_000_000,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Solution {
    pub alpha: Vec<f64>,
    pub gradient: Vec<f64>,
    pub iterations: u64,
    pub gap: f64,
}

/// Solves the dual for kernel `k` (n×n), labels `y` in {−1, +1}.
pub(crate) fn solve(k: &Matrix, y: &[f64], c: f64, opts: &SolverOptions) -> Result<Solution> {
    let n = y.len();
    let mut alpha = vec![0.0; n];
    // G = Qα − e
    let mut grad = vec![-1.0; n];
    let diag: Vec<f64> = (0..n).map(|i| k.get(i, i)).collect();
    let mut iterations = 0u64;

    loop {
        let (gap, pair) = select_pair(k, y, &alpha, &grad, &diag, c);
        if gap < opts.tolerance {
            return Ok(Solution {
                alpha,
                gradient: grad,
                iterations,
                gap,
            });
        }
        if iterations >= opts.max_iterations {
            return Err(Error::Convergence { iterations, gap });
        }
        let (i, j) = pair.expect("a positive gap implies a violating pair");
        let (old_i, old_j) = (alpha[i], alpha[j]);
        update_pair(k, y, &mut alpha, &grad, c, i, j);
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        let (ki, kj) = (k.row(i), k.row(j));
        for t in 0..n {
            grad[t] += y[t] * (y[i] * ki[t] * di + y[j] * kj[t] * dj);
        }
        iterations += 1;
    }
}

fn in_up(y: f64, a: f64, c: f64) -> bool {
    (y > 0.0 && a < c) || (y < 0.0 && a > 0.0)
}

fn in_low(y: f64, a: f64, c: f64) -> bool {
    (y > 0.0 && a > 0.0) || (y < 0.0 && a < c)
}

/// Returns the maximal violating-pair gap and the working pair.
fn select_pair(
    k: &Matrix,
    y: &[f64],
    alpha: &[f64],
    grad: &[f64],
    diag: &[f64],
    c: f64,
) -> (f64, Option<(usize, usize)>) {
    let n = y.len();
    let mut g_max = f64::NEG_INFINITY;
    let mut i_sel = None;
    for t in 0..n {
        if in_up(y[t], alpha[t], c) {
            let v = -y[t] * grad[t];
            if v > g_max {
                g_max = v;
                i_sel = Some(t);
            }
        }
    }
    let Some(i) = i_sel else {
        return (0.0, None);
    };

    let ki = k.row(i);
    let mut g_min = f64::INFINITY;
    let mut best_gain = f64::INFINITY;
    let mut j_sel = None;
    for t in 0..n {
        if !in_low(y[t], alpha[t], c) {
            continue;
        }
        let v = -y[t] * grad[t];
        if v < g_min {
            g_min = v;
        }
        let b = g_max - v;
        if b > 0.0 {
            let a = (diag[i] + diag[t] - 2.0 * ki[t]).max(TAU);
            let gain = -(b * b) / a;
            if gain <= best_gain {
                best_gain = gain;
                j_sel = Some(t);
            }
        }
    }
    let gap = if g_min.is_finite() { g_max - g_min } else { 0.0 };
    (gap, j_sel.map(|j| (i, j)))
}

/// Analytic minimization over `(α_i, α_j)` keeping `y_i α_i + y_j α_j` fixed,
/// clipped to the box.
fn update_pair(k: &Matrix, y: &[f64], alpha: &mut [f64], grad: &[f64], c: f64, i: usize, j: usize) {
    let quad = (k.get(i, i) + k.get(j, j) - 2.0 * k.get(i, j)).max(TAU);
    let (mut ai, mut aj) = (alpha[i], alpha[j]);
    if y[i] != y[j] {
        let delta = (-grad[i] - grad[j]) / quad;
        let diff = ai - aj;
        ai += delta;
        aj += delta;
        if diff > 0.0 {
            if aj < 0.0 {
                aj = 0.0;
                ai = diff;
            }
        } else if ai < 0.0 {
            ai = 0.0;
            aj = -diff;
        }
        if diff > 0.0 {
            if ai > c {
                ai = c;
                aj = c - diff;
            }
        } else if aj > c {
            aj = c;
            ai = c + diff;
        }
    } else {
        let delta = (grad[i] - grad[j]) / quad;
        let sum = ai + aj;
        ai -= delta;
        aj += delta;
        if sum > c {
            if ai > c {
                ai = c;
                aj = sum - c;
            }
        } else if aj < 0.0 {
            aj = 0.0;
            ai = sum;
        }
        if sum > c {
            if aj > c {
                aj = c;
                ai = sum - c;
            }
        } else if ai < 0.0 {
            ai = 0.0;
            aj = sum;
        }
    }
    alpha[i] = ai.clamp(0.0, c);
    alpha[j] = aj.clamp(0.0, c);
}
