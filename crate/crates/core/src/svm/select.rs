//! Penalty and bandwidth selection.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{balanced_accuracy, train_svc, training_score, LabeledKernelProblem, SvcModel};
use crate::error::{Error, Result};
use crate::kernels::{rbf_cross, rbf_gram, GramMatrix};
use crate::matrix::Matrix;
use crate::par::{self, Parallelism};

pub const DEFAULT_C_GRID: [f64; 18] = [
    0.006, 0.015, 0.03, 0.0625, 0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0, 512.0, 1024.0,
];

/// RBF `γ` multipliers; the actual values are these divided by `N·Var[x]`.
pub const DEFAULT_GAMMA_MULTIPLIERS: [f64; 15] = [
    0.25, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 20.0, 50.0, 100.0, 200.0, 500.0, 1000.0, 5000.0, 10000.0,
];

/// Strictly increasing list of positive penalties.
#[derive(Debug, Clone, PartialEq)]
pub struct CGrid(Vec<f64>);

impl CGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::input("C grid is empty"));
        }
        if values.iter().any(|&c| !(c.is_finite() && c > 0.0)) {
            return Err(Error::input("C grid values must be positive"));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::input("C grid must be strictly increasing"));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

impl Default for CGrid {
    fn default() -> Self {
        Self(DEFAULT_C_GRID.to_vec())
    }
}

/// Index of the best score; ties go to the earliest (smallest C).
fn argmax_first(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

/// Picks the C with the best balanced accuracy on the training set itself.
pub fn select_c_by_train_score(problem: &LabeledKernelProblem, grid: &CGrid) -> Result<(f64, SvcModel)> {
    select_c_by_train_score_with(problem, grid, Parallelism::default())
}

pub fn select_c_by_train_score_with(
    problem: &LabeledKernelProblem,
    grid: &CGrid,
    parallelism: Parallelism,
) -> Result<(f64, SvcModel)> {
    let fits = par::try_map_collect(grid.0.len(), parallelism, |i| {
        let m = train_svc(problem, grid.0[i])?;
        let s = training_score(&m, problem)?;
        Ok::<_, Error>((m, s))
    })?;
    let scores: Vec<f64> = fits.iter().map(|(_, s)| *s).collect();
    let best = argmax_first(&scores);
    let model = fits.into_iter().nth(best).expect("grid is nonempty").0;
    Ok((grid.0[best], model))
}

/// Outcome of cross-validated penalty selection.
#[derive(Debug, Clone)]
pub struct CvSelection {
    pub c: f64,
    pub model: SvcModel,
    /// Mean validation balanced accuracy per grid entry.
    pub scores: Vec<f64>,
}

/// Fold id per point: each class is shuffled with `seed` and dealt
/// round-robin, so fold class counts differ by at most one.
pub fn stratified_folds(y: &[i8], folds: usize, seed: u64) -> Result<Vec<usize>> {
    if folds < 2 {
        return Err(Error::input("cross-validation needs at least 2 folds"));
    }
    if folds > y.len() {
        return Err(Error::input(format!("{folds} folds for only {} points", y.len())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0; y.len()];
    let mut next = 0;
    for class in [-1i8, 1] {
        let mut members: Vec<usize> = (0..y.len()).filter(|&i| y[i] == class).collect();
        members.shuffle(&mut rng);
        for i in members {
            assignment[i] = next % folds;
            next += 1;
        }
    }
    Ok(assignment)
}

/// Stratified k-fold selection of C. Fold kernels are slices of the
/// precomputed Gram matrix.
///
/// The score of a C is the mean per-fold validation balanced accuracy. When
/// some validation fold holds a single class (tiny problems, leave-one-out),
/// the balanced accuracy of the pooled out-of-fold predictions is used
/// instead. Every training complement must contain both classes.
pub fn select_c_by_cv(problem: &LabeledKernelProblem, grid: &CGrid, folds: usize, seed: u64) -> Result<CvSelection> {
    select_c_by_cv_with(problem, grid, folds, seed, Parallelism::default())
}

pub fn select_c_by_cv_with(
    problem: &LabeledKernelProblem,
    grid: &CGrid,
    folds: usize,
    seed: u64,
    parallelism: Parallelism,
) -> Result<CvSelection> {
    let y = problem.labels();
    let assignment = stratified_folds(y, folds, seed)?;
    let splits: Vec<(Vec<usize>, Vec<usize>)> = (0..folds)
        .map(|f| {
            let (val, train): (Vec<usize>, Vec<usize>) = (0..y.len()).partition(|&i| assignment[i] == f);
            (train, val)
        })
        .collect();
    let mut fold_problems = Vec::with_capacity(folds);
    for (f, (train, _)) in splits.iter().enumerate() {
        let sub = problem.subset(train).map_err(|_| {
            Error::input(format!(
                "fold {f} leaves a single class for training; too few points per class for {folds} folds"
            ))
        })?;
        fold_problems.push(sub);
    }
    let per_fold_ok = splits.iter().all(|(_, val)| {
        let has = |c: i8| val.iter().any(|&i| y[i] == c);
        has(1) && has(-1)
    });

    let n_c = grid.0.len();
    // Out-of-fold predictions for every (C, fold) job.
    let preds = par::try_map_collect(n_c * folds, parallelism, |job| {
        let (ci, f) = (job / folds, job % folds);
        let (train, val) = &splits[f];
        let model = train_svc(&fold_problems[f], grid.0[ci])?;
        model.predict(&problem.kernel().cross_block(val, train))
    })?;

    let mut scores = Vec::with_capacity(n_c);
    for ci in 0..n_c {
        let jobs = &preds[ci * folds..(ci + 1) * folds];
        let score = if per_fold_ok {
            let mut total = 0.0;
            for (f, p) in jobs.iter().enumerate() {
                let truth: Vec<i8> = splits[f].1.iter().map(|&i| y[i]).collect();
                total += balanced_accuracy(p, &truth)?;
            }
            total / folds as f64
        } else {
            let mut pooled = vec![0i8; y.len()];
            for (f, p) in jobs.iter().enumerate() {
                for (&i, &v) in splits[f].1.iter().zip(p) {
                    pooled[i] = v;
                }
            }
            balanced_accuracy(&pooled, y)?
        };
        scores.push(score);
    }
    let best = argmax_first(&scores);
    let c = grid.0[best];
    let model = train_svc(problem, c)?;
    Ok(CvSelection { c, model, scores })
}

/// `1 / (N · Var[x])`: `N` training points, `Var` over all entries.
pub fn rbf_gamma_scale(x_train: &Matrix) -> Result<f64> {
    let v = x_train.as_slice();
    if v.is_empty() {
        return Err(Error::input("empty training data"));
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / v.len() as f64;
    if var <= 0.0 {
        return Err(Error::input("training data has zero variance; RBF gamma scale undefined"));
    }
    Ok(1.0 / (x_train.rows() as f64 * var))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RbfSearch {
    pub c: f64,
    pub gamma: f64,
    pub cv_score: f64,
}

/// Joint cross-validated search over C and `γ = multiplier / (N·Var[x])`.
/// Ties go to the smaller γ, then the smaller C.
pub fn rbf_joint_grid_search(
    x: &Matrix,
    y: &[i8],
    grid: &CGrid,
    gamma_multipliers: &[f64],
    folds: usize,
    seed: u64,
) -> Result<RbfSearch> {
    if gamma_multipliers.is_empty() || gamma_multipliers.iter().any(|&g| !g.is_finite() || g <= 0.0) {
        return Err(Error::input("gamma multipliers must be positive and nonempty"));
    }
    let scale = rbf_gamma_scale(x)?;
    let mut best: Option<RbfSearch> = None;
    for &mult in gamma_multipliers {
        let gamma = mult * scale;
        let problem = LabeledKernelProblem::new(rbf_gram(x, gamma)?, y.to_vec())?;
        let sel = select_c_by_cv(&problem, grid, folds, seed)?;
        let idx = argmax_first(&sel.scores);
        let score = sel.scores[idx];
        if best.as_ref().is_none_or(|b| score > b.cv_score) {
            best = Some(RbfSearch {
                c: sel.c,
                gamma,
                cv_score: score,
            });
        }
    }
    Ok(best.expect("multipliers are nonempty"))
}

/// One point of a bandwidth curve at fixed C.
#[derive(Debug, Clone, PartialEq)]
pub struct BandwidthPoint {
    pub gamma: f64,
    pub train_bacc: f64,
    pub test_bacc: f64,
    pub n_support: usize,
}

/// Train/test balanced accuracy across `gammas` with C frozen.
pub fn rbf_bandwidth_curve(
    x_train: &Matrix,
    y_train: &[i8],
    x_test: &Matrix,
    y_test: &[i8],
    c: f64,
    gammas: &[f64],
) -> Result<Vec<BandwidthPoint>> {
    gammas
        .iter()
        .map(|&gamma| {
            let k: GramMatrix = rbf_gram(x_train, gamma)?;
            let problem = LabeledKernelProblem::new(k, y_train.to_vec())?;
            let model = train_svc(&problem, c)?;
            let train_bacc = training_score(&model, &problem)?;
            let test_pred = model.predict(&rbf_cross(x_test, x_train, gamma)?)?;
            Ok(BandwidthPoint {
                gamma,
                train_bacc,
                test_bacc: balanced_accuracy(&test_pred, y_test)?,
                n_support: model.n_support(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::synthetic_two_class;

    fn blobs(n: usize, sep: f64, seed: u64) -> (Matrix, Vec<i8>) {
        let ds = synthetic_two_class(n, 2, sep, seed).unwrap();
        (ds.x, ds.y)
    }

    fn rbf_problem(x: &Matrix, y: &[i8], gamma: f64) -> LabeledKernelProblem {
        LabeledKernelProblem::new(rbf_gram(x, gamma).unwrap(), y.to_vec()).unwrap()
    }

    #[test]
    fn default_grids() {
        assert_eq!(CGrid::default().values().len(), 18);
        assert_eq!(CGrid::default().values()[0], 0.006);
        assert_eq!(DEFAULT_GAMMA_MULTIPLIERS.len(), 15);
        assert!(CGrid::new(vec![1.0, 1.0]).is_err());
        assert!(CGrid::new(vec![-1.0]).is_err());
        assert!(CGrid::new(vec![]).is_err());
    }

    #[test]
    fn train_score_tie_goes_to_smallest_c() {
        let (x, y) = blobs(40, 12.0, 1);
        let p = rbf_problem(&x, &y, 0.5);
        let (c, m) = select_c_by_train_score(&p, &CGrid::default()).unwrap();
        assert_eq!(training_score(&m, &p).unwrap(), 1.0);
        assert_eq!(c, 0.006);
    }

    #[test]
    fn train_score_prefers_only_c_that_fits() {
        // Overlapping classes under a narrow-ish kernel: only large C
        // memorizes the training set. Verified by evaluating the full grid.
        let (x, y) = blobs(60, 0.5, 2);
        let p = rbf_problem(&x, &y, 20.0);
        let grid = CGrid::default();
        let scores: Vec<f64> = grid
            .values()
            .iter()
            .map(|&c| training_score(&train_svc(&p, c).unwrap(), &p).unwrap())
            .collect();
        let best = argmax_first(&scores);
        assert!(scores[0] < scores[best]);
        let (c, _) = select_c_by_train_score(&p, &grid).unwrap();
        assert_eq!(c, grid.values()[best]);
    }

    #[test]
    fn single_entry_grid() {
        let (x, y) = blobs(20, 3.0, 3);
        let p = rbf_problem(&x, &y, 1.0);
        let grid = CGrid::new(vec![3.0]).unwrap();
        assert_eq!(select_c_by_train_score(&p, &grid).unwrap().0, 3.0);
        assert_eq!(select_c_by_cv(&p, &grid, 5, 0).unwrap().c, 3.0);
    }

    #[test]
    fn folds_are_stratified_and_deterministic() {
        let y: Vec<i8> = (0..23).map(|i| if i % 3 == 0 { 1 } else { -1 }).collect();
        let a = stratified_folds(&y, 5, 7).unwrap();
        assert_eq!(a, stratified_folds(&y, 5, 7).unwrap());
        for class in [-1i8, 1] {
            let counts: Vec<usize> = (0..5)
                .map(|f| (0..y.len()).filter(|&i| y[i] == class && a[i] == f).count())
                .collect();
            let (lo, hi) = (counts.iter().min().unwrap(), counts.iter().max().unwrap());
            assert!(hi - lo <= 1, "{counts:?}");
        }
        assert!(stratified_folds(&y, 1, 0).is_err());
        assert!(stratified_folds(&y, 24, 0).is_err());
    }

    #[test]
    fn cv_separable_duplicates_pick_smallest_c() {
        let (x, y) = blobs(20, 14.0, 4);
        let x = x.select_rows(&(0..40).map(|i| i % 20).collect::<Vec<_>>());
        let y: Vec<i8> = (0..40).map(|i| y[i % 20]).collect();
        let p = rbf_problem(&x, &y, 0.5);
        let sel = select_c_by_cv(&p, &CGrid::default(), 5, 1).unwrap();
        assert!(sel.scores.iter().all(|&s| s == 1.0));
        assert_eq!(sel.c, 0.006);
    }

    #[test]
    fn cv_is_deterministic() {
        let (x, y) = blobs(50, 1.5, 5);
        let p = rbf_problem(&x, &y, 1.0);
        let a = select_c_by_cv(&p, &CGrid::default(), 5, 11).unwrap();
        let b = select_c_by_cv(&p, &CGrid::default(), 5, 11).unwrap();
        assert_eq!(a.c, b.c);
        assert_eq!(a.scores, b.scores);
        let seq = select_c_by_cv_with(&p, &CGrid::default(), 5, 11, Parallelism::Sequential).unwrap();
        assert_eq!(seq.scores, a.scores);
    }

    #[test]
    fn leave_one_out_uses_pooled_predictions() {
        let (x, y) = blobs(6, 6.0, 6);
        let p = rbf_problem(&x, &y, 0.5);
        let sel = select_c_by_cv(&p, &CGrid::default(), 6, 0).unwrap();
        assert_eq!(sel.scores.len(), 18);
        assert!(sel.scores.iter().all(|s| (0.0..=1.0).contains(s)));
    }

    #[test]
    fn cv_rejects_too_small_folds() {
        // The fold holding the only positive point trains on negatives alone.
        let y: Vec<i8> = vec![1, -1, -1, -1, -1, -1];
        let mut m = Matrix::zeros(6, 6);
        (0..6).for_each(|i| m.set(i, i, 1.0));
        let p = LabeledKernelProblem::new(GramMatrix::new(m).unwrap(), y).unwrap();
        assert!(matches!(select_c_by_cv(&p, &CGrid::default(), 5, 0), Err(Error::Input(_))));
    }

    #[test]
    fn gamma_scale_requires_variance() {
        let x = Matrix::from_vec(4, 2, vec![3.0; 8]).unwrap();
        assert!(rbf_gamma_scale(&x).is_err());
        let y = vec![1, 1, -1, -1];
        assert!(rbf_joint_grid_search(&x, &y, &CGrid::default(), &DEFAULT_GAMMA_MULTIPLIERS, 2, 0).is_err());
    }

    #[test]
    fn rbf_search_on_separated_blobs() {
        let (x, y) = blobs(100, 6.0, 8);
        let s = rbf_joint_grid_search(&x, &y, &CGrid::default(), &DEFAULT_GAMMA_MULTIPLIERS, 5, 0).unwrap();
        assert!(s.cv_score >= 0.95, "{s:?}");
        let (xt, yt) = blobs(40, 6.0, 9);
        let curve = rbf_bandwidth_curve(&x, &y, &xt, &yt, s.c, &[s.gamma, 1e4 * rbf_gamma_scale(&x).unwrap()]).unwrap();
        assert!(curve[0].test_bacc >= 0.9);
        // Extremely narrow kernel memorizes and keeps every point.
        assert_eq!(curve[1].train_bacc, 1.0);
        assert_eq!(curve[1].n_support, 100);
    }
}
