//! Gram matrices from fidelity kernels, the RBF baseline, concentration
//! diagnostics and hardware-realism transforms.

mod io;
mod noise;

pub use noise::{
    estimate_shot_sigma, inject_noise, nearest_psd, round_inputs, shot_sigma_from_fidelities,
    shot_sigma_from_gram, ShotNoiseConfig,
};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::feature_maps::FeatureMap;
use crate::matrix::Matrix;
use crate::par::{self, Parallelism};
use crate::statevector::{self, StateVector, DEFAULT_MAX_QUBITS};

/// 4 GiB of cached amplitudes.
pub const DEFAULT_MEMORY_BUDGET: u64 = 4 << 30;

const BYTES_PER_AMPLITUDE: u64 = std::mem::size_of::<Complex64>() as u64;

/// Resource limits and execution mode for kernel assembly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelOptions {
    pub max_qubits: usize,
    pub memory_budget_bytes: u64,
    pub parallelism: Parallelism,
}

impl Default for KernelOptions {
    fn default() -> Self {
        Self {
            max_qubits: DEFAULT_MAX_QUBITS,
            memory_budget_bytes: DEFAULT_MEMORY_BUDGET,
            parallelism: Parallelism::default(),
        }
    }
}

impl KernelOptions {
    pub fn sequential() -> Self {
        Self {
            parallelism: Parallelism::Sequential,
            ..Self::default()
        }
    }

    /// Fails if caching `n_states` embeddings on `n_qubits` qubits would
    /// exceed the qubit cap or the memory budget.
    pub fn check_capacity(&self, n_states: usize, n_qubits: usize) -> Result<()> {
        if n_qubits > self.max_qubits {
            return Err(Error::Capacity(format!(
                "{n_qubits} qubits requested, limit is {}; reduce the data dimension",
                self.max_qubits
            )));
        }
        let bytes = (n_states as u64)
            .saturating_mul(1u64 << n_qubits)
            .saturating_mul(BYTES_PER_AMPLITUDE);
        if bytes > self.memory_budget_bytes {
            return Err(Error::Capacity(format!(
                "caching {n_states} states of {n_qubits} qubits needs {:.2} GiB, budget is {:.2} GiB; \
                 reduce the number of points or qubits",
                bytes as f64 / (1u64 << 30) as f64,
                self.memory_budget_bytes as f64 / (1u64 << 30) as f64
            )));
        }
        Ok(())
    }
}

/// Symmetric kernel matrix over one point set.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    entries: Matrix,
}

impl GramMatrix {
    /// Wraps a square matrix that is symmetric within 1e-12.
    pub fn new(entries: Matrix) -> Result<Self> {
        let (r, c) = entries.shape();
        if r != c {
            return Err(Error::input(format!("Gram matrix must be square, got {r}x{c}")));
        }
        for i in 0..r {
            for j in 0..i {
                if (entries.get(i, j) - entries.get(j, i)).abs() > 1e-12 {
                    return Err(Error::input(format!(
                        "Gram matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        if !entries.is_finite() {
            return Err(Error::input("Gram matrix has non-finite entries"));
        }
        Ok(Self { entries })
    }

    pub fn n(&self) -> usize {
        self.entries.rows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries.get(i, j)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.entries
    }

    pub fn into_matrix(self) -> Matrix {
        self.entries
    }

    /// Principal submatrix on `idx`.
    pub fn submatrix(&self, idx: &[usize]) -> GramMatrix {
        GramMatrix {
            entries: self.entries.select(idx, idx),
        }
    }

    /// Rows `rows`, columns `cols`, as a rectangular kernel.
    pub fn cross_block(&self, rows: &[usize], cols: &[usize]) -> CrossKernel {
        CrossKernel {
            entries: self.entries.select(rows, cols),
        }
    }

    /// Strict upper triangle in row-major order.
    pub fn offdiag(&self) -> Vec<f64> {
        let n = self.n();
        let mut v = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            v.extend_from_slice(&self.entries.row(i)[i + 1..]);
        }
        v
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        let eig = nalgebra::SymmetricEigen::try_new(self.entries.to_dmatrix(), f64::EPSILON, 0)
            .ok_or_else(|| Error::Numeric("symmetric eigendecomposition failed".into()))?;
        Ok(eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min))
    }
}

/// `n_test × n_train` kernel between held-out and training points.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossKernel {
    entries: Matrix,
}

impl CrossKernel {
    pub fn new(entries: Matrix) -> Result<Self> {
        if !entries.is_finite() {
            return Err(Error::input("cross kernel has non-finite entries"));
        }
        Ok(Self { entries })
    }

    pub fn n_test(&self) -> usize {
        self.entries.rows()
    }

    pub fn n_train(&self) -> usize {
        self.entries.cols()
    }

    pub fn get(&self, t: usize, i: usize) -> f64 {
        self.entries.get(t, i)
    }

    pub fn row(&self, t: usize) -> &[f64] {
        self.entries.row(t)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.entries
    }
}

impl From<GramMatrix> for CrossKernel {
    fn from(g: GramMatrix) -> Self {
        CrossKernel { entries: g.entries }
    }
}

/// Embeds every row of `x`, after checking the memory budget for caching them.
pub fn embed_all(map: &FeatureMap, x: &Matrix, opts: &KernelOptions) -> Result<Vec<StateVector>> {
    embed_rows_with(map, x, opts, |map, row| map.embed(row))
}

/// Embeds rows that already carry the scaling factor (see
/// [`FeatureMap::embed_circuit_inputs`]).
pub fn embed_all_circuit_inputs(map: &FeatureMap, z: &Matrix, opts: &KernelOptions) -> Result<Vec<StateVector>> {
    embed_rows_with(map, z, opts, |map, row| map.embed_circuit_inputs(row))
}

fn embed_rows_with<F>(map: &FeatureMap, x: &Matrix, opts: &KernelOptions, f: F) -> Result<Vec<StateVector>>
where
    F: Fn(&FeatureMap, &[f64]) -> Result<StateVector> + Sync + Send,
{
    if x.cols() != map.input_dim() {
        return Err(Error::input(format!(
            "data has {} columns, feature map expects {}",
            x.cols(),
            map.input_dim()
        )));
    }
    opts.check_capacity(x.rows(), map.n_qubits())?;
    par::try_map_collect(x.rows(), opts.parallelism, |i| f(map, x.row(i)))
}

/// Fidelity Gram matrix of precomputed states. Only the upper triangle is
/// evaluated; each entry is one sequential inner product, so the result does
/// not depend on the thread count.
pub fn gram_from_states(states: &[StateVector], parallelism: Parallelism) -> Result<GramMatrix> {
    let n = states.len();
    check_same_qubits(states)?;
    let upper: Vec<Vec<f64>> = par::map_collect(n, parallelism, |i| {
        (i..n)
            .map(|j| statevector::fidelity(states[i].amplitudes(), states[j].amplitudes()))
            .collect()
    });
    let mut m = Matrix::zeros(n, n);
    for (i, row) in upper.iter().enumerate() {
        for (off, &v) in row.iter().enumerate() {
            m.set(i, i + off, v);
            m.set(i + off, i, v);
        }
    }
    Ok(GramMatrix { entries: m })
}

pub fn cross_from_states(test: &[StateVector], train: &[StateVector], parallelism: Parallelism) -> Result<CrossKernel> {
    check_same_qubits(test)?;
    check_same_qubits(train)?;
    if let (Some(a), Some(b)) = (test.first(), train.first()) {
        if a.n_qubits() != b.n_qubits() {
            return Err(Error::input("test and train states have different qubit counts"));
        }
    }
    let rows: Vec<Vec<f64>> = par::map_collect(test.len(), parallelism, |t| {
        train
            .iter()
            .map(|s| statevector::fidelity(test[t].amplitudes(), s.amplitudes()))
            .collect()
    });
    Ok(CrossKernel {
        entries: Matrix::from_vec(test.len(), train.len(), rows.concat())?,
    })
}

fn check_same_qubits(states: &[StateVector]) -> Result<()> {
    if let Some(first) = states.first() {
        if states.iter().any(|s| s.n_qubits() != first.n_qubits()) {
            return Err(Error::input("states have different qubit counts"));
        }
    }
    Ok(())
}

/// `K_ij = |⟨x_i|x_j⟩|²` for the rows of `x`.
pub fn gram(map: &FeatureMap, x: &Matrix, opts: &KernelOptions) -> Result<GramMatrix> {
    let states = embed_all(map, x, opts)?;
    gram_from_states(&states, opts.parallelism)
}

/// Kernel between the rows of `x_test` and the rows of `x_train`.
pub fn cross_gram(map: &FeatureMap, x_test: &Matrix, x_train: &Matrix, opts: &KernelOptions) -> Result<CrossKernel> {
    opts.check_capacity(x_test.rows() + x_train.rows(), map.n_qubits())?;
    let test = embed_all(map, x_test, opts)?;
    let train = embed_all(map, x_train, opts)?;
    cross_from_states(&test, &train, opts.parallelism)
}

/// `exp(-γ ||x_i − x_j||²)`; the diagonal is exactly 1.
pub fn rbf_gram(x: &Matrix, gamma: f64) -> Result<GramMatrix> {
    check_gamma(gamma)?;
    let n = x.rows();
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        m.set(i, i, 1.0);
        for j in i + 1..n {
            let v = (-gamma * sq_dist(x.row(i), x.row(j))).exp();
            m.set(i, j, v);
            m.set(j, i, v);
        }
    }
    Ok(GramMatrix { entries: m })
}

pub fn rbf_cross(x_test: &Matrix, x_train: &Matrix, gamma: f64) -> Result<CrossKernel> {
    check_gamma(gamma)?;
    if x_test.cols() != x_train.cols() {
        return Err(Error::input("test and train data have different widths"));
    }
    let mut m = Matrix::zeros(x_test.rows(), x_train.rows());
    for t in 0..x_test.rows() {
        for i in 0..x_train.rows() {
            m.set(t, i, (-gamma * sq_dist(x_test.row(t), x_train.row(i))).exp());
        }
    }
    Ok(CrossKernel { entries: m })
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::input(format!("RBF gamma must be positive, got {gamma}")));
    }
    Ok(())
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Median of the strict upper triangle (mean of the two middle values for an
/// even count).
pub fn median_offdiag(k: &GramMatrix) -> Result<f64> {
    if k.n() < 2 {
        return Err(Error::input("median of off-diagonal entries needs n >= 2"));
    }
    let mut v = k.offdiag();
    v.sort_by(f64::total_cmp);
    let m = v.len();
    Ok(if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    })
}

/// Population standard deviation of the strict upper triangle.
pub fn offdiag_std(k: &GramMatrix) -> Result<f64> {
    if k.n() < 2 {
        return Err(Error::input("off-diagonal statistics need n >= 2"));
    }
    let v = k.offdiag();
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    Ok((v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / v.len() as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feature_maps::oracle;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn random_data(n: usize, d: usize, seed: u64) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..n * d).map(|_| rng.sample(StandardNormal)).collect();
        Matrix::from_vec(n, d, data).unwrap()
    }

    fn standardized(n: usize, d: usize, seed: u64) -> Matrix {
        crate::data::standardize(&random_data(n, d, seed)).0
    }

    #[test]
    fn single_point_gram() {
        let map = FeatureMap::iqp(3, 1.0).unwrap();
        let k = gram(&map, &random_data(1, 3, 0), &KernelOptions::default()).unwrap();
        assert_eq!(k.n(), 1);
        assert!((k.get(0, 0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn duplicated_rows_have_unit_kernel() {
        let x = random_data(3, 4, 1);
        let x = x.select_rows(&[0, 1, 0, 2]);
        for map in [FeatureMap::iqp(4, 1.3).unwrap(), FeatureMap::hamevo(4, 1.3, 5, 2).unwrap()] {
            let k = gram(&map, &x, &KernelOptions::default()).unwrap();
            assert!((k.get(0, 2) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn gram_matches_dense_oracle() {
        let x = random_data(5, 3, 7);
        let lambda = 0.6;
        let map = FeatureMap::iqp(3, lambda).unwrap();
        let k = gram(&map, &x, &KernelOptions::default()).unwrap();
        let dense: Vec<_> = x.iter_rows().map(|r| oracle::iqp_dense(r, lambda)).collect();
        for i in 0..5 {
            for j in 0..5 {
                let ip: Complex64 = dense[i].iter().zip(&dense[j]).map(|(a, b)| a.conj() * b).sum();
                assert!((k.get(i, j) - ip.norm_sqr()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn cross_gram_consistency() {
        let x = random_data(6, 4, 3);
        let map = FeatureMap::hamevo(4, 0.7, 4, 1).unwrap();
        let opts = KernelOptions::default();
        let k = gram(&map, &x, &opts).unwrap();
        let c = cross_gram(&map, &x, &x, &opts).unwrap();
        assert!(k.matrix().max_abs_diff(c.matrix()) < 1e-12);

        let one = x.select_rows(&[4]);
        let c = cross_gram(&map, &one, &x, &opts).unwrap();
        assert!((c.get(0, 4) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cross_gram_matches_per_pair_fidelity() {
        let test = random_data(3, 2, 10);
        let train = random_data(2, 2, 11);
        let map = FeatureMap::iqp(2, 0.9).unwrap();
        let c = cross_gram(&map, &test, &train, &KernelOptions::default()).unwrap();
        assert_eq!((c.n_test(), c.n_train()), (3, 2));
        for t in 0..3 {
            for i in 0..2 {
                let a = map.embed(test.row(t)).unwrap();
                let b = map.embed(train.row(i)).unwrap();
                assert!((c.get(t, i) - a.fidelity(&b).unwrap()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn parallel_and_sequential_agree_bitwise() {
        let x = random_data(20, 5, 4);
        let map = FeatureMap::iqp(5, 0.8).unwrap();
        let a = gram(&map, &x, &KernelOptions::sequential()).unwrap();
        let b = gram(&map, &x, &KernelOptions::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn capacity_errors() {
        let opts = KernelOptions {
            memory_budget_bytes: 1024,
            ..KernelOptions::default()
        };
        let map = FeatureMap::iqp(6, 1.0).unwrap();
        assert!(matches!(gram(&map, &random_data(2, 6, 0), &opts), Err(Error::Capacity(_))));
        let opts = KernelOptions {
            max_qubits: 4,
            ..KernelOptions::default()
        };
        assert!(matches!(gram(&map, &random_data(2, 6, 0), &opts), Err(Error::Capacity(_))));
    }

    #[test]
    fn noiseless_gram_invariants() {
        for d in [4, 8] {
            let x = standardized(30, d, d as u64);
            for &s in &[0.05, 1.0, 5.0] {
                for map in [FeatureMap::iqp(d, s).unwrap(), FeatureMap::hamevo(d, s, 10, 3).unwrap()] {
                    let k = gram(&map, &x, &KernelOptions::default()).unwrap();
                    for i in 0..k.n() {
                        assert!((k.get(i, i) - 1.0).abs() < 1e-9);
                        for j in 0..k.n() {
                            assert!(k.get(i, j) == k.get(j, i));
                            assert!((0.0..=1.0 + 1e-12).contains(&k.get(i, j)));
                        }
                    }
                    assert!(k.min_eigenvalue().unwrap() >= -1e-8);
                }
            }
        }
    }

    #[test]
    fn wide_kernel_limit() {
        let x = standardized(25, 8, 12);
        let k = gram(&FeatureMap::iqp(8, 1e-3).unwrap(), &x, &KernelOptions::default()).unwrap();
        assert!(k.offdiag().iter().all(|&v| v >= 0.999));
    }

    #[test]
    fn rbf_examples() {
        let x = Matrix::from_rows(&[vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let k = rbf_gram(&x, 0.5).unwrap();
        assert_eq!(k.get(0, 0), 1.0);
        assert_eq!(k.get(0, 2), 1.0);
        assert!((k.get(0, 1) - (-1.0f64).exp()).abs() < 1e-15);
        assert!((k.get(0, 1) - 0.367879).abs() < 1e-6);

        let k = rbf_gram(&random_data(10, 3, 2), 1e-12).unwrap();
        assert!(k.offdiag().iter().all(|&v| (v - 1.0).abs() < 1e-9));

        assert!(rbf_gram(&x, 0.0).is_err());
        assert!(rbf_gram(&x, -1.0).is_err());
        let c = rbf_cross(&x, &x, 0.5).unwrap();
        assert!(c.matrix().max_abs_diff(rbf_gram(&x, 0.5).unwrap().matrix()) < 1e-15);
    }

    #[test]
    fn median_offdiag_examples() {
        let ones = GramMatrix::new(Matrix::from_vec(3, 3, vec![1.0; 9]).unwrap()).unwrap();
        assert_eq!(median_offdiag(&ones).unwrap(), 1.0);
        let two = GramMatrix::new(Matrix::from_rows(&[vec![1.0, 0.3], vec![0.3, 1.0]]).unwrap()).unwrap();
        assert_eq!(median_offdiag(&two).unwrap(), 0.3);
        let mut eye = Matrix::zeros(4, 4);
        (0..4).for_each(|i| eye.set(i, i, 1.0));
        assert_eq!(median_offdiag(&GramMatrix::new(eye).unwrap()).unwrap(), 0.0);
        let single = GramMatrix::new(Matrix::from_vec(1, 1, vec![1.0]).unwrap()).unwrap();
        assert!(median_offdiag(&single).is_err());
    }

    #[test]
    fn gram_rejects_asymmetric() {
        let m = Matrix::from_rows(&[vec![1.0, 0.2], vec![0.3, 1.0]]).unwrap();
        assert!(GramMatrix::new(m).is_err());
    }

    /// Off-diagonal medians decay with qubit count at fixed scaling.
    #[test]
    fn concentration_trend() {
        let dims = [4usize, 6, 8, 10, 12];
        let mut logs = Vec::new();
        let mut prev = f64::INFINITY;
        for &d in &dims {
            let x = standardized(40, d, 100 + d as u64);
            let k = gram(&FeatureMap::iqp(d, 1.0).unwrap(), &x, &KernelOptions::default()).unwrap();
            let med = median_offdiag(&k).unwrap();
            assert!(med <= prev, "median not non-increasing at d = {d}");
            prev = med;
            logs.push(med.ln());
        }
        let xs: Vec<f64> = dims.iter().map(|&d| d as f64).collect();
        let (slope, r2) = crate::experiments::linear_fit(&xs, &logs);
        assert!(slope < 0.0 && r2 >= 0.8, "slope {slope}, R² {r2}");
    }
}
