use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Normal};

use super::{gram, GramMatrix, KernelOptions};
use crate::error::{Error, Result};
use crate::feature_maps::FeatureMap;
use crate::matrix::Matrix;

/// Finite-sampling model for kernel estimation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShotNoiseConfig {
    pub shots: u64,
    pub probe_size: usize,
    pub repeats: usize,
    pub rng_seed: u64,
}

impl Default for ShotNoiseConfig {
    fn default() -> Self {
        Self {
            shots: 5000,
            probe_size: 5,
            repeats: 10,
            rng_seed: 0,
        }
    }
}

/// Standard deviation of a shot-based kernel estimate, measured on a probe
/// set: each off-diagonal entry is re-estimated `repeats` times as
/// `Binomial(shots, p) / shots` and the per-entry sample standard deviations
/// are averaged.
pub fn estimate_shot_sigma(map: &FeatureMap, x_probe: &Matrix, cfg: &ShotNoiseConfig) -> Result<f64> {
    if x_probe.rows() != cfg.probe_size {
        return Err(Error::input(format!(
            "probe has {} points, config says {}",
            x_probe.rows(),
            cfg.probe_size
        )));
    }
    let k = gram(map, x_probe, &KernelOptions::default())?;
    shot_sigma_from_gram(&k, cfg)
}

/// [`estimate_shot_sigma`] for an already computed probe kernel.
pub fn shot_sigma_from_gram(k: &GramMatrix, cfg: &ShotNoiseConfig) -> Result<f64> {
    if k.n() < 2 {
        return Err(Error::input("shot-noise probe needs at least 2 points"));
    }
    shot_sigma_from_fidelities(&k.offdiag(), cfg.shots, cfg.repeats, cfg.rng_seed)
}

/// Mean over `fidelities` of the sample standard deviation of `repeats`
/// binomial estimates with `shots` shots each.
pub fn shot_sigma_from_fidelities(fidelities: &[f64], shots: u64, repeats: usize, seed: u64) -> Result<f64> {
    if shots == 0 {
        return Err(Error::input("shots must be positive"));
    }
    if repeats < 2 {
        return Err(Error::input("a sample standard deviation needs repeats >= 2"));
    }
    if fidelities.is_empty() {
        return Err(Error::input("no fidelities to sample"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut total = 0.0;
    for &p in fidelities {
        let binom = Binomial::new(shots, p.clamp(0.0, 1.0))
            .map_err(|e| Error::Numeric(format!("binomial with p = {p}: {e}")))?;
        let draws: Vec<f64> = (0..repeats)
            .map(|_| binom.sample(&mut rng) as f64 / shots as f64)
            .collect();
        let mean = draws.iter().sum::<f64>() / repeats as f64;
        let var = draws.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (repeats - 1) as f64;
        total += var.sqrt();
    }
    Ok(total / fidelities.len() as f64)
}

/// Adds one `N(0, σ²)` draw per strict-upper-triangle entry and mirrors it.
/// The diagonal is left alone. The result may leave `[0, 1]` and lose
/// positive semi-definiteness.
pub fn inject_noise(k: &GramMatrix, sigma: f64, seed: u64) -> Result<GramMatrix> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::input(format!("noise sigma must be >= 0, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(k.clone());
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::Numeric(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = k.n();
    let mut m = k.matrix().clone();
    for i in 0..n {
        for j in i + 1..n {
            let v = m.get(i, j) + normal.sample(&mut rng);
            m.set(i, j, v);
            m.set(j, i, v);
        }
    }
    Ok(GramMatrix { entries: m })
}

/// Frobenius-nearest positive semi-definite matrix: negative eigenvalues are
/// clipped to zero.
pub fn nearest_psd(k: &GramMatrix) -> Result<GramMatrix> {
    let n = k.n();
    if n == 0 {
        return Ok(k.clone());
    }
    let eig = SymmetricEigen::try_new(k.matrix().to_dmatrix(), f64::EPSILON, 0)
        .ok_or_else(|| Error::Numeric("symmetric eigendecomposition failed to converge".into()))?;
    if eig.eigenvalues.iter().all(|&l| l >= 0.0) {
        return Ok(k.clone());
    }
    let clipped = eig.eigenvalues.map(|l| l.max(0.0));
    let v = &eig.eigenvectors;
    let recon: DMatrix<f64> = v * DMatrix::from_diagonal(&clipped) * v.transpose();
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let s = 0.5 * (recon[(i, j)] + recon[(j, i)]);
            m.set(i, j, s);
            m.set(j, i, s);
        }
    }
    Ok(GramMatrix { entries: m })
}

/// Rounds every entry half away from zero to `decimals` decimal places.
///
/// Intended for circuit inputs, i.e. data that already carries the scaling
/// factor.
pub fn round_inputs(x: &Matrix, decimals: u32) -> Matrix {
    // Beyond 15 digits a double has nothing left to round.
    if decimals > 15 {
        return x.clone();
    }
    let scale = 10f64.powi(decimals as i32);
    x.map(|v| {
        let r = (v * scale).round() / scale;
        if r.is_finite() {
            r
        } else {
            v
        }
    })
}
