//! Dense statevectors and the gates needed by the feature maps.
//!
//! Basis index bit `j` holds qubit `j` (least significant first). A two-qubit
//! gate acting on `(q_a, q_b)` sees the local basis `|a b⟩` with local index
//! `2·a + b`, i.e. `q_a` is the more significant bit of the 4×4 matrix.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Default cap on the number of qubits a state may hold.
pub const DEFAULT_MAX_QUBITS: usize = 26;

const NORM_TOL: f64 = 1e-10;
const SINGLE_QUBIT_NORM_TOL: f64 = 1e-12;
const UNITARY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩` on `n_qubits` qubits, limited to [`DEFAULT_MAX_QUBITS`].
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::zero_with_limit(n_qubits, DEFAULT_MAX_QUBITS)
    }

    pub fn zero_with_limit(n_qubits: usize, max_qubits: usize) -> Result<Self> {
        check_capacity(n_qubits, max_qubits)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1usize << n_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// Tensor product of single-qubit states; `factors[j]` becomes qubit `j`.
    pub fn product(factors: &[SingleQubitState]) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::input("product state needs at least one factor"));
        }
        check_capacity(factors.len(), DEFAULT_MAX_QUBITS)?;
        let mut amplitudes = Vec::with_capacity(1usize << factors.len());
        amplitudes.push(Complex64::new(1.0, 0.0));
        // Appending qubit j doubles the vector: the new bit is the most
        // significant one seen so far.
        for f in factors {
            let half = amplitudes.len();
            amplitudes.extend_from_within(..);
            for a in &mut amplitudes[..half] {
                *a *= f.a0;
            }
            for a in &mut amplitudes[half..] {
                *a *= f.a1;
            }
        }
        Ok(Self {
            n_qubits: factors.len(),
            amplitudes,
        })
    }

    /// Wraps normalized amplitudes. The length must be a power of two.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let state = Self::from_raw(amplitudes)?;
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::input(format!(
                "amplitudes are not normalized (squared norm {norm})"
            )));
        }
        Ok(state)
    }

    /// Wraps amplitudes without the normalization check. Gates act linearly on
    /// such vectors, which is useful for superposition tests.
    pub fn from_raw(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::input(format!(
                "amplitude count {len} is not a positive power of two"
            )));
        }
        Ok(Self {
            n_qubits: len.trailing_zeros() as usize,
            amplitudes,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Applies `H` to every qubit in place.
    pub fn apply_hadamard_all(&mut self) {
        let scale = std::f64::consts::FRAC_1_SQRT_2;
        let dim = self.dim();
        let mut stride = 1;
        while stride < dim {
            for block in self.amplitudes.chunks_exact_mut(2 * stride) {
                let (lo, hi) = block.split_at_mut(stride);
                for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                    let (x, y) = (*a, *b);
                    *a = (x + y) * scale;
                    *b = (x - y) * scale;
                }
            }
            stride <<= 1;
        }
    }

    /// Multiplies amplitude `b` by `exp(i·phase(b))`.
    ///
    /// Fails without touching the state if any phase is non-finite.
    pub fn apply_diagonal_phases<F>(&mut self, phase: F) -> Result<()>
    where
        F: Fn(usize) -> f64,
    {
        let phases: Vec<f64> = (0..self.dim()).map(phase).collect();
        self.apply_phase_table(&phases)
    }

    /// Same as [`apply_diagonal_phases`](Self::apply_diagonal_phases) with the
    /// phases already tabulated by basis index.
    pub fn apply_phase_table(&mut self, phases: &[f64]) -> Result<()> {
        if phases.len() != self.dim() {
            return Err(Error::input(format!(
                "phase table has {} entries, state has {}",
                phases.len(),
                self.dim()
            )));
        }
        if let Some(b) = phases.iter().position(|p| !p.is_finite()) {
            return Err(Error::input(format!("non-finite phase at basis index {b}")));
        }
        for (a, &p) in self.amplitudes.iter_mut().zip(phases) {
            *a *= Complex64::from_polar(1.0, p);
        }
        Ok(())
    }

    /// Applies `gate` to qubits `(q_a, q_b)`, `q_a` being the high local bit.
    pub fn apply_two_qubit_gate(
        &mut self,
        gate: &TwoQubitUnitary,
        q_a: usize,
        q_b: usize,
    ) -> Result<()> {
        if q_a == q_b {
            return Err(Error::Index(format!("gate qubits coincide ({q_a})")));
        }
        if q_a >= self.n_qubits || q_b >= self.n_qubits {
            return Err(Error::Index(format!(
                "qubits ({q_a}, {q_b}) out of range for {} qubits",
                self.n_qubits
            )));
        }
        let (ma, mb) = (1usize << q_a, 1usize << q_b);
        let m = &gate.entries;
        for base in 0..self.dim() {
            if base & (ma | mb) != 0 {
                continue;
            }
            let idx = [base, base | mb, base | ma, base | ma | mb];
            let v = idx.map(|i| self.amplitudes[i]);
            for (r, &i) in idx.iter().enumerate() {
                self.amplitudes[i] =
                    m[r][0] * v[0] + m[r][1] * v[1] + m[r][2] * v[2] + m[r][3] * v[3];
            }
        }
        Ok(())
    }

    /// `⟨self|other⟩ = Σ conj(self_k)·other_k`, summed in index order.
    pub fn inner_product(&self, other: &StateVector) -> Result<Complex64> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::input(format!(
                "qubit count mismatch: {} vs {}",
                self.n_qubits, other.n_qubits
            )));
        }
        Ok(inner(&self.amplitudes, &other.amplitudes))
    }

    /// `|⟨self|other⟩|²`, capped at 1.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        self.inner_product(other)?;
        Ok(fidelity(&self.amplitudes, &other.amplitudes))
    }
}

/// `|⟨a|b⟩|²` capped at 1, which rounding in long gate sequences can
/// otherwise exceed by a few ulps.
pub(crate) fn fidelity(a: &[Complex64], b: &[Complex64]) -> f64 {
    inner(a, b).norm_sqr().min(1.0)
}

pub(crate) fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter()
        .zip(b)
        .fold(Complex64::new(0.0, 0.0), |acc, (x, y)| acc + x.conj() * y)
}

fn check_capacity(n_qubits: usize, max_qubits: usize) -> Result<()> {
    if n_qubits == 0 {
        return Err(Error::input("a state needs at least one qubit"));
    }
    if n_qubits > max_qubits {
        return Err(Error::Capacity(format!(
            "{n_qubits} qubits requested, limit is {max_qubits}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleQubitState {
    pub a0: Complex64,
    pub a1: Complex64,
}

impl SingleQubitState {
    pub const ZERO: Self = Self {
        a0: Complex64::new(1.0, 0.0),
        a1: Complex64::new(0.0, 0.0),
    };
    pub const ONE: Self = Self {
        a0: Complex64::new(0.0, 0.0),
        a1: Complex64::new(1.0, 0.0),
    };

    pub fn new(a0: Complex64, a1: Complex64) -> Result<Self> {
        let norm = a0.norm_sqr() + a1.norm_sqr();
        if (norm - 1.0).abs() > SINGLE_QUBIT_NORM_TOL {
            return Err(Error::input(format!(
                "single-qubit state has squared norm {norm}"
            )));
        }
        Ok(Self { a0, a1 })
    }
}

/// Draws a Haar-random pure qubit state: two complex Gaussian amplitudes,
/// normalized. An all-zero draw is redrawn.
pub fn sample_haar_single_qubit<R: Rng + ?Sized>(rng: &mut R) -> SingleQubitState {
    loop {
        let v: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            return SingleQubitState {
                a0: Complex64::new(v[0] / norm, v[1] / norm),
                a1: Complex64::new(v[2] / norm, v[3] / norm),
            };
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoQubitUnitary {
    entries: [[Complex64; 4]; 4],
}

impl TwoQubitUnitary {
    /// Validates `U†U = I` within 1e-10 entrywise.
    pub fn new(entries: [[Complex64; 4]; 4]) -> Result<Self> {
        for i in 0..4 {
            for j in 0..4 {
                let dot: Complex64 = (0..4).map(|k| entries[k][i].conj() * entries[k][j]).sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                if (dot - expected).norm() > UNITARY_TOL {
                    return Err(Error::input(format!(
                        "matrix is not unitary: (U†U)[{i}][{j}] = {dot}"
                    )));
                }
            }
        }
        Ok(Self { entries })
    }

    pub(crate) fn new_unchecked(entries: [[Complex64; 4]; 4]) -> Self {
        Self { entries }
    }

    pub fn identity() -> Self {
        let mut e = [[Complex64::new(0.0, 0.0); 4]; 4];
        for (i, row) in e.iter_mut().enumerate() {
            row[i] = Complex64::new(1.0, 0.0);
        }
        Self { entries: e }
    }

    pub fn entries(&self) -> &[[Complex64; 4]; 4] {
        &self.entries
    }

    /// The same operator with the roles of the two qubits exchanged, so that
    /// applying it on `(q_b, q_a)` matches applying `self` on `(q_a, q_b)`.
    pub fn swapped(&self) -> Self {
        const P: [usize; 4] = [0, 2, 1, 3];
        let mut e = [[Complex64::new(0.0, 0.0); 4]; 4];
        for r in 0..4 {
            for c in 0..4 {
                e[P[r]][P[c]] = self.entries[r][c];
            }
        }
        Self { entries: e }
    }
}
