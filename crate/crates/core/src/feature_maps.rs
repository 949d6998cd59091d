//! Quantum feature maps: real vectors to statevectors.
//!
//! Both maps expose a single bandwidth knob, the *scaling factor*: `λ` for the
//! IQP map and the evolution time `t` for the Hamiltonian evolution map. In
//! both cases the factor enters only through the products `λ·x` (resp. `t·x`),
//! so it can equivalently be folded into the data; see
//! [`FeatureMap::circuit_inputs`] and [`FeatureMap::embed_circuit_inputs`].

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::statevector::{sample_haar_single_qubit, SingleQubitState, StateVector, TwoQubitUnitary};

/// IQP-style embedding `U_Z(x) H U_Z(x) H |0…0⟩` on `d` qubits, with
///
/// `U_Z(x) = exp(i [Σ_j λ x_j Z_j + Σ_j Σ_j' λ² x_j x_j' Z_j Z_j'])`.
///
/// The double sum runs over the full `(j, j')` grid, diagonal included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IqpFeatureMap {
    dim: usize,
    scaling: f64,
}

impl IqpFeatureMap {
    pub fn new(dim: usize, scaling: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::input("IQP map needs dimension >= 1"));
        }
        check_scaling(scaling)?;
        Ok(Self { dim, scaling })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn scaling(&self) -> f64 {
        self.scaling
    }

    /// Phase of `U_Z(x)` on basis state `basis_index`, evaluated term by term.
    ///
    /// `s_j = +1` when bit `j` is 0 and `-1` otherwise.
    pub fn phase(&self, x: &[f64], basis_index: usize) -> Result<f64> {
        self.check_input(x)?;
        if basis_index >> self.dim != 0 {
            return Err(Error::input(format!(
                "basis index {basis_index} out of range for {} qubits",
                self.dim
            )));
        }
        let (linear, quadratic) = phase_parts(x, basis_index);
        Ok(self.scaling * linear + self.scaling * self.scaling * quadratic)
    }

    pub fn embed(&self, x: &[f64]) -> Result<StateVector> {
        self.check_input(x)?;
        let table = iqp_phase_table(x, self.scaling);
        iqp_circuit(self.dim, &table)
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        check_input(x, self.dim)
    }
}

/// Returns `(Σ_j x_j s_j, Σ_j Σ_j' x_j x_j' s_j s_j')` for one basis index.
fn phase_parts(x: &[f64], basis_index: usize) -> (f64, f64) {
    let sign = |j: usize| if (basis_index >> j) & 1 == 0 { 1.0 } else { -1.0 };
    let mut linear = 0.0;
    let mut quadratic = 0.0;
    for (j, &xj) in x.iter().enumerate() {
        linear += xj * sign(j);
        for (jp, &xjp) in x.iter().enumerate() {
            quadratic += xj * xjp * sign(j) * sign(jp);
        }
    }
    (linear, quadratic)
}

/// Tabulates the IQP phase for every basis index in O(2^d).
///
/// The literal double sum factorizes as `(Σ_j x_j s_j)²`, and the linear sum
/// for index `b` differs from `b` with its top bit cleared by `-2·x_top`.
fn iqp_phase_table(x: &[f64], scaling: f64) -> Vec<f64> {
    let dim = 1usize << x.len();
    let mut linear = vec![0.0; dim];
    linear[0] = x.iter().sum();
    for (j, &xj) in x.iter().enumerate() {
        let half = 1usize << j;
        for b in half..2 * half {
            linear[b] = linear[b - half] - 2.0 * xj;
        }
    }
    linear
        .into_iter()
        .map(|u| scaling * u + scaling * scaling * (u * u))
        .collect()
}

fn iqp_circuit(dim: usize, phases: &[f64]) -> Result<StateVector> {
    let mut state = StateVector::zero(dim)?;
    state.apply_hadamard_all();
    state.apply_phase_table(phases)?;
    state.apply_hadamard_all();
    state.apply_phase_table(phases)?;
    Ok(state)
}

/// Trotterized Heisenberg-chain embedding on `d + 1` qubits:
///
/// `(Π_{j=1..d} exp(-i (t/T) x_j (X_j X_{j+1} + Y_j Y_{j+1} + Z_j Z_{j+1})))^T ⊗_j |ψ_j⟩`
///
/// Within a Trotter step the pairs are applied in ascending order with an open
/// boundary. The `|ψ_j⟩` are Haar-random and fixed by `init_seed`.
#[derive(Debug, Clone, PartialEq)]
pub struct HamEvoFeatureMap {
    dim: usize,
    time: f64,
    trotter_steps: usize,
    init_seed: u64,
    init_factors: Vec<SingleQubitState>,
}

impl HamEvoFeatureMap {
    pub fn new(dim: usize, time: f64, trotter_steps: usize, init_seed: u64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::input("Hamiltonian evolution map needs dimension >= 1"));
        }
        if trotter_steps == 0 {
            return Err(Error::input("trotter_steps must be >= 1"));
        }
        check_scaling(time)?;
        let init_factors = (0..=dim).map(|j| haar_factor(init_seed, j)).collect();
        Ok(Self {
            dim,
            time,
            trotter_steps,
            init_seed,
            init_factors,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_qubits(&self) -> usize {
        self.dim + 1
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn trotter_steps(&self) -> usize {
        self.trotter_steps
    }

    pub fn init_seed(&self) -> u64 {
        self.init_seed
    }

    /// The Haar-random single-qubit factors, one per qubit.
    pub fn init_factors(&self) -> &[SingleQubitState] {
        &self.init_factors
    }

    pub fn init_product_state(&self) -> Result<StateVector> {
        StateVector::product(&self.init_factors)
    }

    pub fn embed(&self, x: &[f64]) -> Result<StateVector> {
        check_input(x, self.dim)?;
        let step = self.time / self.trotter_steps as f64;
        let angles: Vec<f64> = x.iter().map(|&v| step * v).collect();
        self.evolve(&angles)
    }

    fn evolve(&self, angles: &[f64]) -> Result<StateVector> {
        let gates: Vec<TwoQubitUnitary> = angles.iter().map(|&a| heisenberg_gate(a)).collect::<Result<_>>()?;
        let mut state = self.init_product_state()?;
        for _ in 0..self.trotter_steps {
            for (q, gate) in gates.iter().enumerate() {
                state.apply_two_qubit_gate(gate, q, q + 1)?;
            }
        }
        Ok(state)
    }
}

/// Haar state for qubit `qubit`, drawn from its own ChaCha stream so it does
/// not depend on how many qubits the map has.
fn haar_factor(seed: u64, qubit: usize) -> SingleQubitState {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(qubit as u64);
    sample_haar_single_qubit(&mut rng)
}

/// `exp(-iθ (XX + YY + ZZ))` in closed form.
///
/// `XX + YY + ZZ = 2·SWAP − I`, so the exponential is
/// `e^{iθ}(cos 2θ · I − i sin 2θ · SWAP)`: `e^{−iθ}` on the triplet and
/// `e^{3iθ}` on the singlet.
pub fn heisenberg_gate(theta: f64) -> Result<TwoQubitUnitary> {
    if !theta.is_finite() {
        return Err(Error::input(format!("non-finite Heisenberg angle {theta}")));
    }
    let global = Complex64::from_polar(1.0, theta);
    let diag = global * (2.0 * theta).cos();
    let off = global * Complex64::new(0.0, -(2.0 * theta).sin());
    let edge = Complex64::from_polar(1.0, -theta);
    let z = Complex64::new(0.0, 0.0);
    Ok(TwoQubitUnitary::new_unchecked([
        [edge, z, z, z],
        [z, diag, off, z],
        [z, off, diag, z],
        [z, z, z, edge],
    ]))
}

/// A feature map of either kind.
#[derive(Debug, Clone, PartialEq)]
pub enum FeatureMap {
    Iqp(IqpFeatureMap),
    HamEvo(HamEvoFeatureMap),
}

impl FeatureMap {
    pub fn iqp(dim: usize, scaling: f64) -> Result<Self> {
        IqpFeatureMap::new(dim, scaling).map(FeatureMap::Iqp)
    }

    pub fn hamevo(dim: usize, time: f64, trotter_steps: usize, init_seed: u64) -> Result<Self> {
        HamEvoFeatureMap::new(dim, time, trotter_steps, init_seed).map(FeatureMap::HamEvo)
    }

    pub fn name(&self) -> &'static str {
        match self {
            FeatureMap::Iqp(_) => "iqp",
            FeatureMap::HamEvo(_) => "hamevo",
        }
    }

    /// Length of the input vectors.
    pub fn input_dim(&self) -> usize {
        match self {
            FeatureMap::Iqp(m) => m.dim,
            FeatureMap::HamEvo(m) => m.dim,
        }
    }

    pub fn n_qubits(&self) -> usize {
        match self {
            FeatureMap::Iqp(m) => m.dim,
            FeatureMap::HamEvo(m) => m.n_qubits(),
        }
    }

    /// `λ` for IQP, `t` for Hamiltonian evolution.
    pub fn scaling_factor(&self) -> f64 {
        match self {
            FeatureMap::Iqp(m) => m.scaling,
            FeatureMap::HamEvo(m) => m.time,
        }
    }

    pub fn embed(&self, x: &[f64]) -> Result<StateVector> {
        match self {
            FeatureMap::Iqp(m) => m.embed(x),
            FeatureMap::HamEvo(m) => m.embed(x),
        }
    }

    /// The scaled inputs the circuit actually consumes: `scaling_factor · x`.
    pub fn circuit_inputs(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_input(x, self.input_dim())?;
        let s = self.scaling_factor();
        Ok(x.iter().map(|v| s * v).collect())
    }

    /// Embeds inputs that already carry the scaling factor, i.e. the output
    /// of [`circuit_inputs`](Self::circuit_inputs), possibly post-processed
    /// (for example rounded to the control precision of a device).
    pub fn embed_circuit_inputs(&self, z: &[f64]) -> Result<StateVector> {
        check_input(z, self.input_dim())?;
        match self {
            FeatureMap::Iqp(m) => iqp_circuit(m.dim, &iqp_phase_table(z, 1.0)),
            FeatureMap::HamEvo(m) => {
                let steps = m.trotter_steps as f64;
                let angles: Vec<f64> = z.iter().map(|v| v / steps).collect();
                m.evolve(&angles)
            }
        }
    }
}

fn check_scaling(s: f64) -> Result<()> {
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::input(format!("scaling factor must be positive and finite, got {s}")));
    }
    Ok(())
}

fn check_input(x: &[f64], dim: usize) -> Result<()> {
    if x.len() != dim {
        return Err(Error::input(format!(
            "input has length {}, feature map expects {dim}",
            x.len()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("input contains non-finite values"));
    }
    Ok(())
}

#[cfg(test)]
pub(crate) mod oracle {
    //! Dense-matrix reference implementations, built from explicit Kronecker
    //! products. Shared with the kernel tests.

    use num_complex::Complex64;

    pub type Mat = Vec<Vec<Complex64>>;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    pub fn identity(n: usize) -> Mat {
        (0..n)
            .map(|i| (0..n).map(|j| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) }).collect())
            .collect()
    }

    pub fn kron(a: &Mat, b: &Mat) -> Mat {
        let (ra, ca, rb, cb) = (a.len(), a[0].len(), b.len(), b[0].len());
        let mut m = vec![vec![c(0.0, 0.0); ca * cb]; ra * rb];
        for i in 0..ra {
            for j in 0..ca {
                for k in 0..rb {
                    for l in 0..cb {
                        m[i * rb + k][j * cb + l] = a[i][j] * b[k][l];
                    }
                }
            }
        }
        m
    }

    pub fn matmul(a: &Mat, b: &Mat) -> Mat {
        let n = a.len();
        let m = b[0].len();
        let k = b.len();
        (0..n)
            .map(|i| (0..m).map(|j| (0..k).map(|l| a[i][l] * b[l][j]).sum()).collect())
            .collect()
    }

    pub fn matvec(a: &Mat, v: &[Complex64]) -> Vec<Complex64> {
        a.iter().map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum()).collect()
    }

    pub fn pauli_x() -> Mat {
        vec![vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]]
    }

    pub fn pauli_y() -> Mat {
        vec![vec![c(0.0, 0.0), c(0.0, -1.0)], vec![c(0.0, 1.0), c(0.0, 0.0)]]
    }

    pub fn pauli_z() -> Mat {
        vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(-1.0, 0.0)]]
    }

    pub fn hadamard() -> Mat {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        vec![vec![c(h, 0.0), c(h, 0.0)], vec![c(h, 0.0), c(-h, 0.0)]]
    }

    /// `op` acting on `qubit` of an `n`-qubit register (qubit 0 least
    /// significant, hence rightmost in the Kronecker chain).
    pub fn on_qubit(op: &Mat, qubit: usize, n: usize) -> Mat {
        let id = identity(2);
        let mut m = vec![vec![c(1.0, 0.0)]];
        for q in (0..n).rev() {
            m = kron(&m, if q == qubit { op } else { &id });
        }
        m
    }

    /// `exp(A)` by scaling and squaring with a Taylor series.
    pub fn expm(a: &Mat) -> Mat {
        let n = a.len();
        let norm: f64 = a.iter().map(|r| r.iter().map(|v| v.norm()).sum::<f64>()).fold(0.0, f64::max);
        let mut squarings = 0;
        let mut scale = 1.0;
        while norm * scale > 0.1 {
            scale /= 2.0;
            squarings += 1;
        }
        let scaled: Mat = a.iter().map(|r| r.iter().map(|v| v * scale).collect()).collect();
        let mut result = identity(n);
        let mut term = identity(n);
        for k in 1..30 {
            term = matmul(&term, &scaled);
            term.iter_mut().for_each(|r| r.iter_mut().for_each(|v| *v /= k as f64));
            for i in 0..n {
                for j in 0..n {
                    result[i][j] += term[i][j];
                }
            }
        }
        for _ in 0..squarings {
            result = matmul(&result, &result);
        }
        result
    }

    /// `XX + YY + ZZ` on qubits `(q, q+1)` of an `n`-qubit register.
    pub fn heisenberg_term(q: usize, n: usize) -> Mat {
        let mut h = vec![vec![c(0.0, 0.0); 1 << n]; 1 << n];
        for p in [pauli_x(), pauli_y(), pauli_z()] {
            let t = matmul(&on_qubit(&p, q, n), &on_qubit(&p, q + 1, n));
            for i in 0..h.len() {
                for j in 0..h.len() {
                    h[i][j] += t[i][j];
                }
            }
        }
        h
    }

    pub fn scale(a: &Mat, s: Complex64) -> Mat {
        a.iter().map(|r| r.iter().map(|v| v * s).collect()).collect()
    }

    /// Straight-line dense IQP embedding: diag · H⊗ · diag · H⊗ · |0⟩ with
    /// the diagonal built from a direct enumeration of the exponent.
    pub fn iqp_dense(x: &[f64], lambda: f64) -> Vec<Complex64> {
        let d = x.len();
        let dim = 1usize << d;
        let mut h = vec![vec![c(1.0, 0.0)]];
        for _ in 0..d {
            h = kron(&h, &hadamard());
        }
        // Build Σ λ x_j Z_j + Σ Σ λ² x_j x_j' Z_j Z_j' as a dense (diagonal) matrix.
        let mut gen = vec![vec![c(0.0, 0.0); dim]; dim];
        for j in 0..d {
            let zj = on_qubit(&pauli_z(), j, d);
            for jp in 0..d {
                let zjp = on_qubit(&pauli_z(), jp, d);
                let zz = matmul(&zj, &zjp);
                for i in 0..dim {
                    gen[i][i] += zz[i][i] * (lambda * lambda * x[j] * x[jp]);
                }
            }
            for i in 0..dim {
                gen[i][i] += zj[i][i] * (lambda * x[j]);
            }
        }
        let uz = expm(&scale(&gen, c(0.0, 1.0)));
        let mut v = vec![c(0.0, 0.0); dim];
        v[0] = c(1.0, 0.0);
        for m in [&h, &uz, &h, &uz] {
            v = matvec(m, &v);
        }
        v
    }

    /// Dense Trotterized Heisenberg evolution of `init`.
    pub fn hamevo_dense(init: &[Complex64], x: &[f64], t: f64, steps: usize) -> Vec<Complex64> {
        let n = x.len() + 1;
        let step_ops: Vec<Mat> = x
            .iter()
            .enumerate()
            .map(|(q, &xq)| expm(&scale(&heisenberg_term(q, n), c(0.0, -(t / steps as f64) * xq))))
            .collect();
        let mut v = init.to_vec();
        for _ in 0..steps {
            for op in &step_ops {
                v = matvec(op, &v);
            }
        }
        v
    }
}
