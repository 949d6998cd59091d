//! Dense reference computations for the acceptance suite. Nothing here calls
//! into the library except for plain data types.

use num_complex::Complex64;

pub type Mat = Vec<Vec<Complex64>>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(n: usize) -> Mat {
    (0..n)
        .map(|i| (0..n).map(|j| c(if i == j { 1.0 } else { 0.0 }, 0.0)).collect())
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
    (0..a.len())
        .map(|i| (0..b[0].len()).map(|j| (0..b.len()).map(|l| a[i][l] * b[l][j]).sum()).collect())
        .collect()
}

pub fn matvec(a: &Mat, v: &[Complex64]) -> Vec<Complex64> {
    a.iter().map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum()).collect()
}

fn add(a: &Mat, b: &Mat) -> Mat {
    a.iter().zip(b).map(|(r, s)| r.iter().zip(s).map(|(x, y)| x + y).collect()).collect()
}

pub fn scale(a: &Mat, s: Complex64) -> Mat {
    a.iter().map(|r| r.iter().map(|v| v * s).collect()).collect()
}

pub fn pauli(which: char) -> Mat {
    let (o, l, i) = (c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0));
    match which {
        'x' => vec![vec![o, l], vec![l, o]],
        'y' => vec![vec![o, -i], vec![i, o]],
        'z' => vec![vec![l, o], vec![o, -l]],
        _ => unreachable!(),
    }
}

pub fn hadamard() -> Mat {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    vec![vec![c(h, 0.0), c(h, 0.0)], vec![c(h, 0.0), c(-h, 0.0)]]
}

/// `op` on `qubit` of `n` qubits; qubit 0 is the least significant bit and
/// so the rightmost Kronecker factor.
pub fn on_qubit(op: &Mat, qubit: usize, n: usize) -> Mat {
    let id = identity(2);
    let mut m = vec![vec![c(1.0, 0.0)]];
    for q in (0..n).rev() {
        m = kron(&m, if q == qubit { op } else { &id });
    }
    m
}

/// `exp(A)` by scaling and squaring around a 30-term Taylor series.
pub fn expm(a: &Mat) -> Mat {
    let n = a.len();
    let norm: f64 = a.iter().map(|r| r.iter().map(|v| v.norm()).sum::<f64>()).fold(0.0, f64::max);
    let mut squarings = 0;
    let mut s = 1.0;
    while norm * s > 0.1 {
        s /= 2.0;
        squarings += 1;
    }
    let scaled = scale(a, c(s, 0.0));
    let mut result = identity(n);
    let mut term = identity(n);
    for k in 1..30 {
        term = scale(&matmul(&term, &scaled), c(1.0 / k as f64, 0.0));
        result = add(&result, &term);
    }
    for _ in 0..squarings {
        result = matmul(&result, &result);
    }
    result
}

/// `XX + YY + ZZ` on qubits `q`, `q + 1` of `n`.
pub fn heisenberg_term(q: usize, n: usize) -> Mat {
    let mut h = vec![vec![c(0.0, 0.0); 1 << n]; 1 << n];
    for p in ['x', 'y', 'z'] {
        h = add(&h, &matmul(&on_qubit(&pauli(p), q, n), &on_qubit(&pauli(p), q + 1, n)));
    }
    h
}

/// Product state from per-qubit amplitudes `(a0, a1)`, qubit 0 rightmost.
pub fn product_state(factors: &[(Complex64, Complex64)]) -> Vec<Complex64> {
    let mut v = vec![vec![c(1.0, 0.0)]];
    for &(a0, a1) in factors.iter().rev() {
        v = kron(&v, &vec![vec![a0], vec![a1]]);
    }
    v.into_iter().map(|r| r[0]).collect()
}

/// `Π_steps Π_q exp(−i (t/T) x_q H_q)` applied to `init`.
pub fn hamevo_dense(init: &[Complex64], x: &[f64], t: f64, steps: usize) -> Vec<Complex64> {
    let n = x.len() + 1;
    let ops: Vec<Mat> = x
        .iter()
        .enumerate()
        .map(|(q, &xq)| expm(&scale(&heisenberg_term(q, n), c(0.0, -(t / steps as f64) * xq))))
        .collect();
    let mut v = init.to_vec();
    for _ in 0..steps {
        for op in &ops {
            v = matvec(op, &v);
        }
    }
    v
}

/// `U_Z H U_Z H |0⟩` with `U_Z = exp(i Σ_j λx_j Z_j + i Σ_jj' λ²x_j x_j' Z_j Z_j')`
/// assembled from dense Pauli-Z matrices.
pub fn iqp_dense(x: &[f64], lambda: f64) -> Vec<Complex64> {
    let d = x.len();
    let dim = 1usize << d;
    let mut h = vec![vec![c(1.0, 0.0)]];
    for _ in 0..d {
        h = kron(&h, &hadamard());
    }
    let z: Vec<Mat> = (0..d).map(|j| on_qubit(&pauli('z'), j, d)).collect();
    let mut gen = vec![vec![c(0.0, 0.0); dim]; dim];
    for j in 0..d {
        gen = add(&gen, &scale(&z[j], c(lambda * x[j], 0.0)));
        for jp in 0..d {
            gen = add(&gen, &scale(&matmul(&z[j], &z[jp]), c(lambda * lambda * x[j] * x[jp], 0.0)));
        }
    }
    // The generator is diagonal, so its exponential is taken entrywise.
    let mut uz = vec![vec![c(0.0, 0.0); dim]; dim];
    for i in 0..dim {
        uz[i][i] = (c(0.0, 1.0) * gen[i][i]).exp();
    }
    let mut v = vec![c(0.0, 0.0); dim];
    v[0] = c(1.0, 0.0);
    for m in [&h, &uz, &h, &uz] {
        v = matvec(m, &v);
    }
    v
}

/// Cyclic Jacobi eigendecomposition of a real symmetric matrix. Returns the
/// eigenvalues and the eigenvectors as columns of `v`.
pub fn jacobi_eigen(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut a = a.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|(i, j)| i != j)
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = cs * akp - sn * akq;
                    a[k][q] = sn * akp + cs * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = cs * apk - sn * aqk;
                    a[q][k] = sn * apk + cs * aqk;
                }
                for row in v.iter_mut() {
                    let (vkp, vkq) = (row[p], row[q]);
                    row[p] = cs * vkp - sn * vkq;
                    row[q] = sn * vkp + cs * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| a[i][i]).collect(), v)
}

/// Maximizes `Σα − ½ αᵀQα` over `{0 ≤ α ≤ C, yᵀα = 0}` by accelerated
/// projected gradient; the projection bisects on the equality multiplier.
pub fn svc_dual_projected_gradient(k: &[Vec<f64>], y: &[f64], c: f64, iters: usize) -> Vec<f64> {
    let n = y.len();
    let q: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| y[i] * y[j] * k[i][j]).collect()).collect();
    let lip = q.iter().flatten().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
    let project = |v: &[f64]| -> Vec<f64> {
        let at = |mu: f64| -> Vec<f64> { v.iter().zip(y).map(|(vi, yi)| (vi - mu * yi).clamp(0.0, c)).collect() };
        let (mut lo, mut hi) = (-1e6, 1e6);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let s: f64 = at(mid).iter().zip(y).map(|(a, yi)| a * yi).sum();
            if s > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        at(0.5 * (lo + hi))
    };
    let mut a = vec![0.0; n];
    let mut z = a.clone();
    let mut t = 1.0f64;
    for _ in 0..iters {
        let step: Vec<f64> = (0..n)
            .map(|i| z[i] + (1.0 - (0..n).map(|j| q[i][j] * z[j]).sum::<f64>()) / lip)
            .collect();
        let next = project(&step);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        z = next.iter().zip(&a).map(|(x, xp)| x + (t - 1.0) / t_next * (x - xp)).collect();
        a = next;
        t = t_next;
    }
    a
}

pub fn svc_dual_objective(k: &[Vec<f64>], y: &[f64], alpha: &[f64]) -> f64 {
    let n = y.len();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += alpha[i] * alpha[j] * y[i] * y[j] * k[i][j];
        }
    }
    alpha.iter().sum::<f64>() - 0.5 * quad
}
