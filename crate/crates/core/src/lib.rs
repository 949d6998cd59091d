//! Fidelity quantum kernels computed by exact statevector simulation.
//!
//! The crate covers the whole pipeline of a kernel-bandwidth study:
//!
//! * [`statevector`]: dense complex amplitudes and the handful of gates the
//!   feature maps need.
//! * [`feature_maps`]: the IQP-style diagonal embedding and the Trotterized
//!   Heisenberg-chain embedding, both controlled by a scaling factor.
//! * [`kernels`]: Gram matrices, the classical RBF baseline, shot-noise and
//!   finite-precision models, nearest-PSD repair.
//! * [`svm`]: a working-set dual SVC solver on precomputed kernels, penalty
//!   selection, balanced accuracy.
//! * [`data`]: IDX/CSV ingestion, standardization, PCA, stratified splits and
//!   a synthetic generator.
//! * [`experiments`]: config-driven sweeps with reproducible outputs.
//!
//! Qubit `j` (zero-based) is bit `j` of a basis-state index, least
//! significant first. Every module uses this convention.

pub mod data;
pub mod error;
pub mod experiments;
pub mod feature_maps;
pub mod kernels;
pub mod matrix;
pub mod par;
pub mod statevector;
pub mod svm;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use par::Parallelism;
