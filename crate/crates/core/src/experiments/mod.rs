//! Experiment sweeps: bandwidth, dimension, shot noise and input precision.
//!
//! A run loads one dataset, prepares one train/test sample per dimension and
//! evaluates a grid of cells `(dim, scaling, haar_seed)`. Cells run in
//! parallel; rows come back in grid order. A cell that exceeds the qubit,
//! memory or time limits becomes a row with a `skipped-*` status instead of
//! aborting the run.

mod config;
mod output;

use std::time::Instant;

use sha2::{Digest, Sha256};

pub use config::{parse_pairs, CSelection, DatasetSpec, ExperimentConfig, MapKind, Precision, Scaling};
pub use output::{emit_outputs, results_csv, RESULTS_COLUMNS};

use crate::data::{load_csv, load_idx, preprocess, split_indices, synthetic_two_class, Dataset, PreprocessOptions};
use crate::error::{Error, Result};
use crate::feature_maps::FeatureMap;
use crate::kernels::{
    embed_all, embed_all_circuit_inputs, gram_from_states, inject_noise, median_offdiag, nearest_psd, offdiag_std,
    rbf_gram, round_inputs, shot_sigma_from_gram, GramMatrix, KernelOptions, ShotNoiseConfig,
};
use crate::matrix::Matrix;
use crate::par::{self, Parallelism};
use crate::svm::{
    balanced_accuracy, rbf_gamma_scale, select_c_by_cv, select_c_by_train_score, training_score, CGrid,
    LabeledKernelProblem,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Study {
    Bandwidth,
    Qubit,
    Noise,
    Precision,
}

impl Study {
    pub fn name(self) -> &'static str {
        match self {
            Study::Bandwidth => "bandwidth-sweep",
            Study::Qubit => "qubit-sweep",
            Study::Noise => "noise-study",
            Study::Precision => "precision-study",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellStatus {
    Ok,
    SkippedCapacity,
    SkippedBudget,
    Error,
}

impl CellStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            CellStatus::Ok => "ok",
            CellStatus::SkippedCapacity => "skipped-capacity",
            CellStatus::SkippedBudget => "skipped-budget",
            CellStatus::Error => "error",
        }
    }

    pub fn is_skip(self) -> bool {
        matches!(self, CellStatus::SkippedCapacity | CellStatus::SkippedBudget)
    }
}

/// Which kernel a row was scored on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Exact,
    /// Shot noise injected, then repaired to the nearest PSD matrix.
    Noisy,
    /// Circuit inputs rounded to a fixed number of decimals.
    Rounded,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Exact => "exact",
            Variant::Noisy => "noisy",
            Variant::Rounded => "rounded",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub dataset: String,
    pub feature_map: &'static str,
    pub n_qubits: Option<usize>,
    pub dim: usize,
    pub scaling_factor: f64,
    pub trotter_steps: Option<usize>,
    pub haar_seed: Option<u64>,
    pub variant: Variant,
    pub decimals: Precision,
    pub noise_sigma: f64,
    pub c_selected: Option<f64>,
    pub train_bacc: Option<f64>,
    pub test_bacc: Option<f64>,
    pub median_offdiag: Option<f64>,
    pub offdiag_std: Option<f64>,
    pub n_support_vectors: Option<usize>,
    /// Per class, `(negatives, positives)`.
    pub n_support_per_class: Option<(usize, usize)>,
    pub status: CellStatus,
    pub note: String,
    pub gram_checksum: Option<String>,
    pub wall_time_s: f64,
}

/// Train/test sample reduced to one dimension; training rows come first.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedData {
    pub dim: usize,
    pub data: Dataset,
    pub n_train: usize,
}

impl PreparedData {
    pub fn train_indices(&self) -> Vec<usize> {
        (0..self.n_train).collect()
    }

    pub fn test_indices(&self) -> Vec<usize> {
        (self.n_train..self.data.len()).collect()
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub study: Study,
    pub rows: Vec<ResultRow>,
    pub prepared: Vec<PreparedData>,
    /// SHA-256 of the loaded dataset in cache encoding.
    pub input_checksum: String,
}

impl RunOutput {
    pub fn n_skipped(&self) -> usize {
        self.rows.iter().filter(|r| r.status.is_skip()).count()
    }

    pub fn n_errors(&self) -> usize {
        self.rows.iter().filter(|r| r.status == CellStatus::Error).count()
    }
}

pub fn load_dataset(cfg: &ExperimentConfig) -> Result<Dataset> {
    match &cfg.dataset {
        DatasetSpec::Synthetic { n, dim, separation } => synthetic_two_class(*n, *dim, *separation, cfg.seed),
        DatasetSpec::Idx {
            images,
            labels,
            class_a,
            class_b,
        } => load_idx(images, labels, *class_a, *class_b),
        DatasetSpec::Csv { path, label_column } => load_csv(path, label_column),
    }
}

/// Seeded stratified train/test sample, standardized and reduced to `dim`.
pub fn prepare(ds: &Dataset, cfg: &ExperimentConfig, dim: usize) -> Result<PreparedData> {
    let (train, test) = split_indices(&ds.y, cfg.n_train, cfg.n_test, cfg.seed)?;
    let pool: Vec<usize> = train.iter().chain(&test).copied().collect();
    let sample = ds.select(&pool);
    let opts = PreprocessOptions {
        dim,
        restandardize: cfg.restandardize,
        pca_fit: cfg.pca_fit,
    };
    let train_rows: Vec<usize> = (0..train.len()).collect();
    let x = preprocess(&sample.x, &train_rows, &opts)?;
    Ok(PreparedData {
        dim,
        data: Dataset::new(ds.name.clone(), x, sample.y)?,
        n_train: train.len(),
    })
}

pub fn run_bandwidth_sweep(cfg: &ExperimentConfig, parallelism: Parallelism) -> Result<RunOutput> {
    run_study(cfg, Study::Bandwidth, parallelism)
}

pub fn run_qubit_sweep(cfg: &ExperimentConfig, parallelism: Parallelism) -> Result<RunOutput> {
    run_study(cfg, Study::Qubit, parallelism)
}

pub fn run_noise_study(cfg: &ExperimentConfig, parallelism: Parallelism) -> Result<RunOutput> {
    run_study(cfg, Study::Noise, parallelism)
}

pub fn run_precision_study(cfg: &ExperimentConfig, parallelism: Parallelism) -> Result<RunOutput> {
    run_study(cfg, Study::Precision, parallelism)
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    dim_index: usize,
    scale_index: usize,
    haar_seed: Option<u64>,
}

pub fn run_study(cfg: &ExperimentConfig, study: Study, parallelism: Parallelism) -> Result<RunOutput> {
    cfg.validate()?;
    CGrid::new(cfg.c_grid.clone()).map_err(|e| Error::Config(e.to_string()))?;
    let ds = load_dataset(cfg)?;
    let input_checksum = hex::encode(Sha256::digest(ds.to_cache_bytes()));
    let prepared: Vec<Result<PreparedData>> = cfg.dims.iter().map(|&d| prepare(&ds, cfg, d)).collect();

    let seeds: Vec<Option<u64>> = match cfg.feature_map {
        MapKind::HamEvo => cfg.haar_seeds.iter().copied().map(Some).collect(),
        MapKind::Iqp | MapKind::Rbf => vec![None],
    };
    let mut cells = Vec::new();
    for dim_index in 0..cfg.dims.len() {
        for scale_index in 0..cfg.scaling.len() {
            for &haar_seed in &seeds {
                cells.push(Cell {
                    dim_index,
                    scale_index,
                    haar_seed,
                });
            }
        }
    }

    let kopts = KernelOptions {
        max_qubits: cfg.max_qubits,
        memory_budget_bytes: cfg.memory_budget_bytes,
        parallelism,
    };
    let per_cell = par::map_collect(cells.len(), parallelism, |i| {
        let cell = cells[i];
        let dim = cfg.dims[cell.dim_index];
        let template = row_template(&ds.name, cfg, cell, dim);
        match &prepared[cell.dim_index] {
            Ok(data) => run_cell(cfg, study, data, template, cell, &kopts),
            Err(e) => vec![failed(template, e)],
        }
    });
    Ok(RunOutput {
        study,
        rows: per_cell.into_iter().flatten().collect(),
        prepared: prepared.into_iter().filter_map(Result::ok).collect(),
        input_checksum,
    })
}

fn row_template(dataset: &str, cfg: &ExperimentConfig, cell: Cell, dim: usize) -> ResultRow {
    ResultRow {
        dataset: dataset.to_owned(),
        feature_map: cfg.feature_map.name(),
        n_qubits: cfg.feature_map.n_qubits(dim),
        dim,
        scaling_factor: cfg.scaling[cell.scale_index].resolve(dim),
        trotter_steps: (cfg.feature_map == MapKind::HamEvo).then_some(cfg.trotter_steps),
        haar_seed: cell.haar_seed,
        variant: Variant::Exact,
        decimals: Precision::Full,
        noise_sigma: 0.0,
        c_selected: None,
        train_bacc: None,
        test_bacc: None,
        median_offdiag: None,
        offdiag_std: None,
        n_support_vectors: None,
        n_support_per_class: None,
        status: CellStatus::Ok,
        note: String::new(),
        gram_checksum: None,
        wall_time_s: 0.0,
    }
}

fn failed(mut row: ResultRow, e: &Error) -> ResultRow {
    row.status = match e {
        Error::Capacity(_) => CellStatus::SkippedCapacity,
        _ => CellStatus::Error,
    };
    row.note = e.to_string();
    row
}

/// Decorrelates the RNG streams of different cells.
fn cell_seed(master: u64, cell: Cell) -> u64 {
    let mut z = master
        ^ (cell.dim_index as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)
        ^ (cell.scale_index as u64).wrapping_mul(0xbf58_476d_1ce4_e5b9)
        ^ cell.haar_seed.unwrap_or(u64::MAX).wrapping_mul(0x94d0_49bb_1331_11eb);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Rough operation count for embedding and kernel assembly.
fn estimated_seconds(cfg: &ExperimentConfig, n_states: usize, dim: usize) -> f64 {
    let n = n_states as f64;
    let pairs = n * (n + 1.0) / 2.0;
    let ops = match cfg.feature_map.n_qubits(dim) {
        Some(q) => {
            let amps = (q as f64).exp2();
            let per_state = match cfg.feature_map {
                MapKind::HamEvo => (cfg.trotter_steps * dim) as f64 * amps,
                _ => 4.0 * amps * q as f64,
            };
            n * per_state + pairs * amps
        }
        None => pairs * dim as f64,
    };
    ops / cfg.ops_per_second
}

fn run_cell(
    cfg: &ExperimentConfig,
    study: Study,
    data: &PreparedData,
    template: ResultRow,
    cell: Cell,
    kopts: &KernelOptions,
) -> Vec<ResultRow> {
    let n_states = data.data.len();
    if let Some(q) = template.n_qubits {
        if let Err(e) = kopts.check_capacity(n_states, q) {
            return vec![failed(template, &e)];
        }
    }
    if let Some(budget) = cfg.time_budget_s {
        let estimate = estimated_seconds(cfg, n_states, data.dim);
        if estimate > budget {
            let mut row = template;
            row.status = CellStatus::SkippedBudget;
            row.note = format!("estimated {estimate:.1} s exceeds budget {budget} s");
            return vec![row];
        }
    }
    let attempt = || -> Result<Vec<ResultRow>> {
        let map = build_map(cfg, &template, data.dim, cell)?;
        match study {
            Study::Bandwidth | Study::Qubit => {
                let start = Instant::now();
                let gram = cell_gram(data, map.as_ref(), template.scaling_factor, Precision::Full, kopts)?;
                Ok(vec![scored(cfg, data, &gram, template.clone(), start)?])
            }
            Study::Noise => {
                let start = Instant::now();
                let gram = cell_gram(data, map.as_ref(), template.scaling_factor, Precision::Full, kopts)?;
                let exact = scored(cfg, data, &gram, template.clone(), start)?;
                let start = Instant::now();
                let mut noisy_row = ResultRow {
                    variant: Variant::Noisy,
                    ..template.clone()
                };
                let noisy = if cfg.noise_shots == 0 {
                    gram.clone()
                } else {
                    let seed = cell_seed(cfg.seed, cell);
                    let probe: Vec<usize> = (0..cfg.noise_probe.min(data.n_train)).collect();
                    let noise_cfg = ShotNoiseConfig {
                        shots: cfg.noise_shots,
                        probe_size: probe.len(),
                        repeats: cfg.noise_repeats,
                        rng_seed: seed,
                    };
                    let sigma = shot_sigma_from_gram(&gram.submatrix(&probe), &noise_cfg)?;
                    noisy_row.noise_sigma = sigma;
                    nearest_psd(&inject_noise(&gram, sigma, seed.wrapping_add(1))?)?
                };
                Ok(vec![exact, scored(cfg, data, &noisy, noisy_row, start)?])
            }
            Study::Precision => cfg
                .decimals
                .iter()
                .map(|&p| {
                    let start = Instant::now();
                    let gram = cell_gram(data, map.as_ref(), template.scaling_factor, p, kopts)?;
                    let row = ResultRow {
                        variant: if p == Precision::Full { Variant::Exact } else { Variant::Rounded },
                        decimals: p,
                        ..template.clone()
                    };
                    scored(cfg, data, &gram, row, start)
                })
                .collect(),
        }
    };
    attempt().unwrap_or_else(|e| vec![failed(template.clone(), &e)])
}

fn build_map(cfg: &ExperimentConfig, row: &ResultRow, dim: usize, cell: Cell) -> Result<Option<FeatureMap>> {
    match cfg.feature_map {
        MapKind::Iqp => FeatureMap::iqp(dim, row.scaling_factor).map(Some),
        MapKind::HamEvo => FeatureMap::hamevo(
            dim,
            row.scaling_factor,
            cfg.trotter_steps,
            cell.haar_seed.expect("Hamiltonian cells carry a seed"),
        )
        .map(Some),
        MapKind::Rbf => Ok(None),
    }
}

/// Symmetric kernel over all train and test rows.
///
/// For the quantum maps a finite precision rounds the circuit inputs
/// `scaling · x`; full precision embeds `x` directly. For the Gaussian kernel
/// the features are rounded and `γ = scaling / (N · Var[x_train])`.
pub fn cell_gram(
    data: &PreparedData,
    map: Option<&FeatureMap>,
    scaling: f64,
    precision: Precision,
    kopts: &KernelOptions,
) -> Result<GramMatrix> {
    let x = &data.data.x;
    match map {
        Some(map) => {
            let states = match precision {
                Precision::Full => embed_all(map, x, kopts)?,
                Precision::Decimals(d) => {
                    let rows: Vec<Vec<f64>> =
                        x.iter_rows().map(|r| map.circuit_inputs(r)).collect::<Result<_>>()?;
                    let z = round_inputs(&Matrix::from_rows(&rows)?, d);
                    embed_all_circuit_inputs(map, &z, kopts)?
                }
            };
            gram_from_states(&states, kopts.parallelism)
        }
        None => {
            let gamma = scaling * rbf_gamma_scale(&x.select_rows(&data.train_indices()))?;
            let x = match precision {
                Precision::Full => x.clone(),
                Precision::Decimals(d) => round_inputs(x, d),
            };
            rbf_gram(&x, gamma)
        }
    }
}

/// Outcome of model selection and evaluation on one kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub c: f64,
    pub train_bacc: f64,
    pub test_bacc: f64,
    pub n_support: usize,
    pub n_support_per_class: (usize, usize),
    pub median_offdiag: f64,
    pub offdiag_std: f64,
}

/// Selects `C`, trains on the training block and scores both blocks.
pub fn evaluate(cfg: &ExperimentConfig, data: &PreparedData, gram: &GramMatrix) -> Result<Evaluation> {
    let (train, test) = (data.train_indices(), data.test_indices());
    let y = &data.data.y;
    let problem = LabeledKernelProblem::new(gram.submatrix(&train), y[..data.n_train].to_vec())?;
    let grid = CGrid::new(cfg.c_grid.clone())?;
    let (c, model) = match cfg.c_selection {
        CSelection::Cv => {
            let sel = select_c_by_cv(&problem, &grid, cfg.folds, cfg.seed)?;
            (sel.c, sel.model)
        }
        CSelection::TrainScore => select_c_by_train_score(&problem, &grid)?,
    };
    let train_bacc = training_score(&model, &problem)?;
    let pred = model.predict(&gram.cross_block(&test, &train))?;
    let test_bacc = balanced_accuracy(&pred, &y[data.n_train..])?;
    Ok(Evaluation {
        c,
        train_bacc,
        test_bacc,
        n_support: model.n_support(),
        n_support_per_class: model.n_support_per_class(),
        median_offdiag: median_offdiag(problem.kernel())?,
        offdiag_std: offdiag_std(problem.kernel())?,
    })
}

fn scored(
    cfg: &ExperimentConfig,
    data: &PreparedData,
    gram: &GramMatrix,
    mut row: ResultRow,
    start: Instant,
) -> Result<ResultRow> {
    let ev = evaluate(cfg, data, gram)?;
    row.c_selected = Some(ev.c);
    row.train_bacc = Some(ev.train_bacc);
    row.test_bacc = Some(ev.test_bacc);
    row.median_offdiag = Some(ev.median_offdiag);
    row.offdiag_std = Some(ev.offdiag_std);
    row.n_support_vectors = Some(ev.n_support);
    row.n_support_per_class = Some(ev.n_support_per_class);
    row.gram_checksum = Some(gram.checksum());
    row.wall_time_s = start.elapsed().as_secs_f64();
    Ok(row)
}

/// Least-squares line through `(xs, ys)`; returns `(slope, r²)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, r2)
}
