//! Run artifacts.
//!
//! | file | content |
//! |------|---------|
//! | `results.csv` | one row per cell and variant, fixed column order |
//! | `grams.csv` | SHA-256 of each scored Gram matrix |
//! | `timings.csv` | wall-clock seconds per row |
//! | `manifest.json` | resolved config, seeds, versions, input checksums |
//! | `data/dim<d>.qkds` | the prepared sample for each dimension |
//!
//! Everything except `timings.csv` is a pure function of the config, so a
//! rerun from the manifest reproduces it byte for byte.

use std::path::Path;

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use super::{ExperimentConfig, ResultRow, RunOutput};
use crate::error::{Error, Result};

pub const RESULTS_COLUMNS: [&str; 20] = [
    "dataset",
    "feature_map",
    "n_qubits",
    "dim",
    "scaling_factor",
    "trotter_steps",
    "haar_seed",
    "variant",
    "decimals",
    "noise_sigma",
    "c_selected",
    "train_bacc",
    "test_bacc",
    "median_offdiag",
    "offdiag_std",
    "n_support_vectors",
    "n_support_neg",
    "n_support_pos",
    "status",
    "note",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn record(r: &ResultRow) -> Vec<String> {
    vec![
        r.dataset.clone(),
        r.feature_map.to_owned(),
        opt(r.n_qubits),
        r.dim.to_string(),
        r.scaling_factor.to_string(),
        opt(r.trotter_steps),
        opt(r.haar_seed),
        r.variant.as_str().to_owned(),
        r.decimals.to_string(),
        r.noise_sigma.to_string(),
        opt(r.c_selected),
        opt(r.train_bacc),
        opt(r.test_bacc),
        opt(r.median_offdiag),
        opt(r.offdiag_std),
        opt(r.n_support_vectors),
        opt(r.n_support_per_class.map(|p| p.0)),
        opt(r.n_support_per_class.map(|p| p.1)),
        r.status.as_str().to_owned(),
        r.note.clone(),
    ]
}

fn to_csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("writing to memory");
    for row in rows {
        w.write_record(&row).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("utf-8 input")
}

/// `results.csv` content; header only when `rows` is empty.
pub fn results_csv(rows: &[ResultRow]) -> String {
    to_csv(&RESULTS_COLUMNS, rows.iter().map(record))
}

fn write(path: &Path, content: &[u8]) -> Result<()> {
    std::fs::write(path, content).map_err(|e| Error::io(path, e))
}

/// Writes all artifacts of `run` into `dir`, creating it if needed.
pub fn emit_outputs(dir: &Path, cfg: &ExperimentConfig, run: &RunOutput) -> Result<()> {
    std::fs::create_dir_all(dir.join("data")).map_err(|e| Error::io(dir, e))?;

    let results = results_csv(&run.rows);
    write(&dir.join("results.csv"), results.as_bytes())?;

    let grams = to_csv(
        &["row", "dim", "scaling_factor", "haar_seed", "variant", "decimals", "sha256"],
        run.rows.iter().enumerate().map(|(i, r)| {
            vec![
                i.to_string(),
                r.dim.to_string(),
                r.scaling_factor.to_string(),
                opt(r.haar_seed),
                r.variant.as_str().to_owned(),
                r.decimals.to_string(),
                r.gram_checksum.clone().unwrap_or_default(),
            ]
        }),
    );
    write(&dir.join("grams.csv"), grams.as_bytes())?;

    let timings = to_csv(
        &["row", "wall_time_s"],
        run.rows
            .iter()
            .enumerate()
            .map(|(i, r)| vec![i.to_string(), format!("{:.6}", r.wall_time_s)]),
    );
    write(&dir.join("timings.csv"), timings.as_bytes())?;

    let mut prepared = Vec::new();
    for p in &run.prepared {
        let bytes = p.data.to_cache_bytes();
        let name = format!("data/dim{}.qkds", p.dim);
        write(&dir.join(&name), &bytes)?;
        prepared.push(json!({
            "dim": p.dim,
            "file": name,
            "n_train": p.n_train,
            "n_test": p.data.len() - p.n_train,
            "sha256": hex::encode(Sha256::digest(&bytes)),
        }));
    }

    let config: Map<String, Value> = cfg
        .to_pairs()
        .into_iter()
        .map(|(k, v)| (k.to_owned(), Value::String(v)))
        .collect();
    let manifest = json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "study": run.study.name(),
        "config": config,
        "seeds": {
            "master": cfg.seed,
            "haar": cfg.haar_seeds,
        },
        "standardization_divisor": "n",
        "input_sha256": run.input_checksum,
        "prepared": prepared,
        "results_sha256": hex::encode(Sha256::digest(results.as_bytes())),
        "rows": run.rows.len(),
        "skipped": run.n_skipped(),
        "errors": run.n_errors(),
    });
    let text = serde_json::to_string_pretty(&manifest).expect("JSON values serialize") + "\n";
    write(&dir.join("manifest.json"), text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{run_bandwidth_sweep, Study};
    use crate::par::Parallelism;

    fn cfg(extra: &str) -> ExperimentConfig {
        crate::experiments::tests::with_overrides(
            "synthetic_n = 40\nsynthetic_dim = 3\nn_train = 20\nn_test = 10\nfolds = 2\nc_grid = [1]\n\
             dims = [2]\nfeature_map = iqp\nscaling = [0.3, 2]\n",
            extra,
        )
    }

    #[test]
    fn empty_run_is_header_only() {
        let csv = results_csv(&[]);
        assert_eq!(csv, RESULTS_COLUMNS.join(",") + "\n");
    }

    #[test]
    fn rerun_from_manifest_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let c = cfg("");
        let run = run_bandwidth_sweep(&c, Parallelism::default()).unwrap();
        let (a, b) = (dir.path().join("a"), dir.path().join("b"));
        emit_outputs(&a, &c, &run).unwrap();
        let again = ExperimentConfig::load(a.join("manifest.json")).unwrap();
        assert_eq!(again, c);
        let rerun = run_bandwidth_sweep(&again, Parallelism::Sequential).unwrap();
        emit_outputs(&b, &again, &rerun).unwrap();
        for f in ["results.csv", "grams.csv", "manifest.json", "data/dim2.qkds"] {
            assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
        }
        let results = std::fs::read_to_string(a.join("results.csv")).unwrap();
        assert_eq!(results.lines().count(), 3);
    }

    #[test]
    fn input_checksum_tracks_inputs() {
        let run = |extra: &str| {
            let c = cfg(extra);
            crate::experiments::run_study(&c, Study::Bandwidth, Parallelism::default()).unwrap()
        };
        let base = run("");
        assert_eq!(base.input_checksum, run("").input_checksum);
        assert_ne!(base.input_checksum, run("seed = 1").input_checksum);
        assert_ne!(base.input_checksum, run("synthetic_separation = 1").input_checksum);
        // Grid changes leave the input alone but change the Gram checksums.
        let other = run("scaling = [0.4, 2]");
        assert_eq!(base.input_checksum, other.input_checksum);
        assert_ne!(base.rows[0].gram_checksum, other.rows[0].gram_checksum);
        assert_eq!(base.rows[1].gram_checksum, other.rows[1].gram_checksum);
    }
}
