//! Flat `key = value` configuration.
//!
//! Lines starting with `#` are comments. Lists use `[a, b, c]`. Unknown or
//! repeated keys are rejected. [`ExperimentConfig::to_text`] writes every key
//! with defaults expanded, and parsing that text yields the same config.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::data::PcaFit;
use crate::error::{Error, Result};
use crate::svm::DEFAULT_C_GRID;

#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSpec {
    Synthetic { n: usize, dim: usize, separation: f64 },
    Idx { images: PathBuf, labels: PathBuf, class_a: u8, class_b: u8 },
    Csv { path: PathBuf, label_column: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapKind {
    Iqp,
    HamEvo,
    /// Classical Gaussian kernel; the scaling factor multiplies the default
    /// bandwidth `1 / (N · Var[x])`.
    Rbf,
}

impl MapKind {
    pub fn name(self) -> &'static str {
        match self {
            MapKind::Iqp => "iqp",
            MapKind::HamEvo => "hamevo",
            MapKind::Rbf => "rbf",
        }
    }

    /// `None` for the classical kernel.
    pub fn n_qubits(self, dim: usize) -> Option<usize> {
        match self {
            MapKind::Iqp => Some(dim),
            MapKind::HamEvo => Some(dim + 1),
            MapKind::Rbf => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CSelection {
    Cv,
    TrainScore,
}

/// A scaling-grid entry: a constant, or `d/k` evaluated per input dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scaling {
    Fixed(f64),
    DimOver(f64),
}

impl Scaling {
    pub fn resolve(self, dim: usize) -> f64 {
        match self {
            Scaling::Fixed(v) => v,
            Scaling::DimOver(k) => dim as f64 / k,
        }
    }
}

impl fmt::Display for Scaling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scaling::Fixed(v) => write!(f, "{v}"),
            Scaling::DimOver(k) => write!(f, "d/{k}"),
        }
    }
}

impl FromStr for Scaling {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parsed = match s.strip_prefix("d/") {
            Some(k) => k.trim().parse().map(Scaling::DimOver),
            None => s.parse().map(Scaling::Fixed),
        };
        match parsed {
            Ok(scaling @ (Scaling::Fixed(v) | Scaling::DimOver(v))) if v.is_finite() && v > 0.0 => Ok(scaling),
            _ => Err(format!("'{s}' is not a positive number or d/k")),
        }
    }
}

/// Rounding level for the precision study.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    Decimals(u32),
    Full,
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Precision::Decimals(d) => write!(f, "{d}"),
            Precision::Full => f.write_str("full"),
        }
    }
}

impl FromStr for Precision {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "full" {
            return Ok(Precision::Full);
        }
        s.parse()
            .map(Precision::Decimals)
            .map_err(|_| format!("'{s}' is neither a decimal count nor 'full'"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dataset: DatasetSpec,
    pub feature_map: MapKind,
    pub dims: Vec<usize>,
    pub scaling: Vec<Scaling>,
    pub trotter_steps: usize,
    /// Only the Hamiltonian-evolution map draws a random initial state.
    pub haar_seeds: Vec<u64>,
    pub c_selection: CSelection,
    pub c_grid: Vec<f64>,
    pub folds: usize,
    pub n_train: usize,
    pub n_test: usize,
    /// `0` disables noise; the noisy rows then repeat the exact kernel.
    pub noise_shots: u64,
    pub noise_probe: usize,
    pub noise_repeats: usize,
    pub decimals: Vec<Precision>,
    pub restandardize: bool,
    pub pca_fit: PcaFit,
    pub seed: u64,
    pub max_qubits: usize,
    pub memory_budget_bytes: u64,
    pub time_budget_s: Option<f64>,
    /// Throughput assumed by the time-budget estimate.
    pub ops_per_second: f64,
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dataset: DatasetSpec::Synthetic {
                n: 1000,
                dim: 10,
                separation: 2.5,
            },
            feature_map: MapKind::HamEvo,
            dims: vec![10],
            scaling: vec![Scaling::Fixed(0.05), Scaling::DimOver(3.0)],
            trotter_steps: 40,
            haar_seeds: (0..5).collect(),
            c_selection: CSelection::Cv,
            c_grid: DEFAULT_C_GRID.to_vec(),
            folds: 5,
            n_train: 800,
            n_test: 200,
            noise_shots: 5000,
            noise_probe: 5,
            noise_repeats: 10,
            decimals: vec![
                Precision::Decimals(1),
                Precision::Decimals(2),
                Precision::Decimals(3),
                Precision::Decimals(4),
                Precision::Decimals(6),
                Precision::Full,
            ],
            restandardize: true,
            pca_fit: PcaFit::Pool,
            seed: 0,
            max_qubits: crate::statevector::DEFAULT_MAX_QUBITS,
            memory_budget_bytes: crate::kernels::DEFAULT_MEMORY_BUDGET,
            time_budget_s: None,
            ops_per_second: 2e8,
            out: PathBuf::from("results"),
        }
    }
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

/// Splits config text into ordered key/value pairs.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs: Vec<(String, String)> = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| config_err(format!("line {}: expected 'key = value'", n + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(config_err(format!("line {}: empty key", n + 1)));
        }
        if pairs.iter().any(|(seen, _)| seen == k) {
            return Err(config_err(format!("line {}: key '{k}' repeated", n + 1)));
        }
        pairs.push((k.to_owned(), unquote(v).to_owned()));
    }
    Ok(pairs)
}

fn unquote(v: &str) -> &str {
    v.strip_prefix('"').and_then(|s| s.strip_suffix('"')).unwrap_or(v)
}

fn scalar<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| config_err(format!("{key}: cannot parse '{v}'")))
}

fn list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>>
where
    T::Err: fmt::Display,
{
    let inner = v
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .unwrap_or(v);
    let items: Vec<&str> = inner.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if items.is_empty() {
        return Err(config_err(format!("{key}: list must not be empty")));
    }
    items
        .into_iter()
        .map(|s| s.parse().map_err(|e| config_err(format!("{key}: {e}"))))
        .collect()
}

fn boolean(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "on" | "yes" => Ok(true),
        "false" | "off" | "no" => Ok(false),
        _ => Err(config_err(format!("{key}: expected true or false, got '{v}'"))),
    }
}

fn fmt_list<T: fmt::Display>(items: &[T]) -> String {
    let parts: Vec<String> = items.iter().map(T::to_string).collect();
    format!("[{}]", parts.join(", "))
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Self::from_pairs(parse_pairs(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e == "json") {
            Self::from_manifest(&text)
        } else {
            Self::parse(&text)
        }
    }

    /// Reads the `config` object of a run manifest.
    pub fn from_manifest(json: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(json).map_err(|e| config_err(format!("manifest is not valid JSON: {e}")))?;
        let obj = value
            .get("config")
            .and_then(|c| c.as_object())
            .ok_or_else(|| config_err("manifest has no 'config' object"))?;
        let pairs = obj
            .iter()
            .map(|(k, v)| match v.as_str() {
                Some(s) => Ok((k.clone(), s.to_owned())),
                None => Err(config_err(format!("manifest config value for '{k}' is not a string"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_pairs(pairs)
    }

    pub fn from_pairs(pairs: Vec<(String, String)>) -> Result<Self> {
        let mut map: BTreeMap<String, String> = BTreeMap::new();
        for (k, v) in pairs {
            if map.insert(k.clone(), v).is_some() {
                return Err(config_err(format!("key '{k}' repeated")));
            }
        }
        let mut take = |k: &str| map.remove(k);
        let mut cfg = ExperimentConfig::default();

        let kind = take("dataset").unwrap_or_else(|| "synthetic".into());
        cfg.dataset = match kind.as_str() {
            "synthetic" => {
                let DatasetSpec::Synthetic { n, dim, separation } = cfg.dataset else {
                    unreachable!()
                };
                DatasetSpec::Synthetic {
                    n: take("synthetic_n").map_or(Ok(n), |v| scalar("synthetic_n", &v))?,
                    dim: take("synthetic_dim").map_or(Ok(dim), |v| scalar("synthetic_dim", &v))?,
                    separation: take("synthetic_separation")
                        .map_or(Ok(separation), |v| scalar("synthetic_separation", &v))?,
                }
            }
            "idx" => DatasetSpec::Idx {
                images: take("idx_images").ok_or_else(|| config_err("dataset = idx needs idx_images"))?.into(),
                labels: take("idx_labels").ok_or_else(|| config_err("dataset = idx needs idx_labels"))?.into(),
                class_a: scalar("class_a", &take("class_a").ok_or_else(|| config_err("dataset = idx needs class_a"))?)?,
                class_b: scalar("class_b", &take("class_b").ok_or_else(|| config_err("dataset = idx needs class_b"))?)?,
            },
            "csv" => DatasetSpec::Csv {
                path: take("csv_path").ok_or_else(|| config_err("dataset = csv needs csv_path"))?.into(),
                label_column: take("label_column").ok_or_else(|| config_err("dataset = csv needs label_column"))?,
            },
            other => return Err(config_err(format!("dataset: unknown kind '{other}' (synthetic, idx, csv)"))),
        };

        if let Some(v) = take("feature_map") {
            cfg.feature_map = match v.as_str() {
                "iqp" => MapKind::Iqp,
                "hamevo" => MapKind::HamEvo,
                "rbf" => MapKind::Rbf,
                other => return Err(config_err(format!("feature_map: unknown '{other}' (iqp, hamevo, rbf)"))),
            };
        }
        if let Some(v) = take("dims") {
            cfg.dims = list("dims", &v)?;
        }
        if let Some(v) = take("scaling") {
            cfg.scaling = list("scaling", &v)?;
        }
        if let Some(v) = take("trotter_steps") {
            cfg.trotter_steps = scalar("trotter_steps", &v)?;
        }
        if let Some(v) = take("haar_seeds") {
            cfg.haar_seeds = list("haar_seeds", &v)?;
        }
        if let Some(v) = take("c_selection") {
            cfg.c_selection = match v.as_str() {
                "cv" => CSelection::Cv,
                "train-score" => CSelection::TrainScore,
                other => return Err(config_err(format!("c_selection: unknown '{other}' (cv, train-score)"))),
            };
        }
        if let Some(v) = take("c_grid") {
            cfg.c_grid = list("c_grid", &v)?;
        }
        if let Some(v) = take("folds") {
            cfg.folds = scalar("folds", &v)?;
        }
        if let Some(v) = take("n_train") {
            cfg.n_train = scalar("n_train", &v)?;
        }
        if let Some(v) = take("n_test") {
            cfg.n_test = scalar("n_test", &v)?;
        }
        if let Some(v) = take("noise_shots") {
            cfg.noise_shots = scalar("noise_shots", &v)?;
        }
        if let Some(v) = take("noise_probe") {
            cfg.noise_probe = scalar("noise_probe", &v)?;
        }
        if let Some(v) = take("noise_repeats") {
            cfg.noise_repeats = scalar("noise_repeats", &v)?;
        }
        if let Some(v) = take("decimals") {
            cfg.decimals = list("decimals", &v)?;
        }
        if let Some(v) = take("restandardize") {
            cfg.restandardize = boolean("restandardize", &v)?;
        }
        if let Some(v) = take("pca_fit") {
            cfg.pca_fit = match v.as_str() {
                "pool" => PcaFit::Pool,
                "train" => PcaFit::Train,
                other => return Err(config_err(format!("pca_fit: unknown '{other}' (pool, train)"))),
            };
        }
        if let Some(v) = take("seed") {
            cfg.seed = scalar("seed", &v)?;
        }
        if let Some(v) = take("max_qubits") {
            cfg.max_qubits = scalar("max_qubits", &v)?;
        }
        if let Some(v) = take("memory_budget_bytes") {
            cfg.memory_budget_bytes = scalar("memory_budget_bytes", &v)?;
        }
        if let Some(v) = take("time_budget_s") {
            cfg.time_budget_s = if v == "none" { None } else { Some(scalar("time_budget_s", &v)?) };
        }
        if let Some(v) = take("ops_per_second") {
            cfg.ops_per_second = scalar("ops_per_second", &v)?;
        }
        if let Some(v) = take("out") {
            cfg.out = v.into();
        }
        if let Some(k) = map.keys().next() {
            return Err(config_err(format!("unknown key '{k}'")));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, msg: &str| if ok { Ok(()) } else { Err(config_err(msg)) };
        match &self.dataset {
            DatasetSpec::Synthetic { n, dim, separation } => {
                check(*n >= 2 && n % 2 == 0, "synthetic_n must be even and at least 2")?;
                check(*dim >= 1, "synthetic_dim must be at least 1")?;
                check(separation.is_finite() && *separation >= 0.0, "synthetic_separation must be finite and non-negative")?;
            }
            DatasetSpec::Idx { class_a, class_b, .. } => check(class_a != class_b, "class_a and class_b must differ")?,
            DatasetSpec::Csv { .. } => {}
        }
        check(self.dims.iter().all(|&d| d >= 1), "dims must be positive")?;
        check(self.trotter_steps >= 1, "trotter_steps must be at least 1")?;
        check(!self.haar_seeds.is_empty(), "haar_seeds must not be empty")?;
        check(
            self.c_grid.iter().all(|c| c.is_finite() && *c > 0.0),
            "c_grid values must be positive",
        )?;
        check(self.folds >= 2, "folds must be at least 2")?;
        check(self.n_train >= 2 && self.n_test >= 2, "n_train and n_test must be at least 2")?;
        check(self.noise_probe >= 2, "noise_probe must be at least 2")?;
        check(self.noise_repeats >= 2, "noise_repeats must be at least 2")?;
        check(self.max_qubits >= 1, "max_qubits must be at least 1")?;
        check(self.ops_per_second > 0.0, "ops_per_second must be positive")?;
        check(
            self.time_budget_s.is_none_or(|t| t.is_finite() && t > 0.0),
            "time_budget_s must be positive or 'none'",
        )?;
        Ok(())
    }

    /// Fully resolved `(key, value)` pairs in a fixed order.
    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        let mut out: Vec<(&'static str, String)> = Vec::new();
        match &self.dataset {
            DatasetSpec::Synthetic { n, dim, separation } => {
                out.push(("dataset", "synthetic".into()));
                out.push(("synthetic_n", n.to_string()));
                out.push(("synthetic_dim", dim.to_string()));
                out.push(("synthetic_separation", separation.to_string()));
            }
            DatasetSpec::Idx {
                images,
                labels,
                class_a,
                class_b,
            } => {
                out.push(("dataset", "idx".into()));
                out.push(("idx_images", images.display().to_string()));
                out.push(("idx_labels", labels.display().to_string()));
                out.push(("class_a", class_a.to_string()));
                out.push(("class_b", class_b.to_string()));
            }
            DatasetSpec::Csv { path, label_column } => {
                out.push(("dataset", "csv".into()));
                out.push(("csv_path", path.display().to_string()));
                out.push(("label_column", label_column.clone()));
            }
        }
        let c_sel = match self.c_selection {
            CSelection::Cv => "cv",
            CSelection::TrainScore => "train-score",
        };
        let pca = match self.pca_fit {
            PcaFit::Pool => "pool",
            PcaFit::Train => "train",
        };
        out.extend([
            ("feature_map", self.feature_map.name().to_owned()),
            ("dims", fmt_list(&self.dims)),
            ("scaling", fmt_list(&self.scaling)),
            ("trotter_steps", self.trotter_steps.to_string()),
            ("haar_seeds", fmt_list(&self.haar_seeds)),
            ("c_selection", c_sel.to_owned()),
            ("c_grid", fmt_list(&self.c_grid)),
            ("folds", self.folds.to_string()),
            ("n_train", self.n_train.to_string()),
            ("n_test", self.n_test.to_string()),
            ("noise_shots", self.noise_shots.to_string()),
            ("noise_probe", self.noise_probe.to_string()),
            ("noise_repeats", self.noise_repeats.to_string()),
            ("decimals", fmt_list(&self.decimals)),
            ("restandardize", self.restandardize.to_string()),
            ("pca_fit", pca.to_owned()),
            ("seed", self.seed.to_string()),
            ("max_qubits", self.max_qubits.to_string()),
            ("memory_budget_bytes", self.memory_budget_bytes.to_string()),
            ("time_budget_s", self.time_budget_s.map_or("none".into(), |t| t.to_string())),
            ("ops_per_second", self.ops_per_second.to_string()),
            ("out", self.out.display().to_string()),
        ]);
        out
    }

    pub fn to_text(&self) -> String {
        self.to_pairs().into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}
