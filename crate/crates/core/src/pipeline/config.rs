//! Line-oriented `key = value` experiment configuration.
//!
//! | key              | default                                            |
//! |------------------|----------------------------------------------------|
//! | `train_csv`      | `data/synthetic_train.csv`                         |
//! | `test_csv`       | `data/synthetic_test.csv`                          |
//! | `out_dir`        | `out`                                              |
//! | `features`       | `dur,proto,service,state,spkts,dpkts,sbytes,dbytes`|
//! | `seed`           | `42` (master seed; every stage seed derives from it)|
//! | `subset_size`    | `200`                                              |
//! | `split_fraction` | `0.8`                                              |
//! | `stratified`     | `false`                                            |
//! | `scaler_fit`     | `joint` (`train` fits min-max on train only)       |
//! | `depth`          | `2`                                                |
//! | `angle_scale`    | `1.0`                                              |
//! | `weight_seed`    | `auto` (derived from `seed`)                       |
//! | `svm_c`          | `1.0`                                              |
//! | `svm_tol`        | `0.001`                                            |
//! | `svm_max_passes` | `10`                                               |
//! | `gamma`          | `scale` or a positive number                       |
//! | `class_weight`   | `none` or `balanced`                               |
//! | `logreg_lr`      | `0.1`                                              |
//! | `logreg_epochs`  | `1000`                                             |
//! | `rbf_subsample`  | `20000`                                            |
//! | `models`         | `logreg,linear_svm,rbf_svm`                        |
//! | `quantum_kernel` | `rbf` (`linear` also accepted)                     |
//! | `workers`        | `0` (all cores)                                    |
//! | `decimals`       | `2` (digits in rendered text tables)               |
//!
//! Blank lines and lines starting with `#` are ignored. Relative paths are
//! resolved against the working directory.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::classical::ClassWeight;
use crate::data::{Feature, ScalerFit};

use super::seeds::{derive_seed, Stage};

/// Classical model families evaluated by the baseline and small-sample stages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ModelKind {
    LogReg,
    LinearSvm,
    RbfSvm,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::LogReg, ModelKind::LinearSvm, ModelKind::RbfSvm];

    pub fn key(self) -> &'static str {
        match self {
            ModelKind::LogReg => "logreg",
            ModelKind::LinearSvm => "linear_svm",
            ModelKind::RbfSvm => "rbf_svm",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            ModelKind::LogReg => "Logistic Regression",
            ModelKind::LinearSvm => "Linear SVM",
            ModelKind::RbfSvm => "RBF SVM",
        }
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        ModelKind::ALL
            .into_iter()
            .find(|m| m.key() == s.trim())
            .ok_or_else(|| format!("unknown model {s:?} (expected logreg, linear_svm or rbf_svm)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaMode {
    /// `1 / (d * var(X))` on the training matrix.
    Scale,
    Fixed(f64),
}

impl fmt::Display for GammaMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GammaMode::Scale => f.write_str("scale"),
            GammaMode::Fixed(g) => write!(f, "{g}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuantumKernel {
    Linear,
    Rbf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub train_csv: PathBuf,
    pub test_csv: PathBuf,
    pub out_dir: PathBuf,
    pub features: Vec<Feature>,
    pub seed: u64,
    pub subset_size: usize,
    pub split_fraction: f64,
    pub stratified: bool,
    pub scaler_fit: ScalerFit,
    pub depth: usize,
    pub angle_scale: f64,
    pub weight_seed: Option<u64>,
    pub svm_c: f64,
    pub svm_tol: f64,
    pub svm_max_passes: usize,
    pub gamma: GammaMode,
    pub class_weight: ClassWeight,
    pub logreg_lr: f64,
    pub logreg_epochs: usize,
    pub rbf_subsample: usize,
    pub models: Vec<ModelKind>,
    pub quantum_kernel: QuantumKernel,
    pub workers: usize,
    pub decimals: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            train_csv: PathBuf::from("data/synthetic_train.csv"),
            test_csv: PathBuf::from("data/synthetic_test.csv"),
            out_dir: PathBuf::from("out"),
            features: Feature::ALL.to_vec(),
            seed: 42,
            subset_size: 200,
            split_fraction: 0.8,
            stratified: false,
            scaler_fit: ScalerFit::Joint,
            depth: 2,
            angle_scale: 1.0,
            weight_seed: None,
            svm_c: 1.0,
            svm_tol: 1e-3,
            svm_max_passes: 10,
            gamma: GammaMode::Scale,
            class_weight: ClassWeight::None,
            logreg_lr: 0.1,
            logreg_epochs: 1000,
            rbf_subsample: 20_000,
            models: ModelKind::ALL.to_vec(),
            quantum_kernel: QuantumKernel::Rbf,
            workers: 0,
            decimals: 2,
        }
    }
}

fn parse_bool(v: &str) -> Result<bool, String> {
    match v {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        other => Err(format!("expected a boolean, got {other:?}")),
    }
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T, String> {
    v.parse()
        .map_err(|_| format!("`{key}`: cannot parse {v:?}"))
}

impl ExperimentConfig {
    /// Parses a config document on top of the defaults.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut cfg = ExperimentConfig::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key = value", n + 1))?;
            cfg.set(k.trim(), v.trim())
                .map_err(|e| format!("line {}: {e}", n + 1))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies a single `key=value` override.
    pub fn set(&mut self, key: &str, v: &str) -> Result<(), String> {
        match key {
            "train_csv" => self.train_csv = PathBuf::from(v),
            "test_csv" => self.test_csv = PathBuf::from(v),
            "out_dir" => self.out_dir = PathBuf::from(v),
            "features" => {
                self.features = v
                    .split(',')
                    .map(|f| f.parse::<Feature>().map_err(|e| e.to_string()))
                    .collect::<Result<_, _>>()?
            }
            "seed" => self.seed = parse_num(key, v)?,
            "subset_size" => self.subset_size = parse_num(key, v)?,
            "split_fraction" => self.split_fraction = parse_num(key, v)?,
            "stratified" => self.stratified = parse_bool(v)?,
            "scaler_fit" => self.scaler_fit = v.parse()?,
            "depth" => self.depth = parse_num(key, v)?,
            "angle_scale" => self.angle_scale = parse_num(key, v)?,
            "weight_seed" => {
                self.weight_seed = if v == "auto" { None } else { Some(parse_num(key, v)?) }
            }
            "svm_c" => self.svm_c = parse_num(key, v)?,
            "svm_tol" => self.svm_tol = parse_num(key, v)?,
            "svm_max_passes" => self.svm_max_passes = parse_num(key, v)?,
            "gamma" => {
                self.gamma = if v == "scale" {
                    GammaMode::Scale
                } else {
                    GammaMode::Fixed(parse_num(key, v)?)
                }
            }
            "class_weight" => self.class_weight = v.parse()?,
            "logreg_lr" => self.logreg_lr = parse_num(key, v)?,
            "logreg_epochs" => self.logreg_epochs = parse_num(key, v)?,
            "rbf_subsample" => self.rbf_subsample = parse_num(key, v)?,
            "models" => {
                self.models = v
                    .split(',')
                    .map(str::parse)
                    .collect::<Result<_, _>>()?
            }
            "quantum_kernel" => {
                self.quantum_kernel = match v {
                    "rbf" => QuantumKernel::Rbf,
                    "linear" => QuantumKernel::Linear,
                    other => return Err(format!("`quantum_kernel`: unknown kernel {other:?}")),
                }
            }
            "workers" => self.workers = parse_num(key, v)?,
            "decimals" => self.decimals = parse_num(key, v)?,
            other => return Err(format!("unknown config key `{other}`")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), String> {
        let mut errs = Vec::new();
        if self.features.is_empty() || self.features.len() > crate::quantum::MAX_QUBITS {
            errs.push("`features` must list 1..=8 features".to_string());
        }
        let mut seen = self.features.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.features.len() {
            errs.push("`features` contains duplicates".into());
        }
        if self.subset_size < 2 {
            errs.push("`subset_size` must be at least 2".into());
        }
        if !(self.split_fraction > 0.0 && self.split_fraction < 1.0) {
            errs.push("`split_fraction` must lie in (0, 1)".into());
        }
        if self.depth == 0 {
            errs.push("`depth` must be at least 1".into());
        }
        if !self.angle_scale.is_finite() {
            errs.push("`angle_scale` must be finite".into());
        }
        if !(self.svm_c > 0.0 && self.svm_c.is_finite()) {
            errs.push("`svm_c` must be positive".into());
        }
        if !(self.svm_tol > 0.0 && self.svm_tol.is_finite()) {
            errs.push("`svm_tol` must be positive".into());
        }
        if let GammaMode::Fixed(g) = self.gamma {
            if !(g > 0.0 && g.is_finite()) {
                errs.push("`gamma` must be `scale` or positive".into());
            }
        }
        if !(self.logreg_lr > 0.0 && self.logreg_lr.is_finite()) {
            errs.push("`logreg_lr` must be positive".into());
        }
        if self.rbf_subsample < 2 {
            errs.push("`rbf_subsample` must be at least 2".into());
        }
        if self.decimals > 12 {
            errs.push("`decimals` must be at most 12".into());
        }
        if self.models.is_empty() {
            errs.push("`models` must list at least one model".into());
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs.join("; "))
        }
    }

    /// Qubit count of the embedding circuit: one per feature.
    pub fn n_qubits(&self) -> usize {
        self.features.len()
    }

    pub fn stage_seed(&self, stage: Stage) -> u64 {
        match (stage, self.weight_seed) {
            (Stage::Weights, Some(s)) => s,
            _ => derive_seed(self.seed, stage),
        }
    }

    /// Effective settings as sorted key/value pairs. `out_dir` and `workers`
    /// are left out: neither changes any output byte.
    pub fn to_kv(&self) -> BTreeMap<&'static str, String> {
        let features: Vec<&str> = self.features.iter().map(|f| f.name()).collect();
        let models: Vec<&str> = self.models.iter().map(|m| m.key()).collect();
        BTreeMap::from([
            ("train_csv", self.train_csv.display().to_string()),
            ("test_csv", self.test_csv.display().to_string()),
            ("features", features.join(",")),
            ("seed", self.seed.to_string()),
            ("subset_size", self.subset_size.to_string()),
            ("split_fraction", self.split_fraction.to_string()),
            ("stratified", self.stratified.to_string()),
            ("scaler_fit", self.scaler_fit.as_str().to_string()),
            ("depth", self.depth.to_string()),
            ("angle_scale", self.angle_scale.to_string()),
            ("weight_seed", self.stage_seed(Stage::Weights).to_string()),
            ("svm_c", self.svm_c.to_string()),
            ("svm_tol", self.svm_tol.to_string()),
            ("svm_max_passes", self.svm_max_passes.to_string()),
            ("gamma", self.gamma.to_string()),
            ("class_weight", self.class_weight.as_str().to_string()),
            ("decimals", self.decimals.to_string()),
            ("logreg_lr", self.logreg_lr.to_string()),
            ("logreg_epochs", self.logreg_epochs.to_string()),
            ("rbf_subsample", self.rbf_subsample.to_string()),
            ("models", models.join(",")),
            (
                "quantum_kernel",
                match self.quantum_kernel {
                    QuantumKernel::Rbf => "rbf",
                    QuantumKernel::Linear => "linear",
                }
                .to_string(),
            ),
        ])
    }
}
