use std::fs;
use std::io;
use std::path::Path;
use std::time::Instant;

use log::{info, warn};

use crate::classical::{
    gamma_scale, io::{write_model, Model}, train_logreg, train_svm_smo, KernelSpec, LogRegParams, SvmParams,
};
use crate::data::{
    load_csv, load_dataset, preprocess, split, subsample, write_dataset, write_metadata, Dataset,
    PreprocessMeta, Schema, SourceInfo, SplitTag,
};
use crate::digest::file_sha256;
use crate::metrics::{evaluate, parse_kv, render_kv, render_text, MetricsReport};
use crate::quantum::io::{write_embeddings, write_weights, EmbeddingHeader};
use crate::quantum::{init_weights, EmbeddingCircuit};

use super::config::{ExperimentConfig, GammaMode, ModelKind, QuantumKernel};
use super::manifest::{RunManifest, MANIFEST_FILE};
use super::report::{expected_rows, render_comparison_kv, render_comparison_text, ComparisonRow, Experiment};
use super::seeds::Stage;
use super::{
    PipelineError, Result, BASELINE_DIR, PREPROCESS_DIR, QUANTUM_DIR, REPORT_DIR, SMALL_SAMPLE_DIR,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreprocessSummary {
    pub train_rows: usize,
    pub test_rows: usize,
}

/// Per-model results of one experiment stage.
#[derive(Debug, Clone, Default)]
pub struct ExperimentOutcome {
    pub train_size: usize,
    pub test_size: usize,
    /// `(model key, report)` in configuration order.
    pub reports: Vec<(String, MetricsReport)>,
    /// Models whose solver stopped on the iteration budget.
    pub unconverged: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonOutcome {
    pub rows: Vec<ComparisonRow>,
    /// Report paths (relative to `out_dir`) that were not found.
    pub missing: Vec<String>,
}

/// Writes files under `out_dir` and records each one in the manifest.
struct Outputs<'a> {
    root: &'a Path,
    manifest: RunManifest,
}

impl<'a> Outputs<'a> {
    fn open(cfg: &'a ExperimentConfig) -> Result<Self> {
        let root = cfg.out_dir.as_path();
        fs::create_dir_all(root).map_err(|e| PipelineError::io(root, e))?;
        let mut manifest = RunManifest::load_or_new(root).map_err(|e| PipelineError::io(root, e))?;
        manifest.clear_prefix("config.");
        for (k, v) in cfg.to_kv() {
            manifest.set(format!("config.{k}"), v);
        }
        Ok(Outputs { root, manifest })
    }

    /// Removes a stage directory and everything the manifest knew about it.
    fn reset_stage(&mut self, dir: &str) -> Result<()> {
        let path = self.root.join(dir);
        match fs::remove_dir_all(&path) {
            Ok(()) => {}
            Err(e) if e.kind() == io::ErrorKind::NotFound => {}
            Err(e) => return Err(PipelineError::io(&path, e)),
        }
        self.manifest.clear_prefix(&format!("artifact.{dir}/"));
        self.manifest.clear_prefix(&format!("status.{dir}."));
        self.manifest.clear_prefix(&format!("report.{dir}."));
        Ok(())
    }

    fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<()> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| PipelineError::io(parent, e))?;
        }
        fs::write(&path, bytes).map_err(|e| PipelineError::io(&path, e))?;
        self.manifest
            .record_artifact(rel)
            .map_err(|e| PipelineError::io(&path, e))?;
        Ok(())
    }

    fn write_with(&mut self, rel: &str, f: impl FnOnce(&mut Vec<u8>) -> io::Result<()>) -> Result<()> {
        let mut buf = Vec::new();
        f(&mut buf).map_err(|e| PipelineError::io(&self.root.join(rel), e))?;
        self.write(rel, &buf)
    }

    fn save(&self) -> Result<()> {
        self.manifest
            .save()
            .map_err(|e| PipelineError::io(&self.root.join(MANIFEST_FILE), e))
    }
}

/// Runs `f` on a dedicated pool when `workers > 0`, otherwise on rayon's global pool.
fn with_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| PipelineError::Config(format!("worker pool: {e}")))?;
    Ok(pool.install(f))
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned())
}

/// Reads the raw CSVs, fits encoders and scaler, and writes the transformed
/// sets plus the metadata sidecar.
pub fn cmd_preprocess(cfg: &ExperimentConfig) -> Result<PreprocessSummary> {
    let started = Instant::now();
    let schema = Schema::default();
    let load = |path: &Path| {
        load_csv(path, &schema).map_err(|e| PipelineError::from(e).in_stage(format!("preprocess: {}", path.display())))
    };
    let train = load(&cfg.train_csv)?;
    let test = load(&cfg.test_csv)?;
    let (train_name, test_name) = (file_name(&cfg.train_csv), file_name(&cfg.test_csv));
    let pre = preprocess(&train, &test, &cfg.features, cfg.scaler_fit, (&train_name, &test_name))
        .map_err(|e| PipelineError::from(e).in_stage("preprocess"))?;
    info!("preprocess: {} train rows, {} test rows", train.len(), test.len());

    let mut sources = Vec::new();
    for (path, name, rows) in [
        (&cfg.train_csv, &train_name, train.len()),
        (&cfg.test_csv, &test_name, test.len()),
    ] {
        sources.push(SourceInfo {
            name: name.clone(),
            sha256: file_sha256(path).map_err(|e| PipelineError::io(path, e))?,
            rows,
        });
    }
    let meta = PreprocessMeta {
        encoder: pre.encoder.clone(),
        scaler: pre.scaler.clone(),
        scaler_fit: cfg.scaler_fit,
        features: cfg.features.clone(),
        seed: cfg.seed,
        sources: sources.clone(),
    };

    let mut out = Outputs::open(cfg)?;
    out.reset_stage(PREPROCESS_DIR)?;
    out.manifest.clear_prefix("input.");
    for (key, s) in ["train_csv", "test_csv"].iter().zip(&sources) {
        out.manifest.set(format!("input.{key}.name"), s.name.clone());
        out.manifest.set(format!("input.{key}.sha256"), s.sha256.clone());
        out.manifest.set(format!("input.{key}.rows"), s.rows.to_string());
    }
    out.write_with(&format!("{PREPROCESS_DIR}/train.csv"), |w| write_dataset(w, &pre.train))?;
    out.write_with(&format!("{PREPROCESS_DIR}/test.csv"), |w| write_dataset(w, &pre.test))?;
    out.write_with(&format!("{PREPROCESS_DIR}/meta.txt"), |w| write_metadata(w, &meta))?;
    out.manifest
        .set("timing.preprocess_ms", started.elapsed().as_millis().to_string());
    out.save()?;
    Ok(PreprocessSummary {
        train_rows: train.len(),
        test_rows: test.len(),
    })
}

fn load_preprocessed(cfg: &ExperimentConfig) -> Result<(Dataset, Dataset)> {
    let load = |name: &str, tag| {
        let path = cfg.out_dir.join(PREPROCESS_DIR).join(name);
        if !path.exists() {
            return Err(PipelineError::NotPreprocessed(path.display().to_string()));
        }
        let ds = load_dataset(&path, tag)?;
        if ds.dim() != cfg.features.len() {
            return Err(PipelineError::Config(format!(
                "{} has {} features but the config lists {}; rerun preprocess",
                path.display(),
                ds.dim(),
                cfg.features.len()
            )));
        }
        Ok(ds)
    };
    Ok((load("train.csv", SplitTag::Train)?, load("test.csv", SplitTag::Test)?))
}

/// The seeded small-sample protocol: subset of the combined preprocessed
/// corpus, then the train/test partition. Shared by the classical and
/// quantum small-sample stages, so both see the same rows.
pub fn small_sample_split(cfg: &ExperimentConfig, train: &Dataset, test: &Dataset) -> Result<(Dataset, Dataset)> {
    let corpus = train.concat(test, SplitTag::Subset)?;
    let subset = subsample(&corpus, cfg.subset_size, cfg.stage_seed(Stage::Subset), cfg.stratified)?;
    let (tr, te) = split(&subset, cfg.split_fraction, cfg.stage_seed(Stage::Split))?;
    let [benign, attack] = tr.class_counts();
    if benign == 0 || attack == 0 {
        return Err(PipelineError::SingleClassSubset { benign, attack });
    }
    Ok((tr, te))
}

fn resolve_gamma(mode: GammaMode, x: &[Vec<f64>]) -> Result<f64> {
    match mode {
        GammaMode::Fixed(g) => Ok(g),
        GammaMode::Scale => Ok(gamma_scale(x)?),
    }
}

fn svm_params(cfg: &ExperimentConfig, kernel: KernelSpec) -> SvmParams {
    SvmParams {
        c: cfg.svm_c,
        kernel,
        tol: cfg.svm_tol,
        max_passes: cfg.svm_max_passes,
        seed: cfg.stage_seed(Stage::Smo),
        class_weight: cfg.class_weight,
    }
}

/// Trains one classical model; returns it with the number of rows it saw.
fn train_classical(kind: ModelKind, cfg: &ExperimentConfig, train: &Dataset) -> Result<(Model, usize)> {
    match kind {
        ModelKind::LogReg => {
            let params = LogRegParams {
                lr: cfg.logreg_lr,
                epochs: cfg.logreg_epochs,
                seed: cfg.stage_seed(Stage::LogReg),
                class_weight: cfg.class_weight,
            };
            let m = train_logreg(&train.features(), &train.labels(), &params)?;
            Ok((Model::LogReg(m), train.len()))
        }
        ModelKind::LinearSvm => {
            let m = train_svm_smo(&train.features(), &train.labels(), &svm_params(cfg, KernelSpec::Linear))?;
            Ok((Model::Svm(m), train.len()))
        }
        ModelKind::RbfSvm => {
            let reduced;
            let ds = if train.len() > cfg.rbf_subsample {
                reduced = subsample(
                    train,
                    cfg.rbf_subsample,
                    cfg.stage_seed(Stage::RbfSubsample),
                    cfg.stratified,
                )?;
                &reduced
            } else {
                train
            };
            let x = ds.features();
            let kernel = KernelSpec::rbf(resolve_gamma(cfg.gamma, &x)?)?;
            let m = train_svm_smo(&x, &ds.labels(), &svm_params(cfg, kernel))?;
            Ok((Model::Svm(m), ds.len()))
        }
    }
}

/// Predicts, scores and persists `<dir>/<key>.{model,report.txt,report.kv,confusion.csv}`.
#[allow(clippy::too_many_arguments)]
fn evaluate_and_write(
    out: &mut Outputs,
    dir: &str,
    key: &str,
    model: &Model,
    test_x: &[Vec<f64>],
    test_y: &[u8],
    train_size: usize,
    decimals: usize,
) -> Result<MetricsReport> {
    let preds = model.predict_batch(test_x)?;
    let report = evaluate(test_y, &preds)?;
    out.write_with(&format!("{dir}/{key}.model"), |w| write_model(w, model))?;
    out.write(&format!("{dir}/{key}.report.txt"), render_text(&report, decimals).as_bytes())?;
    let kv = format!("{}train_size={train_size}\n", render_kv(&report));
    out.write(&format!("{dir}/{key}.report.kv"), kv.as_bytes())?;
    out.write(&format!("{dir}/{key}.confusion.csv"), report.confusion.to_csv().as_bytes())?;
    out.manifest
        .set(format!("report.{dir}.{key}"), format!("{dir}/{key}.report.kv"));
    let status = match model.converged() {
        Some(false) => {
            warn!("{dir}/{key}: SMO stopped on its iteration budget before reaching tol");
            "not-converged"
        }
        _ => "ok",
    };
    out.manifest.set(format!("status.{dir}.{key}"), status);
    Ok(report)
}

/// Trains every configured model, continuing past individual failures.
fn run_classical_models(
    cfg: &ExperimentConfig,
    out: &mut Outputs,
    dir: &str,
    experiment: Experiment,
    train: &Dataset,
    test: &Dataset,
) -> (ExperimentOutcome, Vec<String>) {
    let mut outcome = ExperimentOutcome {
        train_size: train.len(),
        test_size: test.len(),
        ..Default::default()
    };
    let mut failures = Vec::new();
    let mut rows = Vec::new();
    let (test_x, test_y) = (test.features(), test.labels());
    for &kind in &cfg.models {
        let key = kind.key();
        let result = train_classical(kind, cfg, train).and_then(|(model, n)| {
            let r = evaluate_and_write(out, dir, key, &model, &test_x, &test_y, n, cfg.decimals)?;
            Ok((model, n, r))
        });
        match result {
            Ok((model, n, report)) => {
                info!("{dir}/{key}: accuracy {:.4} (train n={n})", report.accuracy);
                if model.converged() == Some(false) {
                    outcome.unconverged.push(key.to_string());
                }
                rows.push(ComparisonRow::from_report(experiment, key, kind.title(), n, &report));
                outcome.reports.push((key.to_string(), report));
            }
            Err(e) => {
                warn!("{dir}/{key} failed: {e}");
                out.manifest.set(format!("status.{dir}.{key}"), format!("error: {e}"));
                failures.push(format!("{key}: {e}"));
            }
        }
    }
    if !rows.is_empty() {
        let table = render_comparison_text(&rows, &[], cfg.decimals);
        if let Err(e) = out.write(&format!("{dir}/comparison.txt"), table.as_bytes()) {
            failures.push(e.to_string());
        }
    }
    (outcome, failures)
}

fn finish_classical(
    mut out: Outputs,
    stage: &str,
    started: Instant,
    outcome: ExperimentOutcome,
    failures: Vec<String>,
) -> Result<ExperimentOutcome> {
    out.manifest
        .set(format!("timing.{stage}_ms"), started.elapsed().as_millis().to_string());
    out.save()?;
    if failures.is_empty() {
        Ok(outcome)
    } else {
        Err(PipelineError::ModelsFailed(failures).in_stage(stage.to_string()))
    }
}

/// Full-split classical baselines; RBF trains on a seeded subsample.
pub fn cmd_baseline(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let started = Instant::now();
    let (train, test) = load_preprocessed(cfg).map_err(|e| e.in_stage(BASELINE_DIR))?;
    let mut out = Outputs::open(cfg)?;
    out.reset_stage(BASELINE_DIR)?;
    let (outcome, failures) = with_pool(cfg.workers, || {
        run_classical_models(cfg, &mut out, BASELINE_DIR, Experiment::Full, &train, &test)
    })?;
    finish_classical(out, BASELINE_DIR, started, outcome, failures)
}

/// Classical models on the seeded small-sample protocol.
pub fn cmd_small_sample(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let started = Instant::now();
    let stage = SMALL_SAMPLE_DIR;
    let (train, test) = load_preprocessed(cfg).map_err(|e| e.in_stage(stage))?;
    let (tr, te) = small_sample_split(cfg, &train, &test).map_err(|e| e.in_stage(stage))?;
    let mut out = Outputs::open(cfg)?;
    out.reset_stage(stage)?;
    out.write_with(&format!("{stage}/subset_train.csv"), |w| write_dataset(w, &tr))?;
    out.write_with(&format!("{stage}/subset_test.csv"), |w| write_dataset(w, &te))?;
    let (outcome, failures) = with_pool(cfg.workers, || {
        run_classical_models(cfg, &mut out, stage, Experiment::SmallSample, &tr, &te)
    })?;
    finish_classical(out, stage, started, outcome, failures)
}

/// Embeds the small-sample subset through the seeded circuit and trains an
/// SVM on the embeddings. Reads only the preprocessed files.
pub fn cmd_quantum(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let started = Instant::now();
    let stage = QUANTUM_DIR;
    let ctx = |e: PipelineError| e.in_stage(stage);
    let (train, test) = load_preprocessed(cfg).map_err(ctx)?;
    let (tr, te) = small_sample_split(cfg, &train, &test).map_err(ctx)?;

    let weight_seed = cfg.stage_seed(Stage::Weights);
    let weights = init_weights(cfg.n_qubits(), cfg.depth, weight_seed).map_err(|e| ctx(e.into()))?;
    let circuit = EmbeddingCircuit::new(weights.clone(), cfg.angle_scale);
    let (emb_train, emb_test) = with_pool(cfg.workers, || {
        Ok::<_, PipelineError>((
            circuit.embed_batch(&tr.features())?,
            circuit.embed_batch(&te.features())?,
        ))
    })?
    .map_err(ctx)?;

    let mut out = Outputs::open(cfg)?;
    out.reset_stage(stage)?;
    let header = EmbeddingHeader {
        n_qubits: cfg.n_qubits(),
        depth: cfg.depth,
        seed: weight_seed,
        angle_scale: cfg.angle_scale,
    };
    out.write_with(&format!("{stage}/weights.txt"), |w| write_weights(w, &weights, weight_seed))?;
    out.write_with(&format!("{stage}/embeddings_train.csv"), |w| {
        write_embeddings(w, &header, &emb_train, &tr.labels())
    })?;
    out.write_with(&format!("{stage}/embeddings_test.csv"), |w| {
        write_embeddings(w, &header, &emb_test, &te.labels())
    })?;

    let to_rows = |es: Vec<crate::quantum::Embedding>| -> Vec<Vec<f64>> {
        es.into_iter().map(|e| e.into_inner()).collect()
    };
    let (x_train, x_test) = (to_rows(emb_train), to_rows(emb_test));
    let result = with_pool(cfg.workers, || -> Result<_> {
        let kernel = match cfg.quantum_kernel {
            QuantumKernel::Linear => KernelSpec::Linear,
            QuantumKernel::Rbf => KernelSpec::rbf(resolve_gamma(cfg.gamma, &x_train)?)?,
        };
        let model = Model::Svm(train_svm_smo(&x_train, &tr.labels(), &svm_params(cfg, kernel))?);
        let report =
            evaluate_and_write(&mut out, stage, "svm", &model, &x_test, &te.labels(), tr.len(), cfg.decimals)?;
        Ok((model, report))
    })?;
    out.manifest
        .set(format!("timing.{stage}_ms"), started.elapsed().as_millis().to_string());
    let (model, report) = match result {
        Ok(r) => r,
        Err(e) => {
            out.manifest.set(format!("status.{stage}.svm"), format!("error: {e}"));
            out.save()?;
            return Err(ctx(e));
        }
    };
    out.save()?;
    info!("{stage}/svm: accuracy {:.4}", report.accuracy);
    Ok(ExperimentOutcome {
        train_size: tr.len(),
        test_size: te.len(),
        unconverged: if model.converged() == Some(false) {
            vec!["svm".to_string()]
        } else {
            Vec::new()
        },
        reports: vec![("svm".to_string(), report)],
    })
}

fn read_train_size(text: &str) -> usize {
    text.lines()
        .find_map(|l| l.strip_prefix("train_size="))
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(0)
}

/// Merges whatever per-model reports exist into `report/comparison.{txt,kv}`.
pub fn cmd_report(cfg: &ExperimentConfig) -> Result<ComparisonOutcome> {
    let started = Instant::now();
    let mut rows = Vec::new();
    let mut missing = Vec::new();
    for (experiment, key, title, rel) in expected_rows() {
        let path = cfg.out_dir.join(&rel);
        match fs::read_to_string(&path) {
            Ok(text) => {
                let report = parse_kv(&text).map_err(|e| PipelineError::from(e).in_stage(rel.clone()))?;
                rows.push(ComparisonRow::from_report(experiment, key, title, read_train_size(&text), &report));
            }
            Err(e) if e.kind() == io::ErrorKind::NotFound => missing.push(rel),
            Err(e) => return Err(PipelineError::io(&path, e)),
        }
    }
    if rows.is_empty() {
        return Err(PipelineError::MissingInputs(missing));
    }
    let mut out = Outputs::open(cfg)?;
    out.reset_stage(REPORT_DIR)?;
    out.write(
        &format!("{REPORT_DIR}/comparison.txt"),
        render_comparison_text(&rows, &missing, cfg.decimals).as_bytes(),
    )?;
    out.write(
        &format!("{REPORT_DIR}/comparison.kv"),
        render_comparison_kv(&rows, &missing).as_bytes(),
    )?;
    out.manifest
        .set("timing.report_ms", started.elapsed().as_millis().to_string());
    out.save()?;
    Ok(ComparisonOutcome { rows, missing })
}

/// Re-hashes every artifact listed in `<out_dir>/manifest.txt`; returns how many were checked.
pub fn cmd_verify_manifest(out_dir: &Path) -> Result<usize> {
    let path = out_dir.join(MANIFEST_FILE);
    if !path.exists() {
        return Err(PipelineError::MissingInputs(vec![path.display().to_string()]));
    }
    let manifest = RunManifest::load_or_new(out_dir).map_err(|e| PipelineError::io(&path, e))?;
    let problems = manifest.verify();
    if problems.is_empty() {
        Ok(manifest.artifacts().count())
    } else {
        Err(PipelineError::ManifestMismatch(problems))
    }
}
