//! Plain-text model files.
//!
//! ```text
//! # hqids-model
//! kind=svm
//! kernel=rbf
//! gamma=2
//! ...
//! sv=<alpha*y>,<x_1>,...,<x_d>
//! ```
//!
//! Floats are written in shortest round-trip form, so a reloaded model
//! predicts bit-for-bit like the original.

use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};

use super::{
    ClassWeight, ClassicalError, KernelSpec, LogRegModel, LogRegParams, Result, SvmModel,
    SvmTrainingInfo,
};

const MAGIC: &str = "# hqids-model";

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    LogReg(LogRegModel),
    Svm(SvmModel),
}

impl Model {
    pub fn predict(&self, x: &[f64]) -> Result<u8> {
        match self {
            Model::LogReg(m) => m.predict(x).map(|(l, _)| l),
            Model::Svm(m) => m.predict(x),
        }
    }

    pub fn predict_batch<V: AsRef<[f64]> + Sync>(&self, xs: &[V]) -> Result<Vec<u8>> {
        match self {
            Model::LogReg(m) => m.predict_batch(xs),
            Model::Svm(m) => m.predict_batch(xs),
        }
    }

    /// `None` for logistic regression, otherwise whether SMO reached tolerance.
    pub fn converged(&self) -> Option<bool> {
        match self {
            Model::LogReg(_) => None,
            Model::Svm(m) => Some(m.info.converged),
        }
    }
}

fn join(values: &[f64]) -> String {
    values.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

pub fn write_model<W: Write>(mut w: W, model: &Model) -> io::Result<()> {
    writeln!(w, "{MAGIC}")?;
    match model {
        Model::LogReg(m) => {
            writeln!(w, "kind=logreg")?;
            writeln!(w, "lr={}", m.params.lr)?;
            writeln!(w, "epochs={}", m.params.epochs)?;
            writeln!(w, "seed={}", m.params.seed)?;
            writeln!(w, "class_weight={}", m.params.class_weight.as_str())?;
            writeln!(w, "dim={}", m.weights.len())?;
            writeln!(w, "bias={}", m.bias)?;
            writeln!(w, "weights={}", join(&m.weights))?;
        }
        Model::Svm(m) => {
            writeln!(w, "kind=svm")?;
            writeln!(w, "kernel={}", m.kernel.name())?;
            if let KernelSpec::Rbf { gamma } = m.kernel {
                writeln!(w, "gamma={gamma}")?;
            }
            writeln!(w, "c={}", m.c)?;
            writeln!(w, "tol={}", m.info.tol)?;
            writeln!(w, "max_passes={}", m.info.max_passes)?;
            writeln!(w, "seed={}", m.info.seed)?;
            writeln!(w, "class_weight={}", m.info.class_weight.as_str())?;
            writeln!(w, "converged={}", m.info.converged)?;
            writeln!(w, "iterations={}", m.info.iterations)?;
            writeln!(w, "dual_objective={}", m.info.dual_objective)?;
            writeln!(w, "bias={}", m.bias)?;
            writeln!(w, "n_sv={}", m.support_vectors.len())?;
            for (sv, coef) in m.support_vectors.iter().zip(&m.dual_coef) {
                writeln!(w, "sv={coef},{}", join(sv))?;
            }
        }
    }
    w.flush()
}

fn perr(line: usize, reason: impl Into<String>) -> ClassicalError {
    ClassicalError::Parse {
        line,
        reason: reason.into(),
    }
}

fn parse_floats(line: usize, s: &str) -> Result<Vec<f64>> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|v| v.parse::<f64>().map_err(|e| perr(line, format!("{v:?}: {e}"))))
        .collect()
}

pub fn read_model<R: BufRead>(r: R) -> Result<Model> {
    let mut kv: BTreeMap<String, String> = BTreeMap::new();
    let mut svs: Vec<(usize, String)> = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line.map_err(|e| perr(i + 1, e.to_string()))?;
        if i == 0 {
            if line.trim() != MAGIC {
                return Err(perr(1, "missing `# hqids-model` header"));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| perr(i + 1, "expected key=value"))?;
        if k == "sv" {
            svs.push((i + 1, v.to_string()));
        } else {
            kv.insert(k.to_string(), v.to_string());
        }
    }
    let get = |k: &str| kv.get(k).ok_or_else(|| perr(0, format!("missing key `{k}`")));
    fn num<T: std::str::FromStr>(k: &str, v: &str) -> Result<T> {
        v.parse().map_err(|_| perr(0, format!("invalid `{k}`: {v:?}")))
    }
    let class_weight: ClassWeight = get("class_weight")?.parse().map_err(|e: String| perr(0, e))?;

    match get("kind")?.as_str() {
        "logreg" => {
            let weights = parse_floats(0, get("weights")?)?;
            let dim: usize = num("dim", get("dim")?)?;
            if weights.len() != dim {
                return Err(perr(0, format!("dim={dim} but {} weights", weights.len())));
            }
            Ok(Model::LogReg(LogRegModel {
                weights,
                bias: num("bias", get("bias")?)?,
                params: LogRegParams {
                    lr: num("lr", get("lr")?)?,
                    epochs: num("epochs", get("epochs")?)?,
                    seed: num("seed", get("seed")?)?,
                    class_weight,
                },
            }))
        }
        "svm" => {
            let kernel = match get("kernel")?.as_str() {
                "linear" => KernelSpec::Linear,
                "rbf" => KernelSpec::rbf(num("gamma", get("gamma")?)?)?,
                other => return Err(perr(0, format!("unknown kernel {other:?}"))),
            };
            let n_sv: usize = num("n_sv", get("n_sv")?)?;
            if svs.len() != n_sv {
                return Err(perr(0, format!("n_sv={n_sv} but {} sv rows", svs.len())));
            }
            let mut support_vectors = Vec::with_capacity(n_sv);
            let mut dual_coef = Vec::with_capacity(n_sv);
            for (line, row) in &svs {
                let mut vals = parse_floats(*line, row)?;
                if vals.len() < 2 {
                    return Err(perr(*line, "support vector row needs a coefficient and features"));
                }
                dual_coef.push(vals.remove(0));
                support_vectors.push(vals);
            }
            if let Some(d) = support_vectors.first().map(Vec::len) {
                if support_vectors.iter().any(|v| v.len() != d) {
                    return Err(perr(0, "ragged support vectors"));
                }
            }
            let converged = match get("converged")?.as_str() {
                "true" => true,
                "false" => false,
                other => return Err(perr(0, format!("invalid `converged`: {other:?}"))),
            };
            Ok(Model::Svm(SvmModel {
                support_vectors,
                dual_coef,
                bias: num("bias", get("bias")?)?,
                kernel,
                c: num("c", get("c")?)?,
                info: SvmTrainingInfo {
                    tol: num("tol", get("tol")?)?,
                    max_passes: num("max_passes", get("max_passes")?)?,
                    seed: num("seed", get("seed")?)?,
                    class_weight,
                    converged,
                    iterations: num("iterations", get("iterations")?)?,
                    dual_objective: num("dual_objective", get("dual_objective")?)?,
                },
            }))
        }
        other => Err(perr(0, format!("unknown model kind {other:?}"))),
    }
}
