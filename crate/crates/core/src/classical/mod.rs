//! Classical classifiers: logistic regression and linear / RBF SVMs.
//!
//! Labels are `0` (benign) and `1` (attack); the SVM maps them to `-1 / +1`
//! internally.

pub mod io;
mod kernel;
mod logreg;
mod svm;

use std::str::FromStr;

use thiserror::Error;

pub use kernel::{gamma_scale, kernel_eval, KernelSpec};
pub use logreg::{gradient, loss, predict_logreg, sigmoid, train_logreg, LogRegModel, LogRegParams};
pub use svm::{
    dual_objective, kkt_audit, predict_svm, solve_dual, train_svm_smo, DualSolution, KktAudit,
    SvmModel, SvmParams, SvmTrainingInfo,
};

#[derive(Debug, Error, PartialEq)]
pub enum ClassicalError {
    #[error("training data must contain both classes")]
    SingleClass,
    #[error("empty training data")]
    Empty,
    #[error("{features} feature rows but {labels} labels")]
    LengthMismatch { features: usize, labels: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("non-finite value in input")]
    NonFinite,
    #[error("label {0} not in {{0, 1}}")]
    InvalidLabel(u8),
    #[error("zero variance in X; pass an explicit gamma")]
    ZeroVariance,
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("training diverged to non-finite parameters")]
    Diverged,
    #[error("malformed model file line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, ClassicalError>;

/// Cost-sensitive reweighting of the two classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClassWeight {
    #[default]
    None,
    /// `n / (2 n_c)` for class `c`.
    Balanced,
}

impl ClassWeight {
    pub fn as_str(self) -> &'static str {
        match self {
            ClassWeight::None => "none",
            ClassWeight::Balanced => "balanced",
        }
    }
}

impl FromStr for ClassWeight {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "none" => Ok(ClassWeight::None),
            "balanced" => Ok(ClassWeight::Balanced),
            other => Err(format!("class weight must be `none` or `balanced`, got {other:?}")),
        }
    }
}

pub(crate) fn sample_weights(y: &[u8], cw: ClassWeight) -> Vec<f64> {
    match cw {
        ClassWeight::None => vec![1.0; y.len()],
        ClassWeight::Balanced => {
            let n = y.len() as f64;
            let pos = y.iter().filter(|&&l| l == 1).count() as f64;
            let w = [n / (2.0 * (n - pos)), n / (2.0 * pos)];
            y.iter().map(|&l| w[usize::from(l)]).collect()
        }
    }
}

/// Shared validation; returns the feature dimension.
pub(crate) fn check_training_set<V: AsRef<[f64]>>(x: &[V], y: &[u8]) -> Result<usize> {
    if x.len() != y.len() {
        return Err(ClassicalError::LengthMismatch {
            features: x.len(),
            labels: y.len(),
        });
    }
    let d = x.first().ok_or(ClassicalError::Empty)?.as_ref().len();
    for row in x {
        let row = row.as_ref();
        if row.len() != d {
            return Err(ClassicalError::Dimension {
                expected: d,
                got: row.len(),
            });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(ClassicalError::NonFinite);
        }
    }
    if let Some(&bad) = y.iter().find(|&&l| l > 1) {
        return Err(ClassicalError::InvalidLabel(bad));
    }
    if !(y.contains(&0) && y.contains(&1)) {
        return Err(ClassicalError::SingleClass);
    }
    Ok(d)
}
