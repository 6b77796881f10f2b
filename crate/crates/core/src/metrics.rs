//! Binary classification metrics with attack (label 1) as the positive class.
//!
//! Precision, recall and F1 whose denominator vanishes are reported as 0 and
//! the affected cells are listed in [`MetricsReport::zero_division`].

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("{truth} true labels but {pred} predictions")]
    LengthMismatch { truth: usize, pred: usize },
    #[error("no samples to evaluate")]
    Empty,
    #[error("label {0} not in {{0, 1}}")]
    InvalidLabel(u8),
    #[error("malformed report: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, MetricsError>;

pub const CLASS_NAMES: [&str; 2] = ["Benign", "Attack"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    /// 2x2 CSV, rows = truth, columns = prediction, benign first.
    pub fn to_csv(&self) -> String {
        format!(
            "true\\pred,benign,attack\nbenign,{},{}\nattack,{},{}\n",
            self.tn, self.fp, self.fn_, self.tp
        )
    }
}

pub fn confusion(y_true: &[u8], y_pred: &[u8]) -> Result<ConfusionMatrix> {
    if y_true.len() != y_pred.len() {
        return Err(MetricsError::LengthMismatch {
            truth: y_true.len(),
            pred: y_pred.len(),
        });
    }
    if y_true.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mut cm = ConfusionMatrix::default();
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t, p) {
            (1, 1) => cm.tp += 1,
            (0, 1) => cm.fp += 1,
            (0, 0) => cm.tn += 1,
            (1, 0) => cm.fn_ += 1,
            _ => return Err(MetricsError::InvalidLabel(if t > 1 { t } else { p })),
        }
    }
    Ok(cm)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub accuracy: f64,
    /// Indexed by label: `[benign, attack]`.
    pub classes: [ClassMetrics; 2],
    pub macro_avg: ClassMetrics,
    pub weighted_avg: ClassMetrics,
    pub confusion: ConfusionMatrix,
    /// Cells that hit a zero denominator, e.g. `benign.precision`.
    pub zero_division: Vec<String>,
}

fn ratio(num: u64, den: u64, cell: String, flags: &mut Vec<String>) -> f64 {
    if den == 0 {
        flags.push(cell);
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn summarize(cm: &ConfusionMatrix) -> Result<MetricsReport> {
    let total = cm.total();
    if total == 0 {
        return Err(MetricsError::Empty);
    }
    let mut flags = Vec::new();
    // (true positives, predicted positives, actual positives) per class
    let counts = [
        (cm.tn, cm.tn + cm.fn_, cm.tn + cm.fp),
        (cm.tp, cm.tp + cm.fp, cm.tp + cm.fn_),
    ];
    let mut classes = [ClassMetrics::default(); 2];
    for (k, &(hit, predicted, actual)) in counts.iter().enumerate() {
        let name = CLASS_NAMES[k].to_lowercase();
        let precision = ratio(hit, predicted, format!("{name}.precision"), &mut flags);
        let recall = ratio(hit, actual, format!("{name}.recall"), &mut flags);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            flags.push(format!("{name}.f1"));
            0.0
        };
        classes[k] = ClassMetrics {
            precision,
            recall,
            f1,
            support: actual,
        };
    }
    let avg = |weights: [f64; 2], support: u64| ClassMetrics {
        precision: weights[0] * classes[0].precision + weights[1] * classes[1].precision,
        recall: weights[0] * classes[0].recall + weights[1] * classes[1].recall,
        f1: weights[0] * classes[0].f1 + weights[1] * classes[1].f1,
        support,
    };
    let macro_avg = avg([0.5, 0.5], total);
    let weighted_avg = avg(
        [
            classes[0].support as f64 / total as f64,
            classes[1].support as f64 / total as f64,
        ],
        total,
    );
    Ok(MetricsReport {
        accuracy: (cm.tp + cm.tn) as f64 / total as f64,
        classes,
        macro_avg,
        weighted_avg,
        confusion: *cm,
        zero_division: flags,
    })
}

/// `confusion` followed by `summarize`.
pub fn evaluate(y_true: &[u8], y_pred: &[u8]) -> Result<MetricsReport> {
    summarize(&confusion(y_true, y_pred)?)
}

/// Classification-report style table: per-class rows, accuracy, macro and
/// weighted averages, with `decimals` digits.
pub fn render_text(r: &MetricsReport, decimals: usize) -> String {
    let w = decimals + 7;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:>12} {:>w$} {:>w$} {:>w$} {:>9}",
        "", "precision", "recall", "f1-score", "support"
    );
    let _ = writeln!(s);
    let row = |s: &mut String, label: &str, m: &ClassMetrics| {
        let _ = writeln!(
            s,
            "{label:>12} {:>w$.decimals$} {:>w$.decimals$} {:>w$.decimals$} {:>9}",
            m.precision, m.recall, m.f1, m.support
        );
    };
    for (name, m) in CLASS_NAMES.iter().zip(&r.classes) {
        row(&mut s, name, m);
    }
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "{:>12} {:>w$} {:>w$} {:>w$.decimals$} {:>9}",
        "accuracy",
        "",
        "",
        r.accuracy,
        r.confusion.total()
    );
    row(&mut s, "macro avg", &r.macro_avg);
    row(&mut s, "weighted avg", &r.weighted_avg);
    s
}

/// Flat `key=value` lines at full precision.
pub fn render_kv(r: &MetricsReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "accuracy={}", r.accuracy);
    let mut block = |prefix: &str, m: &ClassMetrics| {
        let _ = writeln!(s, "{prefix}.precision={}", m.precision);
        let _ = writeln!(s, "{prefix}.recall={}", m.recall);
        let _ = writeln!(s, "{prefix}.f1={}", m.f1);
        let _ = writeln!(s, "{prefix}.support={}", m.support);
    };
    block("benign", &r.classes[0]);
    block("attack", &r.classes[1]);
    block("macro", &r.macro_avg);
    block("weighted", &r.weighted_avg);
    let c = &r.confusion;
    let _ = writeln!(s, "confusion.tp={}", c.tp);
    let _ = writeln!(s, "confusion.fp={}", c.fp);
    let _ = writeln!(s, "confusion.tn={}", c.tn);
    let _ = writeln!(s, "confusion.fn={}", c.fn_);
    let _ = writeln!(s, "zero_division={}", r.zero_division.join(","));
    s
}

/// Inverse of [`render_kv`]. Unknown keys are ignored so reports can carry
/// extra annotations.
pub fn parse_kv(text: &str) -> Result<MetricsReport> {
    let kv: BTreeMap<&str, &str> = text
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|l| l.split_once('=').ok_or_else(|| MetricsError::Parse(format!("bad line {l:?}"))))
        .collect::<Result<_>>()?;
    let get = |k: &str| -> Result<&str> {
        kv.get(k)
            .copied()
            .ok_or_else(|| MetricsError::Parse(format!("missing key {k}")))
    };
    let f = |k: &str| -> Result<f64> {
        get(k)?
            .parse()
            .map_err(|_| MetricsError::Parse(format!("bad number for {k}")))
    };
    let u = |k: &str| -> Result<u64> {
        get(k)?
            .parse()
            .map_err(|_| MetricsError::Parse(format!("bad count for {k}")))
    };
    let block = |p: &str| -> Result<ClassMetrics> {
        Ok(ClassMetrics {
            precision: f(&format!("{p}.precision"))?,
            recall: f(&format!("{p}.recall"))?,
            f1: f(&format!("{p}.f1"))?,
            support: u(&format!("{p}.support"))?,
        })
    };
    let zero = get("zero_division")?;
    Ok(MetricsReport {
        accuracy: f("accuracy")?,
        classes: [block("benign")?, block("attack")?],
        macro_avg: block("macro")?,
        weighted_avg: block("weighted")?,
        confusion: ConfusionMatrix {
            tp: u("confusion.tp")?,
            fp: u("confusion.fp")?,
            tn: u("confusion.tn")?,
            fn_: u("confusion.fn")?,
        },
        zero_division: if zero.is_empty() {
            Vec::new()
        } else {
            zero.split(',').map(str::to_string).collect()
        },
    })
}
