//! Cross-experiment comparison table.

use std::fmt::Write as _;

use crate::metrics::MetricsReport;

use super::config::ModelKind;
use super::{PipelineError, Result, BASELINE_DIR, QUANTUM_DIR, SMALL_SAMPLE_DIR};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Full,
    SmallSample,
    Quantum,
}

impl Experiment {
    pub fn key(self) -> &'static str {
        match self {
            Experiment::Full => "full",
            Experiment::SmallSample => "small_sample",
            Experiment::Quantum => "quantum",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Experiment::Full => "Full dataset",
            Experiment::SmallSample => "200-sample",
            Experiment::Quantum => "200-sample",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [Experiment::Full, Experiment::SmallSample, Experiment::Quantum]
            .into_iter()
            .find(|e| e.key() == s)
    }
}

/// `(experiment, model key, model title, report path relative to out_dir)`
/// in table order.
pub(crate) fn expected_rows() -> Vec<(Experiment, &'static str, &'static str, String)> {
    let mut rows = Vec::with_capacity(7);
    for (exp, dir) in [(Experiment::Full, BASELINE_DIR), (Experiment::SmallSample, SMALL_SAMPLE_DIR)] {
        for m in ModelKind::ALL {
            rows.push((exp, m.key(), m.title(), format!("{dir}/{}.report.kv", m.key())));
        }
    }
    rows.push((
        Experiment::Quantum,
        "svm",
        "Quantum Embedding + SVM",
        format!("{QUANTUM_DIR}/svm.report.kv"),
    ));
    rows
}

/// One model's headline numbers. Precision, recall and F1 are support-weighted.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub experiment: Experiment,
    pub model: String,
    pub title: String,
    pub train_size: usize,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub attack_recall: f64,
}

impl ComparisonRow {
    pub(crate) fn from_report(
        experiment: Experiment,
        model: &str,
        title: &str,
        train_size: usize,
        r: &MetricsReport,
    ) -> Self {
        ComparisonRow {
            experiment,
            model: model.to_string(),
            title: title.to_string(),
            train_size,
            accuracy: r.accuracy,
            precision: r.weighted_avg.precision,
            recall: r.weighted_avg.recall,
            f1: r.weighted_avg.f1,
            attack_recall: r.classes[1].recall,
        }
    }
}

pub fn render_comparison_text(rows: &[ComparisonRow], missing: &[String], decimals: usize) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<14} {:<25} {:>8} {:>9} {:>9} {:>9} {:>9} {:>9}",
        "experiment", "model", "train_n", "accuracy", "precision", "recall", "f1", "atk_rec"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:<14} {:<25} {:>8} {:>9.d$} {:>9.d$} {:>9.d$} {:>9.d$} {:>9.d$}",
            r.experiment.title(),
            r.title,
            r.train_size,
            r.accuracy,
            r.precision,
            r.recall,
            r.f1,
            r.attack_recall,
            d = decimals
        );
    }
    out.push_str("\nprecision/recall/f1: support-weighted averages; atk_rec: attack-class recall\n");
    if !missing.is_empty() {
        let _ = writeln!(out, "absent: {}", missing.join(", "));
    }
    out
}

pub fn render_comparison_kv(rows: &[ComparisonRow], missing: &[String]) -> String {
    let mut out = String::from("# hqids-comparison\n");
    let _ = writeln!(out, "rows={}", rows.len());
    for (i, r) in rows.iter().enumerate() {
        let _ = writeln!(out, "row.{i}.experiment={}", r.experiment.key());
        let _ = writeln!(out, "row.{i}.model={}", r.model);
        let _ = writeln!(out, "row.{i}.title={}", r.title);
        let _ = writeln!(out, "row.{i}.train_size={}", r.train_size);
        let _ = writeln!(out, "row.{i}.accuracy={}", r.accuracy);
        let _ = writeln!(out, "row.{i}.precision={}", r.precision);
        let _ = writeln!(out, "row.{i}.recall={}", r.recall);
        let _ = writeln!(out, "row.{i}.f1={}", r.f1);
        let _ = writeln!(out, "row.{i}.attack_recall={}", r.attack_recall);
    }
    let _ = writeln!(out, "missing={}", missing.join(","));
    out
}

/// Inverse of [`render_comparison_kv`]: rows and the list of absent reports.
pub fn parse_comparison(text: &str) -> Result<(Vec<ComparisonRow>, Vec<String>)> {
    let bad = |msg: String| PipelineError::Config(format!("comparison document: {msg}"));
    let mut kv = std::collections::BTreeMap::new();
    for line in text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()) {
        let (k, v) = line.split_once('=').ok_or_else(|| bad(format!("bad line {line:?}")))?;
        kv.insert(k.to_string(), v.to_string());
    }
    let get = |k: &str| kv.get(k).ok_or_else(|| bad(format!("missing `{k}`")));
    let num = |k: &str| -> Result<f64> {
        get(k)?.parse().map_err(|_| bad(format!("bad number for `{k}`")))
    };
    let n: usize = get("rows")?.parse().map_err(|_| bad("bad `rows`".into()))?;
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let exp = get(&format!("row.{i}.experiment"))?;
        rows.push(ComparisonRow {
            experiment: Experiment::parse(exp).ok_or_else(|| bad(format!("unknown experiment {exp:?}")))?,
            model: get(&format!("row.{i}.model"))?.clone(),
            title: get(&format!("row.{i}.title"))?.clone(),
            train_size: get(&format!("row.{i}.train_size"))?
                .parse()
                .map_err(|_| bad("bad train_size".into()))?,
            accuracy: num(&format!("row.{i}.accuracy"))?,
            precision: num(&format!("row.{i}.precision"))?,
            recall: num(&format!("row.{i}.recall"))?,
            f1: num(&format!("row.{i}.f1"))?,
            attack_recall: num(&format!("row.{i}.attack_recall"))?,
        });
    }
    let missing = match get("missing")?.as_str() {
        "" => Vec::new(),
        m => m.split(',').map(str::to_string).collect(),
    };
    Ok((rows, missing))
}
