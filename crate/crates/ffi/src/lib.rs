//! C ABI over the `hqids` embedding circuit, trained classifiers and metrics.
//!
//! Every fallible function returns an [`HqidsStatus`]; on failure the message
//! is kept per thread and read back with [`hqids_last_error`]. Handles are
//! opaque and must be released with the matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fs::File;
use std::io::BufReader;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hqids::classical::io::{read_model, Model};
use hqids::metrics::{evaluate, ClassMetrics};
use hqids::quantum::io::read_weights;
use hqids::quantum::{init_weights, EmbeddingCircuit, VqcWeights};

/// Result codes shared by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HqidsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Parse = 4,
    Quantum = 5,
    Model = 6,
    Metrics = 7,
    Panic = 8,
}

/// Opaque embedding circuit: fixed entangling weights plus angle scale.
pub struct HqidsCircuit {
    inner: EmbeddingCircuit,
}

/// Opaque trained classifier (logistic regression or SVM).
pub struct HqidsModel {
    inner: Model,
}

/// Per-class precision, recall, F1 and support.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct HqidsClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

/// Binary classification summary. Index 0 is benign, 1 is attack.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct HqidsMetrics {
    pub accuracy: f64,
    pub classes: [HqidsClassMetrics; 2],
    pub macro_avg: HqidsClassMetrics,
    pub weighted_avg: HqidsClassMetrics,
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

impl From<ClassMetrics> for HqidsClassMetrics {
    fn from(m: ClassMetrics) -> Self {
        HqidsClassMetrics {
            precision: m.precision,
            recall: m.recall,
            f1: m.f1,
            support: m.support,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(HqidsStatus, String);

impl Failure {
    fn new(status: HqidsStatus, msg: impl ToString) -> Self {
        Failure(status, msg.to_string())
    }
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Runs `f`, clearing the last error first and converting failures and panics.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> HqidsStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HqidsStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            HqidsStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::new(HqidsStatus::NullPointer, format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, what: &str) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(Failure::new(HqidsStatus::NullPointer, format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn reference<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| Failure::new(HqidsStatus::NullPointer, format!("{what} is null")))
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut()
        .ok_or_else(|| Failure::new(HqidsStatus::NullPointer, format!("{what} is null")))
}

unsafe fn path<'a>(p: *const c_char) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::new(HqidsStatus::NullPointer, "path is null"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::new(HqidsStatus::InvalidArgument, "path is not valid UTF-8"))
}

fn open(p: &str) -> Result<BufReader<File>, Failure> {
    File::open(p)
        .map(BufReader::new)
        .map_err(|e| Failure::new(HqidsStatus::Io, format!("{p}: {e}")))
}

fn check_scale(angle_scale: f64) -> Result<(), Failure> {
    if angle_scale.is_finite() {
        Ok(())
    } else {
        Err(Failure::new(HqidsStatus::InvalidArgument, "angle_scale must be finite"))
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hqids_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn hqids_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Circuit with weights drawn uniformly from `[0, 2pi)` by `seed`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hqids_circuit_new(
    n_qubits: usize,
    depth: usize,
    seed: u64,
    angle_scale: f64,
    out: *mut *mut HqidsCircuit,
) -> HqidsStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        check_scale(angle_scale)?;
        let w = init_weights(n_qubits, depth, seed).map_err(|e| Failure::new(HqidsStatus::Quantum, e))?;
        *out = Box::into_raw(Box::new(HqidsCircuit {
            inner: EmbeddingCircuit::new(w, angle_scale),
        }));
        Ok(())
    })
}

/// Circuit from explicit angles, layer-major then qubit then `(phi, theta, omega)`.
///
/// # Safety
/// `angles` must point to `len` doubles and `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hqids_circuit_from_angles(
    n_qubits: usize,
    depth: usize,
    angles: *const f64,
    len: usize,
    angle_scale: f64,
    out: *mut *mut HqidsCircuit,
) -> HqidsStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        check_scale(angle_scale)?;
        let angles = slice(angles, len, "angles")?.to_vec();
        let w = VqcWeights::new(n_qubits, depth, angles).map_err(|e| Failure::new(HqidsStatus::Quantum, e))?;
        *out = Box::into_raw(Box::new(HqidsCircuit {
            inner: EmbeddingCircuit::new(w, angle_scale),
        }));
        Ok(())
    })
}

/// Circuit from a `weights.txt` written by the pipeline.
///
/// # Safety
/// The path must be a NUL-terminated string and `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hqids_circuit_load(
    weights_path: *const c_char,
    angle_scale: f64,
    out: *mut *mut HqidsCircuit,
) -> HqidsStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        check_scale(angle_scale)?;
        let p = path(weights_path)?;
        let (w, _) = read_weights(open(p)?).map_err(|e| Failure::new(HqidsStatus::Parse, format!("{p}: {e}")))?;
        *out = Box::into_raw(Box::new(HqidsCircuit {
            inner: EmbeddingCircuit::new(w, angle_scale),
        }));
        Ok(())
    })
}

/// Number of qubits, which is both the input and the output width. 0 for null.
///
/// # Safety
/// `circuit` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hqids_circuit_n_qubits(circuit: *const HqidsCircuit) -> usize {
    circuit.as_ref().map_or(0, |c| c.inner.n_qubits())
}

/// Embeds `n_rows` row-major samples of width `n_qubits` into `out`, which
/// must hold `n_rows * n_qubits` doubles.
///
/// # Safety
/// Pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn hqids_circuit_embed(
    circuit: *const HqidsCircuit,
    x: *const f64,
    n_rows: usize,
    out: *mut f64,
    out_len: usize,
) -> HqidsStatus {
    guard(|| {
        let c = &reference(circuit, "circuit")?.inner;
        let n = c.n_qubits();
        let total = n_rows
            .checked_mul(n)
            .ok_or_else(|| Failure::new(HqidsStatus::InvalidArgument, "n_rows * n_qubits overflows"))?;
        if out_len != total {
            return Err(Failure::new(
                HqidsStatus::InvalidArgument,
                format!("out_len must be {total}, got {out_len}"),
            ));
        }
        let x = slice(x, total, "x")?;
        let out = slice_mut(out, total, "out")?;
        let rows: Vec<&[f64]> = x.chunks(n).collect();
        let embedded = c.embed_batch(&rows).map_err(|e| Failure::new(HqidsStatus::Quantum, e))?;
        for (dst, e) in out.chunks_mut(n).zip(&embedded) {
            dst.copy_from_slice(e.as_slice());
        }
        Ok(())
    })
}

/// # Safety
/// `circuit` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hqids_circuit_free(circuit: *mut HqidsCircuit) {
    if !circuit.is_null() {
        drop(Box::from_raw(circuit));
    }
}

/// Loads a `.model` file written by the pipeline.
///
/// # Safety
/// The path must be a NUL-terminated string and `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hqids_model_load(model_path: *const c_char, out: *mut *mut HqidsModel) -> HqidsStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let p = path(model_path)?;
        let m = read_model(open(p)?).map_err(|e| Failure::new(HqidsStatus::Parse, format!("{p}: {e}")))?;
        *out = Box::into_raw(Box::new(HqidsModel { inner: m }));
        Ok(())
    })
}

/// Input width the model expects, 0 for null or an SVM without support vectors.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hqids_model_dim(model: *const HqidsModel) -> usize {
    match model.as_ref().map(|m| &m.inner) {
        Some(Model::LogReg(m)) => m.dim(),
        Some(Model::Svm(m)) => m.dim().unwrap_or(0),
        None => 0,
    }
}

fn decision(model: &Model, x: &[f64]) -> Result<f64, Failure> {
    let fail = |e| Failure::new(HqidsStatus::Model, e);
    match model {
        Model::Svm(m) => m.decision(x).map_err(fail),
        Model::LogReg(m) => {
            if x.len() != m.dim() {
                return Err(Failure::new(
                    HqidsStatus::Model,
                    format!("dimension mismatch: expected {}, got {}", m.dim(), x.len()),
                ));
            }
            Ok(m.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + m.bias)
        }
    }
}

/// Labels (0 benign, 1 attack) for `n_rows` row-major samples of width `dim`.
///
/// # Safety
/// `x` must hold `n_rows * dim` doubles and `labels` `n_rows` bytes.
#[no_mangle]
pub unsafe extern "C" fn hqids_model_predict(
    model: *const HqidsModel,
    x: *const f64,
    n_rows: usize,
    dim: usize,
    labels: *mut u8,
) -> HqidsStatus {
    guard(|| {
        let m = &reference(model, "model")?.inner;
        let rows = rows(x, n_rows, dim)?;
        let labels = slice_mut(labels, n_rows, "labels")?;
        let pred = m.predict_batch(&rows).map_err(|e| Failure::new(HqidsStatus::Model, e))?;
        labels.copy_from_slice(&pred);
        Ok(())
    })
}

/// Raw scores: the SVM decision value or the logistic logit. Non-negative
/// means attack.
///
/// # Safety
/// `x` must hold `n_rows * dim` doubles and `scores` `n_rows` doubles.
#[no_mangle]
pub unsafe extern "C" fn hqids_model_decision(
    model: *const HqidsModel,
    x: *const f64,
    n_rows: usize,
    dim: usize,
    scores: *mut f64,
) -> HqidsStatus {
    guard(|| {
        let m = &reference(model, "model")?.inner;
        let rows = rows(x, n_rows, dim)?;
        let scores = slice_mut(scores, n_rows, "scores")?;
        for (s, r) in scores.iter_mut().zip(&rows) {
            *s = decision(m, r)?;
        }
        Ok(())
    })
}

unsafe fn rows<'a>(x: *const f64, n_rows: usize, dim: usize) -> Result<Vec<&'a [f64]>, Failure> {
    if dim == 0 && n_rows > 0 {
        return Err(Failure::new(HqidsStatus::InvalidArgument, "dim must be positive"));
    }
    let total = n_rows
        .checked_mul(dim)
        .ok_or_else(|| Failure::new(HqidsStatus::InvalidArgument, "n_rows * dim overflows"))?;
    Ok(slice(x, total, "x")?.chunks(dim.max(1)).collect())
}

/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hqids_model_free(model: *mut HqidsModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Accuracy, per-class and averaged precision/recall/F1 and the confusion
/// counts for `n` label pairs in `{0, 1}`.
///
/// # Safety
/// `y_true` and `y_pred` must hold `n` bytes and `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hqids_metrics_summarize(
    y_true: *const u8,
    y_pred: *const u8,
    n: usize,
    out: *mut HqidsMetrics,
) -> HqidsStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let t = slice(y_true, n, "y_true")?;
        let p = slice(y_pred, n, "y_pred")?;
        let r = evaluate(t, p).map_err(|e| Failure::new(HqidsStatus::Metrics, e))?;
        *out = HqidsMetrics {
            accuracy: r.accuracy,
            classes: [r.classes[0].into(), r.classes[1].into()],
            macro_avg: r.macro_avg.into(),
            weighted_avg: r.weighted_avg.into(),
            tp: r.confusion.tp,
            fp: r.confusion.fp,
            tn: r.confusion.tn,
            fn_: r.confusion.fn_,
        };
        Ok(())
    })
}
