//! Test-side reference implementations, written without reusing crate internals.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use hqids::pipeline::ExperimentConfig;
use hqids::quantum::Gate;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn synthetic_csv(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

/// Default config on the bundled synthetic flows, writing into `out`.
pub fn synthetic_config(out: &Path) -> ExperimentConfig {
    ExperimentConfig {
        train_csv: synthetic_csv("synthetic_train.csv"),
        test_csv: synthetic_csv("synthetic_test.csv"),
        out_dir: out.to_path_buf(),
        ..Default::default()
    }
}

pub fn random_gates(rng: &mut ChaCha8Rng, n: usize, count: usize) -> Vec<Gate> {
    let angle = |rng: &mut ChaCha8Rng| rng.random_range(-7.0..7.0);
    (0..count)
        .map(|_| {
            let qubit = rng.random_range(0..n);
            match rng.random_range(0..if n > 1 { 4 } else { 3 }) {
                0 => Gate::Ry { qubit, theta: angle(rng) },
                1 => Gate::Rz { qubit, phi: angle(rng) },
                2 => Gate::Rot {
                    qubit,
                    phi: angle(rng),
                    theta: angle(rng),
                    omega: angle(rng),
                },
                _ => {
                    let target = (qubit + rng.random_range(1..n)) % n;
                    Gate::Cnot { control: qubit, target }
                }
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy)]
pub enum RefKernel {
    Linear,
    Rbf(f64),
}

pub fn ref_kernel(k: RefKernel, a: &[f64], b: &[f64]) -> f64 {
    match k {
        RefKernel::Linear => a.iter().zip(b).map(|(p, q)| p * q).sum(),
        RefKernel::Rbf(g) => (-g * a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>()).exp(),
    }
}

fn sign(label: u8) -> f64 {
    if label == 1 {
        1.0
    } else {
        -1.0
    }
}

/// Euclidean projection onto `{0 <= a_i <= u_i, sum s_i a_i = 0}` by bisection
/// on the multiplier of the equality constraint.
fn project(v: &DVector<f64>, s: &[f64], upper: &[f64]) -> DVector<f64> {
    let at = |lambda: f64| DVector::from_fn(v.len(), |i, _| (v[i] - lambda * s[i]).clamp(0.0, upper[i]));
    let residual = |a: &DVector<f64>| a.iter().zip(s).map(|(a, s)| a * s).sum::<f64>();
    let bound = v.amax() + upper.iter().cloned().fold(0.0, f64::max) + 1.0;
    let (mut lo, mut hi) = (-bound, bound);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if residual(&at(mid)) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(0.5 * (lo + hi))
}

/// Maximizes the SVM dual by accelerated projected gradient with
/// function-value restarts. Returns `(alphas, objective)`.
pub fn pg_dual_oracle(
    x: &[Vec<f64>],
    y: &[u8],
    upper: &[f64],
    k: RefKernel,
    iters: usize,
) -> (Vec<f64>, f64) {
    let n = x.len();
    let s: Vec<f64> = y.iter().map(|&l| sign(l)).collect();
    let q = DMatrix::from_fn(n, n, |i, j| s[i] * s[j] * ref_kernel(k, &x[i], &x[j]));
    let lmax = q.clone().symmetric_eigen().eigenvalues.max().max(1e-9);
    let step = 1.0 / lmax;
    let ones = DVector::from_element(n, 1.0);
    let obj = |a: &DVector<f64>| a.sum() - 0.5 * a.dot(&(&q * a));

    let mut a = project(&DVector::zeros(n), &s, upper);
    let mut f_a = obj(&a);
    let mut z = a.clone();
    let mut t = 1.0f64;
    for _ in 0..iters {
        let grad = &ones - &q * &z;
        let next = project(&(&z + grad * step), &s, upper);
        let f_next = obj(&next);
        if f_next < f_a {
            z = a.clone();
            t = 1.0;
            continue;
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        z = &next + (&next - &a) * ((t - 1.0) / t_next);
        a = next;
        f_a = f_next;
        t = t_next;
    }
    (a.iter().copied().collect(), f_a)
}

/// Weighted mean binary cross-entropy straight from its definition.
pub fn ref_bce(w: &[f64], b: f64, x: &[Vec<f64>], y: &[u8], sw: &[f64]) -> f64 {
    let mut num = 0.0;
    for ((xi, &yi), s) in x.iter().zip(y).zip(sw) {
        let z: f64 = w.iter().zip(xi).map(|(a, b)| a * b).sum::<f64>() + b;
        let p = 1.0 / (1.0 + (-z).exp());
        let yi = f64::from(yi);
        num += s * -(yi * p.ln() + (1.0 - yi) * (1.0 - p).ln());
    }
    num / sw.iter().sum::<f64>()
}

/// Random labelled points in `[-1, 1]^d` containing both classes.
pub fn random_problem(rng: &mut ChaCha8Rng, n: usize, d: usize) -> (Vec<Vec<f64>>, Vec<u8>) {
    loop {
        let x: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let y: Vec<u8> = (0..n).map(|_| rng.random_range(0..2u8)).collect();
        if y.contains(&0) && y.contains(&1) {
            return (x, y);
        }
    }
}

/// SHA-256 of every file under `root` except the manifest, keyed by relative path.
pub fn tree_digests(root: &Path) -> std::collections::BTreeMap<String, String> {
    fn walk(root: &Path, dir: &Path, out: &mut std::collections::BTreeMap<String, String>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().replace('\\', "/");
                if rel != "manifest.txt" {
                    out.insert(rel, hqids::digest::file_sha256(&path).unwrap());
                }
            }
        }
    }
    let mut out = std::collections::BTreeMap::new();
    walk(root, root, &mut out);
    out
}
