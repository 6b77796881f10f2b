//! Soft-margin SVM trained by sequential minimal optimization.
//!
//! The dual `max sum(a) - 1/2 a'Qa` s.t. `0 <= a_i <= C_i`, `y'a = 0` is solved
//! two coordinates at a time. Each step picks the maximal violating index `i`
//! and, among the indices that can move against it, the `j` with the largest
//! second-order decrease of the objective; the pair then has a closed-form
//! clipped update. The loop stops once the largest KKT violation gap
//! `m(a) - M(a)` drops below `tol`, or the iteration budget
//! `max_passes * max(10 n, 10_000)` runs out, in which case the model is
//! returned with `converged = false`.

use std::collections::{HashMap, VecDeque};
use std::rc::Rc;

use super::kernel::KernelSpec;
use super::{check_training_set, sample_weights, ClassWeight, ClassicalError, Result};

/// Curvature floor for degenerate pairs (duplicate points).
const TAU: f64 = 1e-12;
/// Memory allotted to cached kernel columns.
const CACHE_BYTES: usize = 512 << 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmParams {
    pub c: f64,
    pub kernel: KernelSpec,
    pub tol: f64,
    pub max_passes: usize,
    /// Recorded with the model; working-set selection is deterministic.
    pub seed: u64,
    pub class_weight: ClassWeight,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c: 1.0,
            kernel: KernelSpec::Linear,
            tol: 1e-3,
            max_passes: 10,
            seed: 0,
            class_weight: ClassWeight::None,
        }
    }
}

/// Solver bookkeeping stored alongside the model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmTrainingInfo {
    pub tol: f64,
    pub max_passes: usize,
    pub seed: u64,
    pub class_weight: ClassWeight,
    pub converged: bool,
    pub iterations: usize,
    pub dual_objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub support_vectors: Vec<Vec<f64>>,
    /// `alpha_i * y_i` with `y_i` in `{-1, +1}`.
    pub dual_coef: Vec<f64>,
    pub bias: f64,
    pub kernel: KernelSpec,
    pub c: f64,
    pub info: SvmTrainingInfo,
}

/// Full dual solution over the training set.
#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub alphas: Vec<f64>,
    /// Per-sample box bound `C * class_weight`.
    pub upper: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
    pub converged: bool,
    pub objective: f64,
}

struct KernelColumns<'a, V> {
    x: &'a [V],
    kernel: KernelSpec,
    cache: HashMap<usize, Rc<[f64]>>,
    order: VecDeque<usize>,
    capacity: usize,
}

impl<'a, V: AsRef<[f64]>> KernelColumns<'a, V> {
    fn new(x: &'a [V], kernel: KernelSpec) -> Self {
        let n = x.len().max(1);
        let capacity = (CACHE_BYTES / (8 * n)).clamp(2, n);
        KernelColumns {
            x,
            kernel,
            cache: HashMap::with_capacity(capacity),
            order: VecDeque::with_capacity(capacity),
            capacity,
        }
    }

    fn column(&mut self, i: usize) -> Rc<[f64]> {
        if let Some(col) = self.cache.get(&i) {
            return Rc::clone(col);
        }
        let xi = self.x[i].as_ref();
        let col: Rc<[f64]> = self
            .x
            .iter()
            .map(|xk| self.kernel.eval_unchecked(xi, xk.as_ref()))
            .collect();
        if self.cache.len() >= self.capacity {
            if let Some(old) = self.order.pop_front() {
                self.cache.remove(&old);
            }
        }
        self.cache.insert(i, Rc::clone(&col));
        self.order.push_back(i);
        col
    }
}

fn signed(label: u8) -> f64 {
    if label == 1 {
        1.0
    } else {
        -1.0
    }
}

fn check_params(params: &SvmParams) -> Result<()> {
    if !(params.c > 0.0 && params.c.is_finite()) {
        return Err(ClassicalError::InvalidParam(format!("C must be positive, got {}", params.c)));
    }
    if !(params.tol > 0.0 && params.tol.is_finite()) {
        return Err(ClassicalError::InvalidParam(format!("tol must be positive, got {}", params.tol)));
    }
    if let KernelSpec::Rbf { gamma } = params.kernel {
        KernelSpec::rbf(gamma)?;
    }
    Ok(())
}

/// Runs SMO and returns every dual variable.
pub fn solve_dual<V: AsRef<[f64]>>(x: &[V], y: &[u8], params: &SvmParams) -> Result<DualSolution> {
    check_training_set(x, y)?;
    check_params(params)?;
    let n = x.len();
    let ys: Vec<f64> = y.iter().map(|&l| signed(l)).collect();
    let upper: Vec<f64> = sample_weights(y, params.class_weight)
        .into_iter()
        .map(|w| w * params.c)
        .collect();
    let diag: Vec<f64> = x
        .iter()
        .map(|v| params.kernel.eval_unchecked(v.as_ref(), v.as_ref()))
        .collect();
    let mut cols = KernelColumns::new(x, params.kernel);
    let mut alpha = vec![0.0; n];
    // gradient of 1/2 a'Qa - e'a
    let mut grad = vec![-1.0; n];
    let budget = params.max_passes.max(1) * (10 * n).max(10_000);
    let mut iterations = 0;
    let mut converged = false;

    loop {
        let mut gmax = f64::NEG_INFINITY;
        let mut sel_i = None;
        for t in 0..n {
            let v = if ys[t] > 0.0 {
                (alpha[t] < upper[t]).then(|| -grad[t])
            } else {
                (alpha[t] > 0.0).then_some(grad[t])
            };
            if let Some(v) = v {
                if v >= gmax {
                    gmax = v;
                    sel_i = Some(t);
                }
            }
        }
        let Some(i) = sel_i else {
            converged = true;
            break;
        };
        let col_i = cols.column(i);
        let mut gmax2 = f64::NEG_INFINITY;
        let mut sel_j = None;
        let mut best = f64::INFINITY;
        for t in 0..n {
            let grad_diff = if ys[t] > 0.0 {
                if alpha[t] <= 0.0 {
                    continue;
                }
                gmax2 = gmax2.max(grad[t]);
                gmax + grad[t]
            } else {
                if alpha[t] >= upper[t] {
                    continue;
                }
                gmax2 = gmax2.max(-grad[t]);
                gmax - grad[t]
            };
            if grad_diff > 0.0 {
                let quad = diag[i] + diag[t] - 2.0 * col_i[t];
                let obj = -(grad_diff * grad_diff) / if quad > 0.0 { quad } else { TAU };
                if obj <= best {
                    best = obj;
                    sel_j = Some(t);
                }
            }
        }
        let Some(j) = sel_j.filter(|_| gmax + gmax2 >= params.tol) else {
            converged = true;
            break;
        };
        if iterations >= budget {
            break;
        }
        iterations += 1;

        let col_j = cols.column(j);
        let (old_i, old_j) = (alpha[i], alpha[j]);
        let (ci, cj) = (upper[i], upper[j]);
        let quad = {
            let q = diag[i] + diag[j] - 2.0 * col_i[j];
            if q > 0.0 {
                q
            } else {
                TAU
            }
        };
        if ys[i] != ys[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > ci - cj {
                if alpha[i] > ci {
                    alpha[i] = ci;
                    alpha[j] = ci - diff;
                }
            } else if alpha[j] > cj {
                alpha[j] = cj;
                alpha[i] = cj + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > ci {
                if alpha[i] > ci {
                    alpha[i] = ci;
                    alpha[j] = sum - ci;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > cj {
                if alpha[j] > cj {
                    alpha[j] = cj;
                    alpha[i] = sum - cj;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let di = (alpha[i] - old_i) * ys[i];
        let dj = (alpha[j] - old_j) * ys[j];
        for k in 0..n {
            grad[k] += ys[k] * (col_i[k] * di + col_j[k] * dj);
        }
    }
    if !converged {
        log::warn!("SMO stopped after {iterations} iterations without reaching tol {}", params.tol);
    }

    // bias: mean implied value over free vectors, else midpoint of the feasible interval
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free, mut free_sum) = (0usize, 0.0);
    for t in 0..n {
        let yg = ys[t] * grad[t];
        let at_upper = alpha[t] >= upper[t];
        let at_lower = alpha[t] <= 0.0;
        if at_upper {
            if ys[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if at_lower {
            if ys[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            free_sum += yg;
        }
    }
    let rho = if free > 0 { free_sum / free as f64 } else { (ub + lb) / 2.0 };
    let objective = 0.5 * alpha.iter().zip(&grad).map(|(a, g)| a * (1.0 - g)).sum::<f64>();

    Ok(DualSolution {
        alphas: alpha,
        upper,
        bias: -rho,
        iterations,
        converged,
        objective,
    })
}

/// Trains a model and keeps vectors with `alpha_i > 1e-12 * C_i`.
pub fn train_svm_smo<V: AsRef<[f64]>>(x: &[V], y: &[u8], params: &SvmParams) -> Result<SvmModel> {
    let sol = solve_dual(x, y, params)?;
    Ok(SvmModel::from_solution(x, y, &sol, params))
}

impl SvmModel {
    pub fn from_solution<V: AsRef<[f64]>>(
        x: &[V],
        y: &[u8],
        sol: &DualSolution,
        params: &SvmParams,
    ) -> Self {
        let mut support_vectors = Vec::new();
        let mut dual_coef = Vec::new();
        for (t, &a) in sol.alphas.iter().enumerate() {
            if a > 1e-12 * sol.upper[t] {
                support_vectors.push(x[t].as_ref().to_vec());
                dual_coef.push(a * signed(y[t]));
            }
        }
        SvmModel {
            support_vectors,
            dual_coef,
            bias: sol.bias,
            kernel: params.kernel,
            c: params.c,
            info: SvmTrainingInfo {
                tol: params.tol,
                max_passes: params.max_passes,
                seed: params.seed,
                class_weight: params.class_weight,
                converged: sol.converged,
                iterations: sol.iterations,
                dual_objective: sol.objective,
            },
        }
    }

    /// Dimension of the support vectors, `None` when there are none.
    pub fn dim(&self) -> Option<usize> {
        self.support_vectors.first().map(Vec::len)
    }

    /// `sum_i coef_i k(sv_i, x) + b`.
    pub fn decision(&self, x: &[f64]) -> Result<f64> {
        if let Some(d) = self.dim() {
            if d != x.len() {
                return Err(ClassicalError::Dimension {
                    expected: d,
                    got: x.len(),
                });
            }
        }
        Ok(self
            .support_vectors
            .iter()
            .zip(&self.dual_coef)
            .map(|(sv, c)| c * self.kernel.eval_unchecked(sv, x))
            .sum::<f64>()
            + self.bias)
    }

    /// Attack (1) iff the decision value is `>= 0`.
    pub fn predict(&self, x: &[f64]) -> Result<u8> {
        Ok(u8::from(self.decision(x)? >= 0.0))
    }

    pub fn predict_batch<V: AsRef<[f64]> + Sync>(&self, xs: &[V]) -> Result<Vec<u8>> {
        use rayon::prelude::*;
        xs.par_iter().map(|x| self.predict(x.as_ref())).collect()
    }
}

pub fn predict_svm(m: &SvmModel, x: &[f64]) -> Result<u8> {
    m.predict(x)
}

/// Outcome of checking complementary slackness on a training set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktAudit {
    pub violations: usize,
    pub max_violation: f64,
}

impl KktAudit {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Checks, with margins `m_i = y_i f(x_i)` from the model:
/// `a_i = 0 => m_i >= 1 - tol`, `a_i = C_i => m_i <= 1 + tol`,
/// otherwise `|m_i - 1| <= tol`.
pub fn kkt_audit<V: AsRef<[f64]>>(
    model: &SvmModel,
    sol: &DualSolution,
    x: &[V],
    y: &[u8],
    tol: f64,
) -> Result<KktAudit> {
    let mut audit = KktAudit {
        violations: 0,
        max_violation: 0.0,
    };
    for (t, (xt, &yt)) in x.iter().zip(y).enumerate() {
        let m = signed(yt) * model.decision(xt.as_ref())?;
        let a = sol.alphas[t];
        let excess = if a <= 0.0 {
            (1.0 - m).max(0.0)
        } else if a >= sol.upper[t] {
            (m - 1.0).max(0.0)
        } else {
            (m - 1.0).abs()
        };
        audit.max_violation = audit.max_violation.max(excess);
        if excess > tol {
            audit.violations += 1;
        }
    }
    Ok(audit)
}

/// Dual objective `sum(a) - 1/2 sum_ij a_i a_j y_i y_j k(x_i, x_j)`, computed
/// directly from the kernel.
pub fn dual_objective<V: AsRef<[f64]>>(kernel: &KernelSpec, x: &[V], y: &[u8], alphas: &[f64]) -> f64 {
    let mut quad = 0.0;
    for i in 0..x.len() {
        for j in 0..x.len() {
            quad += alphas[i] * alphas[j] * signed(y[i]) * signed(y[j])
                * kernel.eval_unchecked(x[i].as_ref(), x[j].as_ref());
        }
    }
    alphas.iter().sum::<f64>() - 0.5 * quad
}
