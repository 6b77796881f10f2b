//! Binary logistic regression trained by full-batch gradient descent on the
//! (optionally class-weighted) mean cross-entropy.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_training_set, sample_weights, ClassWeight, ClassicalError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRegParams {
    pub lr: f64,
    pub epochs: usize,
    pub seed: u64,
    pub class_weight: ClassWeight,
}

impl Default for LogRegParams {
    fn default() -> Self {
        LogRegParams {
            lr: 0.1,
            epochs: 1000,
            seed: 0,
            class_weight: ClassWeight::None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogRegModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub params: LogRegParams,
}

#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
#[inline]
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Weighted mean binary cross-entropy at `(w, b)`.
pub fn loss<V: AsRef<[f64]>>(w: &[f64], b: f64, x: &[V], y: &[u8], sw: &[f64]) -> f64 {
    let total: f64 = sw.iter().sum();
    x.iter()
        .zip(y)
        .zip(sw)
        .map(|((xi, &yi), s)| {
            let z = dot(w, xi.as_ref()) + b;
            s * (softplus(z) - f64::from(yi) * z)
        })
        .sum::<f64>()
        / total
}

/// Analytic gradient of [`loss`]: `(dL/dw, dL/db)`.
pub fn gradient<V: AsRef<[f64]>>(
    w: &[f64],
    b: f64,
    x: &[V],
    y: &[u8],
    sw: &[f64],
) -> (Vec<f64>, f64) {
    let total: f64 = sw.iter().sum();
    let mut gw = vec![0.0; w.len()];
    let mut gb = 0.0;
    for ((xi, &yi), s) in x.iter().zip(y).zip(sw) {
        let xi = xi.as_ref();
        let r = s * (sigmoid(dot(w, xi) + b) - f64::from(yi));
        for (g, v) in gw.iter_mut().zip(xi) {
            *g += r * v;
        }
        gb += r;
    }
    gw.iter_mut().for_each(|g| *g /= total);
    (gw, gb / total)
}

pub fn train_logreg<V: AsRef<[f64]>>(x: &[V], y: &[u8], params: &LogRegParams) -> Result<LogRegModel> {
    let d = check_training_set(x, y)?;
    if !(params.lr > 0.0 && params.lr.is_finite()) {
        return Err(ClassicalError::InvalidParam(format!(
            "learning rate must be positive, got {}",
            params.lr
        )));
    }
    let sw = sample_weights(y, params.class_weight);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut w: Vec<f64> = (0..d).map(|_| rng.random_range(-0.01..0.01)).collect();
    let mut b = 0.0;
    for _ in 0..params.epochs {
        let (gw, gb) = gradient(&w, b, x, y, &sw);
        for (wi, g) in w.iter_mut().zip(&gw) {
            *wi -= params.lr * g;
        }
        b -= params.lr * gb;
    }
    if w.iter().any(|v| !v.is_finite()) || !b.is_finite() {
        return Err(ClassicalError::Diverged);
    }
    Ok(LogRegModel {
        weights: w,
        bias: b,
        params: *params,
    })
}

impl LogRegModel {
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn probability(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(ClassicalError::Dimension {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(sigmoid(dot(&self.weights, x) + self.bias))
    }

    /// `(label, p)`; ties at `p = 0.5` go to the attack class.
    pub fn predict(&self, x: &[f64]) -> Result<(u8, f64)> {
        let p = self.probability(x)?;
        Ok((u8::from(p >= 0.5), p))
    }

    pub fn predict_batch<V: AsRef<[f64]>>(&self, xs: &[V]) -> Result<Vec<u8>> {
        xs.iter().map(|x| self.predict(x.as_ref()).map(|(l, _)| l)).collect()
    }
}

pub fn predict_logreg(m: &LogRegModel, x: &[f64]) -> Result<(u8, f64)> {
    m.predict(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn sigmoid_values() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(800.0) == 1.0);
        assert!(sigmoid(-800.0) >= 0.0);
        assert_abs_diff_eq!(sigmoid(2.0) + sigmoid(-2.0), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn zero_model_ties_to_attack() {
        let m = LogRegModel {
            weights: vec![0.0, 0.0],
            bias: 0.0,
            params: LogRegParams::default(),
        };
        assert_eq!(m.predict(&[0.3, 0.9]).unwrap(), (1, 0.5));
        assert!(m.predict(&[0.3]).is_err());
        let big = LogRegModel { weights: vec![100.0, 0.0], bias: 0.0, params: LogRegParams::default() };
        assert!(big.predict(&[10.0, 0.0]).unwrap().1 > 1.0 - 1e-12);
    }

    #[test]
    fn separable_1d() {
        let x = vec![vec![0.0], vec![1.0]];
        let m = train_logreg(&x, &[0, 1], &LogRegParams::default()).unwrap();
        assert_eq!(m.predict(&[0.0]).unwrap().0, 0);
        assert_eq!(m.predict(&[1.0]).unwrap().0, 1);
        let boundary = -m.bias / m.weights[0];
        assert!(boundary > 0.0 && boundary < 1.0, "{boundary}");
    }

    #[test]
    fn identical_features_give_prior() {
        // Optimum: any (w, b) with w.x + b = logit(prior); prediction = prior.
        let x = vec![vec![0.5, 0.5]; 10];
        let y = [1, 1, 1, 0, 0, 0, 0, 0, 0, 0];
        let params = LogRegParams { epochs: 5000, lr: 0.5, ..Default::default() };
        let m = train_logreg(&x, &y, &params).unwrap();
        assert_abs_diff_eq!(m.probability(&[0.5, 0.5]).unwrap(), 0.3, epsilon = 1e-4);
    }

    #[test]
    fn rejects_bad_input() {
        let x = vec![vec![0.0], vec![1.0]];
        assert!(matches!(
            train_logreg(&x, &[1, 1], &LogRegParams::default()),
            Err(ClassicalError::SingleClass)
        ));
        let x = vec![vec![f64::NAN], vec![1.0]];
        assert!(matches!(
            train_logreg(&x, &[0, 1], &LogRegParams::default()),
            Err(ClassicalError::NonFinite)
        ));
    }

    #[test]
    fn seed_determinism() {
        let x = vec![vec![0.1, 0.4], vec![0.9, 0.2], vec![0.5, 0.5], vec![0.3, 0.8]];
        let y = [0, 1, 1, 0];
        let p = LogRegParams { seed: 4, epochs: 50, ..Default::default() };
        assert_eq!(train_logreg(&x, &y, &p).unwrap(), train_logreg(&x, &y, &p).unwrap());
    }
}
