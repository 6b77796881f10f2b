use std::fmt;

use super::{ClassicalError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelSpec {
    Linear,
    Rbf { gamma: f64 },
}

impl KernelSpec {
    pub fn rbf(gamma: f64) -> Result<Self> {
        if gamma > 0.0 && gamma.is_finite() {
            Ok(KernelSpec::Rbf { gamma })
        } else {
            Err(ClassicalError::InvalidParam(format!(
                "rbf gamma must be positive and finite, got {gamma}"
            )))
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            KernelSpec::Linear => "linear",
            KernelSpec::Rbf { .. } => "rbf",
        }
    }

    /// Kernel value without the dimension check; callers guarantee equal lengths.
    #[inline]
    pub(crate) fn eval_unchecked(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            KernelSpec::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
            KernelSpec::Rbf { gamma } => {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-gamma * d2).exp()
            }
        }
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelSpec::Linear => write!(f, "linear"),
            KernelSpec::Rbf { gamma } => write!(f, "rbf(gamma={gamma})"),
        }
    }
}

/// `a . b` for linear, `exp(-gamma |a - b|^2)` for rbf.
pub fn kernel_eval(k: &KernelSpec, a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(ClassicalError::Dimension {
            expected: a.len(),
            got: b.len(),
        });
    }
    Ok(k.eval_unchecked(a, b))
}

/// `1 / (d * var(X))` with the population variance pooled over every entry.
pub fn gamma_scale<V: AsRef<[f64]>>(x: &[V]) -> Result<f64> {
    let d = x
        .first()
        .ok_or(ClassicalError::Empty)?
        .as_ref()
        .len();
    if d == 0 {
        return Err(ClassicalError::Empty);
    }
    let mut count = 0usize;
    let mut sum = 0.0;
    for row in x {
        let row = row.as_ref();
        if row.len() != d {
            return Err(ClassicalError::Dimension {
                expected: d,
                got: row.len(),
            });
        }
        sum += row.iter().sum::<f64>();
        count += d;
    }
    let mean = sum / count as f64;
    let var = x
        .iter()
        .flat_map(|r| r.as_ref().iter())
        .map(|v| (v - mean) * (v - mean))
        .sum::<f64>()
        / count as f64;
    if var <= 0.0 || !var.is_finite() {
        return Err(ClassicalError::ZeroVariance);
    }
    Ok(1.0 / (d as f64 * var))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn closed_forms() {
        let k = KernelSpec::rbf(0.7).unwrap();
        assert_eq!(kernel_eval(&k, &[0.3, 0.2], &[0.3, 0.2]).unwrap(), 1.0);
        assert_eq!(kernel_eval(&KernelSpec::Linear, &[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        // |a-b|^2 = 1/gamma
        let g = 4.0;
        let v = kernel_eval(&KernelSpec::rbf(g).unwrap(), &[0.0], &[0.5]).unwrap();
        assert_abs_diff_eq!(v, (-1.0f64).exp(), epsilon = 1e-15);
        assert!(kernel_eval(&k, &[1.0], &[1.0, 2.0]).is_err());
        assert!(KernelSpec::rbf(0.0).is_err());
    }

    #[test]
    fn gamma_scale_examples() {
        let x = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        assert_abs_diff_eq!(gamma_scale(&x).unwrap(), 2.0, epsilon = 1e-15);
        let x = vec![vec![0.0], vec![2.0]];
        assert_abs_diff_eq!(gamma_scale(&x).unwrap(), 1.0, epsilon = 1e-15);
        let x = vec![vec![3.0, 3.0]; 4];
        assert!(matches!(gamma_scale(&x), Err(ClassicalError::ZeroVariance)));
    }
}
