//! Brute-force reference: every gate is lifted to a full `2^n x 2^n` matrix by
//! Kronecker products and the circuit unitary is their ordered product. Only
//! meant for verifying the in-place kernels on small registers.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{Gate, QuantumError, QuantumState, Result};

pub const ORACLE_MAX_QUBITS: usize = 4;

type CMatrix = DMatrix<Complex64>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn ry(theta: f64) -> CMatrix {
    let (s, co) = (theta / 2.0).sin_cos();
    CMatrix::from_row_slice(2, 2, &[c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0)])
}

fn rz(phi: f64) -> CMatrix {
    CMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::from_polar(1.0, -phi / 2.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            Complex64::from_polar(1.0, phi / 2.0),
        ],
    )
}

fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
}

fn projector(bit: usize) -> CMatrix {
    let mut p = CMatrix::zeros(2, 2);
    p[(bit, bit)] = c(1.0, 0.0);
    p
}

/// `factors[q]` acts on qubit `q`; qubit 0 is the leftmost Kronecker factor.
fn kron_chain(factors: &[CMatrix]) -> CMatrix {
    factors
        .iter()
        .skip(1)
        .fold(factors[0].clone(), |acc, f| acc.kronecker(f))
}

fn lift_single(n: usize, qubit: usize, m: CMatrix) -> CMatrix {
    let factors: Vec<CMatrix> = (0..n)
        .map(|q| if q == qubit { m.clone() } else { CMatrix::identity(2, 2) })
        .collect();
    kron_chain(&factors)
}

fn check(n: usize, q: usize) -> Result<()> {
    if q >= n {
        Err(QuantumError::QubitOutOfRange { qubit: q, n_qubits: n })
    } else {
        Ok(())
    }
}

/// Full-register matrix of one gate.
pub fn gate_matrix(gate: &Gate, n: usize) -> Result<CMatrix> {
    Ok(match *gate {
        Gate::Ry { qubit, theta } => {
            check(n, qubit)?;
            lift_single(n, qubit, ry(theta))
        }
        Gate::Rz { qubit, phi } => {
            check(n, qubit)?;
            lift_single(n, qubit, rz(phi))
        }
        Gate::Rot {
            qubit,
            phi,
            theta,
            omega,
        } => {
            check(n, qubit)?;
            lift_single(n, qubit, rz(omega) * ry(theta) * rz(phi))
        }
        Gate::Cnot { control, target } => {
            check(n, control)?;
            check(n, target)?;
            if control == target {
                return Err(QuantumError::SameQubit(control));
            }
            let branch = |ctrl_bit: usize| {
                let factors: Vec<CMatrix> = (0..n)
                    .map(|q| {
                        if q == control {
                            projector(ctrl_bit)
                        } else if q == target && ctrl_bit == 1 {
                            pauli_x()
                        } else {
                            CMatrix::identity(2, 2)
                        }
                    })
                    .collect();
                kron_chain(&factors)
            };
            branch(0) + branch(1)
        }
    })
}

/// Unitary of the whole sequence, `U = G_k ... G_2 G_1`.
pub fn dense_unitary_oracle(gates: &[Gate], n_qubits: usize) -> Result<CMatrix> {
    if n_qubits == 0 {
        return Err(QuantumError::RegisterSize(n_qubits));
    }
    if n_qubits > ORACLE_MAX_QUBITS {
        return Err(QuantumError::OracleTooLarge(n_qubits));
    }
    let dim = 1 << n_qubits;
    gates
        .iter()
        .try_fold(CMatrix::identity(dim, dim), |u, g| Ok(gate_matrix(g, n_qubits)? * u))
}

/// `U |psi>` as a plain amplitude vector.
pub fn oracle_apply(u: &CMatrix, state: &QuantumState) -> Vec<Complex64> {
    let psi = nalgebra::DVector::from_column_slice(state.amplitudes());
    (u * psi).iter().copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_is_identity() {
        let u = dense_unitary_oracle(&[], 3).unwrap();
        assert_eq!(u, CMatrix::identity(8, 8));
    }

    #[test]
    fn ry_on_qubit0_is_left_kron() {
        let theta = 0.77;
        let u = dense_unitary_oracle(&[Gate::Ry { qubit: 0, theta }], 2).unwrap();
        let expected = ry(theta).kronecker(&CMatrix::identity(2, 2));
        assert!((u - expected).norm() < 1e-15);
    }

    #[test]
    fn cnot_matrix_permutes_basis() {
        let u = dense_unitary_oracle(&[Gate::Cnot { control: 0, target: 1 }], 2).unwrap();
        // |10> -> |11>
        assert_eq!(u[(3, 2)], c(1.0, 0.0));
        assert_eq!(u[(2, 3)], c(1.0, 0.0));
        assert_eq!(u[(0, 0)], c(1.0, 0.0));
        assert_eq!(u[(1, 1)], c(1.0, 0.0));
    }

    #[test]
    fn too_large_rejected() {
        assert!(matches!(
            dense_unitary_oracle(&[], 5),
            Err(QuantumError::OracleTooLarge(5))
        ));
    }

    #[test]
    fn unitarity() {
        let gates = [
            Gate::Rot { qubit: 0, phi: 0.3, theta: 1.2, omega: -0.5 },
            Gate::Cnot { control: 2, target: 0 },
            Gate::Ry { qubit: 1, theta: 2.2 },
            Gate::Rz { qubit: 2, phi: 0.9 },
            Gate::Cnot { control: 1, target: 2 },
        ];
        let u = dense_unitary_oracle(&gates, 3).unwrap();
        let err = (u.adjoint() * &u - CMatrix::identity(8, 8)).camax();
        assert!(err < 1e-12, "{err}");
    }
}
