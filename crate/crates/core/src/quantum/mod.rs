//! Statevector simulation of the embedding circuit.

mod circuit;
pub mod io;
pub mod oracle;
mod state;

use thiserror::Error;

pub use circuit::{
    angle_encode, apply_strongly_entangling, embed, entangling_range, init_weights, measure_all_z,
    strongly_entangling_gates, Embedding, EmbeddingCircuit, VqcWeights,
};
pub use oracle::dense_unitary_oracle;
pub use state::{QuantumState, MAX_QUBITS};

#[derive(Debug, Error, PartialEq)]
pub enum QuantumError {
    #[error("register of {0} qubits outside 1..={max}", max = MAX_QUBITS)]
    RegisterSize(usize),
    #[error("qubit {qubit} out of range for {n_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },
    #[error("control and target are both qubit {0}")]
    SameQubit(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("weights need {expected} angles, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("circuit depth must be at least 1")]
    ZeroDepth,
    #[error("non-finite angle")]
    NonFinite,
    #[error("invalid amplitudes: {0}")]
    BadAmplitudes(String),
    #[error("dense oracle limited to {max} qubits, got {0}", max = oracle::ORACLE_MAX_QUBITS)]
    OracleTooLarge(usize),
    #[error("malformed {what} file line {line}: {reason}")]
    Parse {
        what: &'static str,
        line: usize,
        reason: String,
    },
}

pub type Result<T> = std::result::Result<T, QuantumError>;

/// Gate descriptor shared by the simulator and the dense oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    Ry { qubit: usize, theta: f64 },
    Rz { qubit: usize, phi: f64 },
    /// `RZ(omega) RY(theta) RZ(phi)`; `phi` acts first.
    Rot {
        qubit: usize,
        phi: f64,
        theta: f64,
        omega: f64,
    },
    Cnot { control: usize, target: usize },
}
