//! Angle encoding, strongly-entangling layers and Pauli-Z readout.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::state::{QuantumState, MAX_QUBITS};
use super::{Gate, QuantumError, Result};

/// Euler angles for every (layer, qubit), stored layer-major then
/// qubit-major as `(phi, theta, omega)` triples.
#[derive(Debug, Clone, PartialEq)]
pub struct VqcWeights {
    n_qubits: usize,
    depth: usize,
    angles: Vec<f64>,
}

impl VqcWeights {
    pub fn new(n_qubits: usize, depth: usize, angles: Vec<f64>) -> Result<Self> {
        if !(1..=MAX_QUBITS).contains(&n_qubits) {
            return Err(QuantumError::RegisterSize(n_qubits));
        }
        if depth == 0 {
            return Err(QuantumError::ZeroDepth);
        }
        let expected = depth * n_qubits * 3;
        if angles.len() != expected {
            return Err(QuantumError::Shape {
                expected,
                got: angles.len(),
            });
        }
        if angles.iter().any(|a| !a.is_finite()) {
            return Err(QuantumError::NonFinite);
        }
        Ok(VqcWeights {
            n_qubits,
            depth,
            angles,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    /// `[phi, theta, omega]` for one qubit in one layer.
    pub fn get(&self, layer: usize, qubit: usize) -> [f64; 3] {
        let at = (layer * self.n_qubits + qubit) * 3;
        [self.angles[at], self.angles[at + 1], self.angles[at + 2]]
    }
}

/// Draws every angle i.i.d. uniform on `[0, 2pi)` from a seeded ChaCha8 stream.
pub fn init_weights(n_qubits: usize, depth: usize, seed: u64) -> Result<VqcWeights> {
    if !(1..=MAX_QUBITS).contains(&n_qubits) {
        return Err(QuantumError::RegisterSize(n_qubits));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let angles = (0..depth * n_qubits * 3)
        .map(|_| rng.random_range(0.0..TAU))
        .collect();
    VqcWeights::new(n_qubits, depth, angles)
}

/// CNOT offset used by `layer` of an `n_qubits` register; `None` when there
/// is nothing to entangle.
pub fn entangling_range(layer: usize, n_qubits: usize) -> Option<usize> {
    (n_qubits > 1).then(|| layer % (n_qubits - 1) + 1)
}

/// `RY(scale * x_i)` on qubit `i`.
pub fn angle_encode(state: &mut QuantumState, x: &[f64], angle_scale: f64) -> Result<()> {
    if x.len() != state.n_qubits() {
        return Err(QuantumError::Dimension {
            expected: state.n_qubits(),
            got: x.len(),
        });
    }
    for (q, &xi) in x.iter().enumerate() {
        state.apply_ry(q, angle_scale * xi)?;
    }
    Ok(())
}

/// Per layer: `Rot` on every qubit, then the CNOT ring
/// `CNOT(q, (q + r) mod n)` for `q = 0..n`.
pub fn apply_strongly_entangling(state: &mut QuantumState, w: &VqcWeights) -> Result<()> {
    let n = state.n_qubits();
    if w.n_qubits() != n {
        return Err(QuantumError::Dimension {
            expected: n,
            got: w.n_qubits(),
        });
    }
    for layer in 0..w.depth() {
        for q in 0..n {
            let [phi, theta, omega] = w.get(layer, q);
            state.apply_rot(q, phi, theta, omega)?;
        }
        if let Some(r) = entangling_range(layer, n) {
            for q in 0..n {
                state.apply_cnot(q, (q + r) % n)?;
            }
        }
    }
    Ok(())
}

/// The entangling layers as an explicit gate list, in application order.
pub fn strongly_entangling_gates(w: &VqcWeights) -> Vec<Gate> {
    let n = w.n_qubits();
    let mut gates = Vec::with_capacity(w.depth() * n * 2);
    for layer in 0..w.depth() {
        for qubit in 0..n {
            let [phi, theta, omega] = w.get(layer, qubit);
            gates.push(Gate::Rot {
                qubit,
                phi,
                theta,
                omega,
            });
        }
        if let Some(r) = entangling_range(layer, n) {
            gates.extend((0..n).map(|q| Gate::Cnot {
                control: q,
                target: (q + r) % n,
            }));
        }
    }
    gates
}

/// One Pauli-Z expectation per qubit, each in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding(Vec<f64>);

impl Embedding {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub fn measure_all_z(state: &QuantumState) -> Embedding {
    Embedding(
        (0..state.n_qubits())
            .map(|q| state.expval_z(q).expect("qubit index in range"))
            .collect(),
    )
}

/// Encoding followed by optional entangling layers, read out as exact `<Z>`
/// per qubit. Holds no mutable state, so a shared reference can embed from
/// many threads at once.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingCircuit {
    n_qubits: usize,
    layers: Option<VqcWeights>,
    angle_scale: f64,
}

impl EmbeddingCircuit {
    pub fn new(weights: VqcWeights, angle_scale: f64) -> Self {
        EmbeddingCircuit {
            n_qubits: weights.n_qubits(),
            layers: Some(weights),
            angle_scale,
        }
    }

    /// Angle encoding only; the readout is then `cos(scale * x_i)`.
    pub fn encoding_only(n_qubits: usize, angle_scale: f64) -> Result<Self> {
        if !(1..=MAX_QUBITS).contains(&n_qubits) {
            return Err(QuantumError::RegisterSize(n_qubits));
        }
        Ok(EmbeddingCircuit {
            n_qubits,
            layers: None,
            angle_scale,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn weights(&self) -> Option<&VqcWeights> {
        self.layers.as_ref()
    }

    pub fn angle_scale(&self) -> f64 {
        self.angle_scale
    }

    pub fn final_state(&self, x: &[f64]) -> Result<QuantumState> {
        let mut state = QuantumState::new(self.n_qubits)?;
        angle_encode(&mut state, x, self.angle_scale)?;
        if let Some(w) = &self.layers {
            apply_strongly_entangling(&mut state, w)?;
        }
        Ok(state)
    }

    pub fn embed(&self, x: &[f64]) -> Result<Embedding> {
        Ok(measure_all_z(&self.final_state(x)?))
    }

    /// Embeds every row in parallel; output order follows input order.
    pub fn embed_batch<V: AsRef<[f64]> + Sync>(&self, xs: &[V]) -> Result<Vec<Embedding>> {
        xs.par_iter().map(|x| self.embed(x.as_ref())).collect()
    }
}

/// `new_state -> angle_encode -> entangling layers -> <Z>` with unit angle scale.
pub fn embed(x: &[f64], w: &VqcWeights) -> Result<Embedding> {
    let mut state = QuantumState::new(w.n_qubits())?;
    angle_encode(&mut state, x, 1.0)?;
    apply_strongly_entangling(&mut state, w)?;
    Ok(measure_all_z(&state))
}
