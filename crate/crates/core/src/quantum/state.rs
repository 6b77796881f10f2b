use num_complex::Complex64;

use super::{Gate, QuantumError, Result};

/// Largest register the simulator accepts.
pub const MAX_QUBITS: usize = 12;

/// Dense statevector of `2^n` amplitudes.
///
/// Qubit 0 is the most significant bit of the basis index, so for two qubits
/// the amplitude order is `|00>, |01>, |10>, |11>` with the left digit being
/// qubit 0.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl QuantumState {
    /// `|0...0>` on `n_qubits` qubits.
    pub fn new(n_qubits: usize) -> Result<Self> {
        check_register(n_qubits)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(QuantumState { n_qubits, amps })
    }

    /// Wraps caller-supplied amplitudes; the length must be a power of two and
    /// the vector must have unit norm to within `1e-10`.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(QuantumError::BadAmplitudes(format!(
                "length {len} is not a power of two >= 2"
            )));
        }
        let n_qubits = len.trailing_zeros() as usize;
        check_register(n_qubits)?;
        let norm: f64 = amps.iter().map(Complex64::norm_sqr).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(QuantumError::BadAmplitudes(format!("norm {norm} != 1")));
        }
        Ok(QuantumState { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(Complex64::norm_sqr).sum()
    }

    fn mask(&self, qubit: usize) -> Result<usize> {
        if qubit >= self.n_qubits {
            return Err(QuantumError::QubitOutOfRange {
                qubit,
                n_qubits: self.n_qubits,
            });
        }
        Ok(1 << (self.n_qubits - 1 - qubit))
    }

    /// Applies a 2x2 unitary `[[a, b], [c, d]]` to `qubit`.
    pub fn apply_single(&mut self, qubit: usize, m: [[Complex64; 2]; 2]) -> Result<()> {
        let mask = self.mask(qubit)?;
        let [[a, b], [c, d]] = m;
        for block in (0..self.amps.len()).step_by(mask << 1) {
            for i0 in block..block + mask {
                let i1 = i0 | mask;
                let (x0, x1) = (self.amps[i0], self.amps[i1]);
                self.amps[i0] = a * x0 + b * x1;
                self.amps[i1] = c * x0 + d * x1;
            }
        }
        Ok(())
    }

    /// `RY(theta) = [[cos(theta/2), -sin(theta/2)], [sin(theta/2), cos(theta/2)]]`.
    pub fn apply_ry(&mut self, qubit: usize, theta: f64) -> Result<()> {
        let mask = self.mask(qubit)?;
        let (s, c) = (theta / 2.0).sin_cos();
        for block in (0..self.amps.len()).step_by(mask << 1) {
            for i0 in block..block + mask {
                let i1 = i0 | mask;
                let (x0, x1) = (self.amps[i0], self.amps[i1]);
                self.amps[i0] = x0 * c - x1 * s;
                self.amps[i1] = x0 * s + x1 * c;
            }
        }
        Ok(())
    }

    /// `RZ(phi) = diag(e^{-i phi/2}, e^{+i phi/2})`.
    pub fn apply_rz(&mut self, qubit: usize, phi: f64) -> Result<()> {
        let mask = self.mask(qubit)?;
        let lo = Complex64::from_polar(1.0, -phi / 2.0);
        let hi = Complex64::from_polar(1.0, phi / 2.0);
        for (i, amp) in self.amps.iter_mut().enumerate() {
            *amp *= if i & mask == 0 { lo } else { hi };
        }
        Ok(())
    }

    /// `Rot(phi, theta, omega) = RZ(omega) RY(theta) RZ(phi)`, applied as one
    /// fused 2x2 matrix.
    pub fn apply_rot(&mut self, qubit: usize, phi: f64, theta: f64, omega: f64) -> Result<()> {
        let (s, c) = (theta / 2.0).sin_cos();
        let sum = (phi + omega) / 2.0;
        let diff = (phi - omega) / 2.0;
        let m = [
            [
                Complex64::from_polar(c, -sum),
                -Complex64::from_polar(s, diff),
            ],
            [
                Complex64::from_polar(s, -diff),
                Complex64::from_polar(c, sum),
            ],
        ];
        self.apply_single(qubit, m)
    }

    /// Flips `target` on every basis state whose `control` bit is set.
    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        if control == target {
            return Err(QuantumError::SameQubit(control));
        }
        let cmask = self.mask(control)?;
        let tmask = self.mask(target)?;
        for i in 0..self.amps.len() {
            if i & cmask != 0 && i & tmask == 0 {
                self.amps.swap(i, i | tmask);
            }
        }
        Ok(())
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        match *gate {
            Gate::Ry { qubit, theta } => self.apply_ry(qubit, theta),
            Gate::Rz { qubit, phi } => self.apply_rz(qubit, phi),
            Gate::Rot {
                qubit,
                phi,
                theta,
                omega,
            } => self.apply_rot(qubit, phi, theta, omega),
            Gate::Cnot { control, target } => self.apply_cnot(control, target),
        }
    }

    /// `<Z>` on `qubit`: probability mass with the bit clear minus mass with it set,
    /// clamped so rounding cannot leave `[-1, 1]`.
    pub fn expval_z(&self, qubit: usize) -> Result<f64> {
        let mask = self.mask(qubit)?;
        Ok(self
            .amps
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let p = a.norm_sqr();
                if i & mask == 0 {
                    p
                } else {
                    -p
                }
            })
            .sum::<f64>()
            .clamp(-1.0, 1.0))
    }
}

fn check_register(n_qubits: usize) -> Result<()> {
    if (1..=MAX_QUBITS).contains(&n_qubits) {
        Ok(())
    } else {
        Err(QuantumError::RegisterSize(n_qubits))
    }
}
