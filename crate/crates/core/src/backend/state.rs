use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::gates;
use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianSpec;
use crate::linalg::{CMatrix, CVector, ZERO};
use crate::pauli::PauliString;

/// Normalized pure state on `n_qubits` qubits. Basis index `j` has qubit 1
/// as its most significant bit.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: CVector,
}

pub const NORM_TOLERANCE: f64 = 1e-12;

impl StateVector {
    /// Wraps amplitudes that are already normalized within [`NORM_TOLERANCE`].
    pub fn from_amplitudes(n_qubits: usize, amps: CVector) -> Result<Self> {
        if amps.len() != 1usize << n_qubits {
            return Err(Error::Dimension {
                expected: 1 << n_qubits,
                found: amps.len(),
            });
        }
        let norm2 = amps.norm_squared();
        if (norm2 - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Contract(format!(
                "state is not normalized: |ψ|² = {norm2}"
            )));
        }
        Ok(Self { n_qubits, amps })
    }

    /// Normalizes arbitrary non-zero amplitudes.
    pub fn normalized(n_qubits: usize, amps: CVector) -> Result<Self> {
        let norm = amps.norm();
        if norm == 0.0 {
            return Err(Error::Contract("cannot normalize the zero vector".into()));
        }
        Self::from_amplitudes(n_qubits, amps.unscale(norm))
    }

    pub fn zero(n_qubits: usize) -> Self {
        let mut amps = CVector::zeros(1 << n_qubits);
        amps[0] = Complex64::new(1.0, 0.0);
        Self { n_qubits, amps }
    }

    /// One-hot state from a bitstring such as `"10"` (qubit 1 first).
    pub fn basis(bitstring: &str) -> Result<Self> {
        let n = bitstring.chars().count();
        if n == 0 || n > 30 {
            return Err(Error::Parse {
                token: bitstring.to_string(),
                reason: "bitstring length must be 1..=30".into(),
            });
        }
        let mut index = 0usize;
        for c in bitstring.chars() {
            index <<= 1;
            match c {
                '0' => {}
                '1' => index |= 1,
                other => {
                    return Err(Error::Parse {
                        token: other.to_string(),
                        reason: format!("bad character in bitstring `{bitstring}`"),
                    })
                }
            }
        }
        let mut amps = CVector::zeros(1 << n);
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits: n, amps })
    }

    /// Layered hardware-efficient state: each layer applies `RY(a)` then
    /// `RZ(b)` with angles drawn uniformly from `[0, 2π)` on every qubit,
    /// followed by a CNOT ladder `k → k+1`. Starts from `|0…0⟩`.
    pub fn layered_random(n_qubits: usize, n_layers: usize, seed: u64) -> Self {
        assert!(n_qubits >= 1, "need at least one qubit");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut state = Self::zero(n_qubits);
        for _ in 0..n_layers {
            for q in 0..n_qubits {
                let a = rng.random_range(0.0..TAU);
                let b = rng.random_range(0.0..TAU);
                gates::apply_single(&mut state.amps, n_qubits, q, &gates::ry(a));
                gates::apply_single(&mut state.amps, n_qubits, q, &gates::rz(b));
            }
            for q in 0..n_qubits.saturating_sub(1) {
                gates::apply_cnot(&mut state.amps, n_qubits, q, q + 1);
            }
        }
        state
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    pub fn into_amplitudes(self) -> CVector {
        self.amps
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps.dotc(&other.amps)
    }

    pub fn apply_pauli(&self, p: &PauliString) -> Result<StateVector> {
        if p.n_qubits() != self.n_qubits {
            return Err(Error::Dimension {
                expected: self.n_qubits,
                found: p.n_qubits(),
            });
        }
        Ok(Self {
            n_qubits: self.n_qubits,
            amps: gates::apply_pauli_raw(p, &self.amps),
        })
    }
}

/// `H |v⟩` for an arbitrary (unnormalized) vector.
pub fn apply_hamiltonian(h: &HamiltonianSpec, v: &CVector) -> Result<CVector> {
    if v.len() != 1usize << h.n_qubits() {
        return Err(Error::Dimension {
            expected: 1 << h.n_qubits(),
            found: v.len(),
        });
    }
    let mut out = CVector::zeros(v.len());
    for (c, p) in h.terms() {
        out += gates::apply_pauli_raw(p, v) * *c;
    }
    Ok(out)
}

/// Mixed state `ρ` on `n_qubits` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    rho: CMatrix,
}

impl DensityMatrix {
    pub fn from_pure(state: &StateVector) -> Self {
        let a = state.amplitudes();
        Self {
            n_qubits: state.n_qubits(),
            rho: a * a.adjoint(),
        }
    }

    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        Self {
            n_qubits,
            rho: CMatrix::identity(dim, dim).unscale(dim as f64),
        }
    }

    pub fn from_matrix(n_qubits: usize, rho: CMatrix) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if rho.nrows() != dim || rho.ncols() != dim {
            return Err(Error::Dimension {
                expected: dim,
                found: rho.nrows(),
            });
        }
        Ok(Self { n_qubits, rho })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.rho
    }

    pub(crate) fn matrix_mut(&mut self) -> &mut CMatrix {
        &mut self.rho
    }

    pub fn trace(&self) -> Complex64 {
        self.rho.diagonal().iter().fold(ZERO, |acc, x| acc + x)
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn fidelity_with(&self, psi: &StateVector) -> f64 {
        let a = psi.amplitudes();
        a.dotc(&(&self.rho * a)).re
    }

    /// Smallest eigenvalue of `ρ`.
    pub fn min_eigenvalue(&self) -> f64 {
        crate::linalg::eigvalsh(&self.rho)
            .first()
            .copied()
            .unwrap_or(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_states_are_one_hot() {
        let s = StateVector::basis("10").unwrap();
        assert_eq!(s.amplitudes()[2], Complex64::new(1.0, 0.0));
        assert_eq!(s.amplitudes().norm_squared(), 1.0);
        assert_eq!(StateVector::basis("00").unwrap().amplitudes()[0].re, 1.0);
        let s = StateVector::basis("101").unwrap();
        assert_eq!(s.n_qubits(), 3);
        assert_eq!(s.amplitudes()[5].re, 1.0);
        assert!(StateVector::basis("1a").is_err());
        assert!(StateVector::basis("").is_err());
    }

    #[test]
    fn zero_layers_is_all_zero_state() {
        assert_eq!(StateVector::layered_random(3, 0, 9), StateVector::zero(3));
    }

    #[test]
    fn layered_state_is_deterministic_and_normalized() {
        let a = StateVector::layered_random(2, 5, 17);
        let b = StateVector::layered_random(2, 5, 17);
        assert_eq!(a, b);
        assert!((a.amplitudes().norm_squared() - 1.0).abs() < 1e-12);
        let c = StateVector::layered_random(2, 5, 18);
        assert_ne!(a, c);
    }

    #[test]
    fn apply_pauli_examples() {
        let s = StateVector::basis("10").unwrap();
        let xx = PauliString::parse("XX", 2).unwrap();
        let r = s.apply_pauli(&xx).unwrap();
        assert_eq!(r.amplitudes()[1], Complex64::new(1.0, 0.0));
        // Y|1⟩ = -i|0⟩ and Y|0⟩ = i|1⟩, so YY|10⟩ = |01⟩.
        let yy = PauliString::parse("YY", 2).unwrap();
        let r = s.apply_pauli(&yy).unwrap();
        assert_eq!(r.amplitudes()[1], Complex64::new(1.0, 0.0));
        assert!(s.apply_pauli(&PauliString::parse("X", 1).unwrap()).is_err());
    }

    #[test]
    fn density_matrix_basics() {
        let s = StateVector::basis("10").unwrap();
        let rho = DensityMatrix::from_pure(&s);
        assert_eq!(rho.fidelity_with(&s), 1.0);
        assert!((rho.trace().re - 1.0).abs() < 1e-15);
        let mixed = DensityMatrix::maximally_mixed(2);
        assert!((mixed.fidelity_with(&s) - 0.25).abs() < 1e-15);
    }
}
