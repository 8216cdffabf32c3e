//! Dense exact evolution, the trusted reference for fidelities.

use num_complex::Complex64;

use super::gates;
use super::state::StateVector;
use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianSpec;
use crate::linalg::{eigh, CMatrix, CVector};

pub const DEFAULT_DENSE_LIMIT: usize = 12;

/// Dense `2ⁿ × 2ⁿ` matrix of a Pauli-sum Hamiltonian.
pub fn dense_matrix(h: &HamiltonianSpec, limit: usize) -> Result<CMatrix> {
    let n = h.n_qubits();
    if n > limit {
        return Err(Error::DenseLimit { n, limit });
    }
    let dim = 1usize << n;
    let mut m = CMatrix::zeros(dim, dim);
    let mut e = CVector::zeros(dim);
    for j in 0..dim {
        e.fill(Complex64::new(0.0, 0.0));
        e[j] = Complex64::new(1.0, 0.0);
        for (c, p) in h.terms() {
            let col = gates::apply_pauli_raw(p, &e);
            for (i, v) in col.iter().enumerate() {
                if v.re != 0.0 || v.im != 0.0 {
                    m[(i, j)] += c * v;
                }
            }
        }
    }
    Ok(m)
}

/// Diagonalizes `H` once and evolves any number of states and times.
#[derive(Clone, Debug)]
pub struct DenseEvolver {
    n_qubits: usize,
    energies: Vec<f64>,
    basis: CMatrix,
}

impl DenseEvolver {
    pub fn new(h: &HamiltonianSpec) -> Result<Self> {
        Self::with_limit(h, DEFAULT_DENSE_LIMIT)
    }

    pub fn with_limit(h: &HamiltonianSpec, limit: usize) -> Result<Self> {
        if !h.is_hermitian() {
            return Err(Error::Contract("exact evolution needs a Hermitian Hamiltonian".into()));
        }
        let m = dense_matrix(h, limit)?;
        let (energies, basis) = eigh(&m);
        Ok(Self {
            n_qubits: h.n_qubits(),
            energies,
            basis,
        })
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// `e^{-iHt} v` for a raw vector.
    pub fn evolve_vector(&self, v: &CVector, t: f64) -> CVector {
        let mut coords = self.basis.adjoint() * v;
        for (c, e) in coords.iter_mut().zip(&self.energies) {
            *c *= Complex64::from_polar(1.0, -e * t);
        }
        &self.basis * coords
    }

    pub fn evolve(&self, s: &StateVector, t: f64) -> Result<StateVector> {
        if s.n_qubits() != self.n_qubits {
            return Err(Error::Dimension {
                expected: self.n_qubits,
                found: s.n_qubits(),
            });
        }
        let v = self.evolve_vector(s.amplitudes(), t);
        // Renormalize away the last few ulps of round-off.
        StateVector::normalized(self.n_qubits, v)
    }
}

/// `e^{-iHt}|s⟩` via dense diagonalization.
pub fn exact_evolve(h: &HamiltonianSpec, s: &StateVector, t: f64) -> Result<StateVector> {
    DenseEvolver::new(h)?.evolve(s, t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_time_is_identity() {
        let h = HamiltonianSpec::heisenberg_xyz(2, [1.0, 2.0, 3.0]).unwrap();
        let s = StateVector::layered_random(2, 5, 1);
        let r = exact_evolve(&h, &s, 0.0).unwrap();
        assert!((r.inner(&s).norm() - 1.0).abs() < 1e-13);
        assert!((r.amplitudes() - s.amplitudes()).norm() < 1e-13);
    }

    #[test]
    fn xy_pair_closed_form() {
        let h = HamiltonianSpec::xy_pair();
        let s = StateVector::basis("10").unwrap();
        for &t in &[0.1, 0.7, 2.3, 9.9] {
            let r = exact_evolve(&h, &s, t).unwrap();
            let a = r.amplitudes();
            assert!((a[2] - Complex64::new((2.0 * t).cos(), 0.0)).norm() < 1e-12);
            assert!((a[1] - Complex64::new(0.0, -(2.0 * t).sin())).norm() < 1e-12);
        }
    }

    #[test]
    fn z_eigenstate_picks_up_phase() {
        let h = HamiltonianSpec::from_labels(1, &[(1.0, "Z")]).unwrap();
        let r = exact_evolve(&h, &StateVector::zero(1), 0.8).unwrap();
        assert!((r.amplitudes()[0] - Complex64::from_polar(1.0, -0.8)).norm() < 1e-14);
    }

    #[test]
    fn dense_limit_is_enforced() {
        let h = HamiltonianSpec::heisenberg_xyz(4, [1.0, 1.0, 1.0]).unwrap();
        assert!(matches!(
            DenseEvolver::with_limit(&h, 3),
            Err(Error::DenseLimit { n: 4, limit: 3 })
        ));
    }
}
