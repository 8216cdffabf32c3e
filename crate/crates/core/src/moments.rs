//! Cumulative K-moment operator sets.
//!
//! The ansatz states are `|χ_i⟩ = P_i|φ⟩` where `P_i` ranges over products of
//! at most `K` Hamiltonian strings. Two products that differ only by a global
//! phase give the same ray, so the set is kept modulo phase: every entry is a
//! canonical string and appears once.

use std::collections::HashSet;

use nalgebra::SVD;

use crate::backend::{apply_hamiltonian, StateVector};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector};
pub use crate::hamiltonian::{Boundary, HamiltonianSpec};
use crate::pauli::PauliString;

#[derive(Clone, Debug, PartialEq)]
pub struct MomentSet {
    n_qubits: usize,
    ops: Vec<PauliString>,
    level_of: Vec<usize>,
    k: usize,
}

/// Breadth-first products of Hamiltonian strings up to length `k`.
///
/// Order: identity, then level 1 in term order, then each deeper level in
/// the order its products are first met (outer loop over the previous level,
/// inner loop over terms, new string multiplied on the left).
pub fn build_moment_set(h: &HamiltonianSpec, k: usize) -> MomentSet {
    let n = h.n_qubits();
    let identity = PauliString::identity(n);
    let mut ops = vec![identity];
    let mut level_of = vec![0];
    let mut seen: HashSet<PauliString> = HashSet::from([identity]);

    // Canonical members of S_{p-1}; includes strings already met at lower
    // levels, since those still seed new products.
    let mut frontier = vec![identity];
    for level in 1..=k {
        let mut next = Vec::new();
        let mut next_seen = HashSet::new();
        for q in &frontier {
            for term in h.strings() {
                let (prod, _) = term.mul_same_size(q).canonicalize();
                if next_seen.insert(prod) {
                    next.push(prod);
                }
                if seen.insert(prod) {
                    ops.push(prod);
                    level_of.push(level);
                }
            }
        }
        frontier = next;
    }
    MomentSet {
        n_qubits: n,
        ops,
        level_of,
        k,
    }
}

impl MomentSet {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn ops(&self) -> &[PauliString] {
        &self.ops
    }

    /// Smallest `p` with `ops[i] ∈ S_p`.
    pub fn level_of(&self, i: usize) -> usize {
        self.level_of[i]
    }

    /// `|CS_p|` for `p = 0 … K`.
    pub fn cumulative_sizes(&self) -> Vec<usize> {
        (0..=self.k)
            .map(|p| self.level_of.iter().filter(|&&l| l <= p).count())
            .collect()
    }

    pub fn contains(&self, p: &PauliString) -> bool {
        self.ops.contains(&p.canonicalize().0)
    }

    pub fn labels(&self) -> Vec<String> {
        self.ops.iter().map(|p| p.letters()).collect()
    }

    /// Dense ansatz states `ops[i]|φ⟩` as matrix columns.
    pub fn basis_matrix(&self, phi: &StateVector) -> Result<CMatrix> {
        if phi.n_qubits() != self.n_qubits {
            return Err(Error::Dimension {
                expected: self.n_qubits,
                found: phi.n_qubits(),
            });
        }
        let mut b = CMatrix::zeros(phi.dim(), self.len());
        for (i, p) in self.ops.iter().enumerate() {
            b.set_column(i, phi.apply_pauli(p)?.amplitudes());
        }
        Ok(b)
    }

    /// `Σ_i α_i ops[i]|φ⟩`.
    pub fn combine(&self, phi: &StateVector, alpha: &CVector) -> Result<CVector> {
        if alpha.len() != self.len() {
            return Err(Error::Dimension {
                expected: self.len(),
                found: alpha.len(),
            });
        }
        Ok(self.basis_matrix(phi)? * alpha)
    }
}

/// Norm of the part of `H^{m-1}|φ⟩` lying outside `span{ops[i]|φ⟩}`.
pub fn krylov_residual(
    h: &HamiltonianSpec,
    phi: &StateVector,
    m: usize,
    ms: &MomentSet,
) -> Result<f64> {
    if m == 0 || m > ms.k() + 1 {
        return Err(Error::Contract(format!(
            "Krylov order m = {m} outside 1..={}",
            ms.k() + 1
        )));
    }
    let mut v = phi.amplitudes().clone();
    for _ in 1..m {
        v = apply_hamiltonian(h, &v)?;
    }
    let b = ms.basis_matrix(phi)?;
    let svd = SVD::new(b, true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let mut proj = v.clone();
    for (j, s) in svd.singular_values.iter().enumerate() {
        if *s > 1e-10 * smax {
            let col = u.column(j);
            let c = col.dotc(&v);
            proj -= col * c;
        }
    }
    Ok(proj.norm())
}
