//! Hamiltonians given as linear combinations of Pauli strings, plus the
//! builtin spin models used by the experiment runner.

use std::collections::HashMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::PauliString;

/// `Σ_a β_a P_a` with canonical (phase-free) strings and merged duplicates.
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianSpec {
    n_qubits: usize,
    terms: Vec<(Complex64, PauliString)>,
}

/// Which sites the three-body chain sums over.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// Open chain, centre site `k = 2 … N-1`.
    #[default]
    Interior,
    /// Ring, centre site `k = 1 … N` with indices taken mod `N`.
    Periodic,
}

impl HamiltonianSpec {
    /// Builds a Hamiltonian from arbitrary (possibly phased) strings. Phases are
    /// folded into the coefficients and repeated strings are merged, keeping
    /// the position of the first occurrence.
    pub fn from_terms<I>(n_qubits: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Complex64, PauliString)>,
    {
        let mut merged: Vec<(Complex64, PauliString)> = Vec::new();
        let mut index: HashMap<PauliString, usize> = HashMap::new();
        for (coeff, string) in terms {
            if string.n_qubits() != n_qubits {
                return Err(Error::Dimension {
                    expected: n_qubits,
                    found: string.n_qubits(),
                });
            }
            let (canon, phase) = string.canonicalize();
            let c = coeff * phase;
            match index.get(&canon) {
                Some(&k) => merged[k].0 += c,
                None => {
                    index.insert(canon, merged.len());
                    merged.push((c, canon));
                }
            }
        }
        Ok(Self {
            n_qubits,
            terms: merged,
        })
    }

    /// Convenience constructor from `(real coefficient, label)` pairs.
    pub fn from_labels(n_qubits: usize, terms: &[(f64, &str)]) -> Result<Self> {
        let parsed = terms
            .iter()
            .map(|&(c, label)| Ok((Complex64::new(c, 0.0), PauliString::parse(label, n_qubits)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_terms(n_qubits, parsed)
    }

    /// XYZ Heisenberg chain `Σ_j jx X_j X_{j+1} + jy Y_j Y_{j+1} + jz Z_j Z_{j+1}`.
    pub fn heisenberg_xyz(n_qubits: usize, couplings: [f64; 3]) -> Result<Self> {
        if n_qubits < 2 {
            return Err(Error::Config("the Heisenberg chain needs at least 2 qubits".into()));
        }
        let mut terms = Vec::new();
        for j in 0..n_qubits - 1 {
            for (letter, c) in ['X', 'Y', 'Z'].into_iter().zip(couplings) {
                let a = PauliString::single(n_qubits, j, letter)?;
                let b = PauliString::single(n_qubits, j + 1, letter)?;
                terms.push((Complex64::new(c, 0.0), a.mul_same_size(&b)));
            }
        }
        Self::from_terms(n_qubits, terms)
    }

    /// Three-body chain `J Σ_k Z_{k-1} X_k Z_{k+1}`.
    pub fn three_body_zxz(n_qubits: usize, j_zxz: f64, boundary: Boundary) -> Result<Self> {
        if n_qubits < 3 {
            return Err(Error::Config("the ZXZ chain needs at least 3 qubits".into()));
        }
        let centres: Vec<usize> = match boundary {
            Boundary::Interior => (1..n_qubits - 1).collect(),
            Boundary::Periodic => (0..n_qubits).collect(),
        };
        let mut terms = Vec::new();
        for k in centres {
            let left = (k + n_qubits - 1) % n_qubits;
            let right = (k + 1) % n_qubits;
            let x = 1u64 << k;
            let z = (1u64 << left) | (1u64 << right);
            terms.push((Complex64::new(j_zxz, 0.0), PauliString::from_bits(n_qubits, x, z, 0)?));
        }
        Self::from_terms(n_qubits, terms)
    }

    /// Two-qubit XY model `X_1 X_2 + Y_1 Y_2`.
    pub fn xy_pair() -> Self {
        Self::from_labels(2, &[(1.0, "XX"), (1.0, "YY")]).expect("static labels")
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[(Complex64, PauliString)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn strings(&self) -> impl Iterator<Item = &PauliString> {
        self.terms.iter().map(|(_, p)| p)
    }

    /// Real coefficients on canonical strings make the operator Hermitian.
    pub fn is_hermitian(&self) -> bool {
        self.terms.iter().all(|(c, _)| c.im.abs() <= 1e-12)
    }
}

impl fmt::Display for HamiltonianSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (c, p)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            if c.im == 0.0 {
                write!(f, "{}*{}", c.re, p)?;
            } else {
                write!(f, "({}{:+}i)*{}", c.re, c.im, p)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_merge_and_phases_fold() {
        let x = PauliString::parse("X", 1).unwrap();
        let ix = PauliString::from_bits(1, 1, 0, 1).unwrap();
        let h = HamiltonianSpec::from_terms(
            1,
            [(Complex64::new(1.0, 0.0), x), (Complex64::new(1.0, 0.0), ix)],
        )
        .unwrap();
        assert_eq!(h.len(), 1);
        assert_eq!(h.terms()[0].0, Complex64::new(1.0, 1.0));
        assert!(!h.is_hermitian());
    }

    #[test]
    fn heisenberg_term_count() {
        let h = HamiltonianSpec::heisenberg_xyz(3, [1.0, 2.0, 3.0]).unwrap();
        assert_eq!(h.len(), 6);
        assert_eq!(h.terms()[1].1.letters(), "YYI");
        assert_eq!(h.terms()[1].0.re, 2.0);
        assert_eq!(h.terms()[5].1.letters(), "IZZ");
    }

    #[test]
    fn three_body_boundary_modes() {
        let open = HamiltonianSpec::three_body_zxz(5, 1.0, Boundary::Interior).unwrap();
        let labels: Vec<_> = open.strings().map(|p| p.letters()).collect();
        assert_eq!(labels, vec!["ZXZII", "IZXZI", "IIZXZ"]);
        let ring = HamiltonianSpec::three_body_zxz(4, 1.0, Boundary::Periodic).unwrap();
        let labels: Vec<_> = ring.strings().map(|p| p.letters()).collect();
        assert_eq!(labels, vec!["XZIZ", "ZXZI", "IZXZ", "ZIZX"]);
    }

    #[test]
    fn xy_pair_terms() {
        let h = HamiltonianSpec::xy_pair();
        assert_eq!(h.to_string(), "1*XX + 1*YY");
        assert!(h.is_hermitian());
    }

    #[test]
    fn wrong_register_size_is_rejected() {
        let x = PauliString::parse("XX", 2).unwrap();
        assert!(HamiltonianSpec::from_terms(3, [(Complex64::new(1.0, 0.0), x)]).is_err());
    }
}
