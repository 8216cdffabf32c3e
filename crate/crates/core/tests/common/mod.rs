//! Dense reference implementations built from Kronecker products, kept
//! independent of the library's bit-twiddling kernels.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex64;

use cqff::backend::StateVector;
use cqff::cli::config::{Builtin, HamiltonianConfig, InitialState};
use cqff::hamiltonian::HamiltonianSpec;
use cqff::moments::MomentSet;
use cqff::pauli::PauliString;

pub type M = DMatrix<Complex64>;
pub type V = DVector<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn single(letter: char) -> M {
    let (o, z) = (c(0.0, 0.0), c(1.0, 0.0));
    match letter {
        'I' => M::from_row_slice(2, 2, &[z, o, o, z]),
        'X' => M::from_row_slice(2, 2, &[o, z, z, o]),
        'Y' => M::from_row_slice(2, 2, &[o, c(0.0, -1.0), c(0.0, 1.0), o]),
        'Z' => M::from_row_slice(2, 2, &[z, o, o, -z]),
        _ => panic!("bad letter {letter}"),
    }
}

/// `⊗_q σ_q` with qubit 1 as the leftmost factor.
pub fn kron_letters(letters: &str) -> M {
    letters
        .chars()
        .fold(M::identity(1, 1), |acc, l| acc.kronecker(&single(l)))
}

pub fn pauli_dense(p: &PauliString) -> M {
    kron_letters(&p.letters()) * p.phase()
}

pub fn hamiltonian_dense(h: &HamiltonianSpec) -> M {
    let dim = 1usize << h.n_qubits();
    h.terms()
        .iter()
        .fold(M::zeros(dim, dim), |acc, (b, p)| acc + pauli_dense(p) * *b)
}

/// Columns `P_i |φ⟩`.
pub fn basis_dense(ms: &MomentSet, phi: &V) -> M {
    let mut b = M::zeros(phi.len(), ms.len());
    for (i, p) in ms.ops().iter().enumerate() {
        b.set_column(i, &(pauli_dense(p) * phi));
    }
    b
}

/// `exp(-i H t) v` for Hermitian `H`.
pub fn evolve_dense(h: &M, v: &V, t: f64) -> V {
    let eig = SymmetricEigen::new(h.clone());
    let q = &eig.eigenvectors;
    let mut w = q.adjoint() * v;
    for (k, lam) in eig.eigenvalues.iter().enumerate() {
        w[k] *= Complex64::from_polar(1.0, -lam * t);
    }
    q * w
}

/// Orthonormal basis of `range(B)` keeping singular values above
/// `rel · s_max`.
pub fn range_basis(b: &M, rel: f64) -> M {
    let svd = SVD::new(b.clone(), true, false);
    let u = svd.u.unwrap();
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] > rel * smax)
        .collect();
    M::from_fn(b.nrows(), keep.len(), |r, j| u[(r, keep[j])])
}

/// Spectrum of `H` restricted to `range(B)`, ascending.
pub fn restricted_spectrum(h: &M, b: &M, rel: f64) -> Vec<f64> {
    let q = range_basis(b, rel);
    let hr = q.adjoint() * h * &q;
    let hr = (&hr + hr.adjoint()) * c(0.5, 0.0);
    let mut ev: Vec<f64> = SymmetricEigen::new(hr).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// `Q exp(-i Q†HQ t) Q† v` with `Q` spanning `range(B)`.
pub fn restricted_evolve(h: &M, b: &M, rel: f64, v: &V, t: f64) -> V {
    let q = range_basis(b, rel);
    let hr = q.adjoint() * h * &q;
    let hr = (&hr + hr.adjoint()) * c(0.5, 0.0);
    &q * evolve_dense(&hr, &(q.adjoint() * v), t)
}

pub fn max_abs_diff(a: &M, b: &M) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// One experiment of the builtin set.
pub struct Case {
    pub name: &'static str,
    pub h: HamiltonianSpec,
    pub k: usize,
    pub observable: &'static str,
    pub layered: bool,
}

impl Case {
    pub fn state(&self, seed: u64) -> StateVector {
        let init = if self.layered {
            InitialState::Layered { layers: 5, seed }
        } else {
            InitialState::Basis("10".into())
        };
        init.prepare(self.h.n_qubits()).unwrap()
    }
}

fn builtin(b: Builtin, n: usize) -> HamiltonianSpec {
    HamiltonianConfig::builtin(b, n).build().unwrap()
}

/// The five fast-forwarding experiments.
pub fn experiments() -> Vec<Case> {
    vec![
        Case { name: "H1 2q K=1", h: builtin(Builtin::H1, 2), k: 1, observable: "Z1", layered: true },
        Case { name: "H1 3q K=2", h: builtin(Builtin::H1, 3), k: 2, observable: "Z1", layered: true },
        Case { name: "H2 4q K=2", h: builtin(Builtin::H2, 4), k: 2, observable: "Y2", layered: true },
        Case { name: "H2 5q K=3", h: builtin(Builtin::H2, 5), k: 3, observable: "Y2", layered: true },
        Case { name: "H3 2q K=2", h: builtin(Builtin::H3, 2), k: 2, observable: "Z1", layered: false },
    ]
}

/// Every builtin family at `n ≤ 5` with a moment order small enough for
/// `L ≤ 16`. The experiments come first.
pub fn all_builtins() -> Vec<Case> {
    let mut v = experiments();
    v.extend([
        Case { name: "H1 4q K=1", h: builtin(Builtin::H1, 4), k: 1, observable: "Z1", layered: true },
        Case { name: "H1 5q K=1", h: builtin(Builtin::H1, 5), k: 1, observable: "Z1", layered: true },
        Case { name: "H2 3q K=1", h: builtin(Builtin::H2, 3), k: 1, observable: "Y2", layered: true },
        Case { name: "H2 5q K=1", h: builtin(Builtin::H2, 5), k: 1, observable: "Y2", layered: true },
        Case { name: "H3 2q K=1", h: builtin(Builtin::H3, 2), k: 1, observable: "Z1", layered: false },
    ]);
    v
}
