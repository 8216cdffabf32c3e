//! In-place gate kernels on amplitude vectors and density matrices.
//!
//! Qubit `q` (0-based) lives on amplitude-index bit `n - 1 - q`.

use num_complex::Complex64;

use crate::linalg::{CMatrix, CVector};
use crate::pauli::{i_pow, PauliString};

pub type Gate2 = [[Complex64; 2]; 2];

fn bit_of(n_qubits: usize, qubit: usize) -> usize {
    1usize << (n_qubits - 1 - qubit)
}

pub fn hadamard() -> Gate2 {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let c = Complex64::new(h, 0.0);
    [[c, c], [c, -c]]
}

/// `diag(1, -i)`.
pub fn s_dagger() -> Gate2 {
    [
        [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        [Complex64::new(0.0, 0.0), Complex64::new(0.0, -1.0)],
    ]
}

/// `diag(1, i)`.
pub fn s_gate() -> Gate2 {
    [
        [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        [Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0)],
    ]
}

/// `exp(-i θ Z)`.
pub fn z_rotation(theta: f64) -> Gate2 {
    [
        [Complex64::from_polar(1.0, -theta), Complex64::new(0.0, 0.0)],
        [Complex64::new(0.0, 0.0), Complex64::from_polar(1.0, theta)],
    ]
}

/// `exp(-i θ Y / 2)`.
pub fn ry(theta: f64) -> Gate2 {
    let (s, c) = (0.5 * theta).sin_cos();
    [
        [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
        [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
    ]
}

/// `exp(-i θ Z / 2)`.
pub fn rz(theta: f64) -> Gate2 {
    z_rotation(0.5 * theta)
}

pub fn apply_single(amps: &mut CVector, n_qubits: usize, qubit: usize, u: &Gate2) {
    let bit = bit_of(n_qubits, qubit);
    for i0 in 0..amps.len() {
        if i0 & bit != 0 {
            continue;
        }
        let i1 = i0 | bit;
        let a0 = amps[i0];
        let a1 = amps[i1];
        amps[i0] = u[0][0] * a0 + u[0][1] * a1;
        amps[i1] = u[1][0] * a0 + u[1][1] * a1;
    }
}

pub fn apply_cnot(amps: &mut CVector, n_qubits: usize, control: usize, target: usize) {
    let cb = bit_of(n_qubits, control);
    let tb = bit_of(n_qubits, target);
    for i in 0..amps.len() {
        if i & cb != 0 && i & tb == 0 {
            amps.swap_rows(i, i | tb);
        }
    }
}

/// `P |v⟩` for a Pauli string of matching size, phase included.
pub fn apply_pauli_raw(p: &PauliString, amps: &CVector) -> CVector {
    let (xm, zm) = p.index_masks();
    let base = p.phase_exp() as u32 + (p.x_bits() & p.z_bits()).count_ones();
    let mut out = CVector::zeros(amps.len());
    for (j, a) in amps.iter().enumerate() {
        let sign = 2 * ((zm & j).count_ones() % 2);
        out[j ^ xm] = i_pow(((base + sign) % 4) as u8) * a;
    }
    out
}

/// Applies `f` (a kernel acting on one column vector) as `ρ ↦ U ρ U†`.
pub fn conjugate_density<F>(rho: &mut CMatrix, mut f: F)
where
    F: FnMut(&mut CVector),
{
    let dim = rho.nrows();
    for pass in 0..2 {
        for j in 0..dim {
            let mut col = rho.column(j).into_owned();
            f(&mut col);
            rho.set_column(j, &col);
        }
        // ρ stays Hermitian, so U (U ρ)† = U ρ U†.
        if pass == 0 {
            *rho = rho.adjoint();
        }
    }
}
