//! First-order Trotter baseline with an optional depolarizing-noise path.
//!
//! Every factor `exp(-i β P Δt)` is compiled to basis changes, a CNOT
//! ladder and a single `exp(-i θ Z)` with `θ = β Δt` (the usual `Rz(2θ)`).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::backend::gates::{self, apply_cnot, apply_pauli_raw, apply_single, conjugate_density};
use crate::backend::{DenseEvolver, DensityMatrix, StateVector, DEFAULT_DENSE_LIMIT};
use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianSpec;
use crate::linalg::{CMatrix, CVector};
use crate::pauli::PauliString;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrotterConfig {
    pub delta_t: f64,
    pub order: u8,
    /// Two-qubit depolarizing probability after each CNOT.
    pub noise_p: f64,
    /// Largest step count the Trotter column is simulated for.
    pub max_steps: u64,
}

impl Default for TrotterConfig {
    fn default() -> Self {
        Self {
            delta_t: 0.5,
            order: 1,
            noise_p: 0.0,
            max_steps: 10_000,
        }
    }
}

impl TrotterConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.delta_t.is_finite() || self.delta_t <= 0.0 {
            return Err(Error::Config(format!("delta_t must be positive, got {}", self.delta_t)));
        }
        if self.order != 1 {
            return Err(Error::Config(format!(
                "only first-order Trotter is available, got order {}",
                self.order
            )));
        }
        if !(0.0..=1.0).contains(&self.noise_p) {
            return Err(Error::Config(format!("noise_p must lie in [0, 1], got {}", self.noise_p)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Gate {
    H(usize),
    S(usize),
    Sdg(usize),
    /// `exp(-i θ Z)` on one qubit.
    ZRotation { qubit: usize, theta: f64 },
    Cnot { control: usize, target: usize },
    /// Scalar `e^{-i θ}`.
    GlobalPhase(f64),
}

/// Gates for `exp(-i θ P)` with `P` canonical.
fn pauli_rotation(p: &PauliString, theta: f64, out: &mut Vec<Gate>) {
    let support: Vec<usize> = (0..p.n_qubits()).filter(|&q| p.letter(q) != 'I').collect();
    let Some(&last) = support.last() else {
        out.push(Gate::GlobalPhase(theta));
        return;
    };
    for &q in &support {
        match p.letter(q) {
            'X' => out.push(Gate::H(q)),
            'Y' => {
                out.push(Gate::Sdg(q));
                out.push(Gate::H(q));
            }
            _ => {}
        }
    }
    for w in support.windows(2) {
        out.push(Gate::Cnot { control: w[0], target: w[1] });
    }
    out.push(Gate::ZRotation { qubit: last, theta });
    for w in support.windows(2).rev() {
        out.push(Gate::Cnot { control: w[0], target: w[1] });
    }
    for &q in &support {
        match p.letter(q) {
            'X' => out.push(Gate::H(q)),
            'Y' => {
                out.push(Gate::H(q));
                out.push(Gate::S(q));
            }
            _ => {}
        }
    }
}

/// One first-order step: a factor per term, in term order.
pub fn trotter_step(h: &HamiltonianSpec, cfg: &TrotterConfig) -> Result<Vec<Gate>> {
    if !h.is_hermitian() {
        return Err(Error::Contract("Trotter factors need real coefficients".into()));
    }
    let mut out = Vec::new();
    for (beta, p) in h.terms() {
        pauli_rotation(p, beta.re * cfg.delta_t, &mut out);
    }
    Ok(out)
}

fn single_matrix(g: &Gate) -> Option<(usize, gates::Gate2)> {
    match *g {
        Gate::H(q) => Some((q, gates::hadamard())),
        Gate::S(q) => Some((q, gates::s_gate())),
        Gate::Sdg(q) => Some((q, gates::s_dagger())),
        Gate::ZRotation { qubit, theta } => Some((qubit, gates::z_rotation(theta))),
        _ => None,
    }
}

fn apply_gate(amps: &mut CVector, n: usize, g: &Gate) {
    match *g {
        Gate::Cnot { control, target } => apply_cnot(amps, n, control, target),
        Gate::GlobalPhase(theta) => *amps *= Complex64::from_polar(1.0, -theta),
        _ => {
            let (q, u) = single_matrix(g).expect("single-qubit gate");
            apply_single(amps, n, q, &u);
        }
    }
}

/// `ρ ↦ (1-p) ρ + p · Tr_{a,b}(ρ) ⊗ I/4` on qubits `a`, `b`.
fn depolarize(rho: &mut CMatrix, n: usize, a: usize, b: usize, p: f64) {
    if p == 0.0 {
        return;
    }
    let mut acc = rho.scale(1.0 - p);
    for la in ['I', 'X', 'Y', 'Z'] {
        for lb in ['I', 'X', 'Y', 'Z'] {
            let pa = PauliString::single(n, a, la).expect("qubit in range");
            let pb = PauliString::single(n, b, lb).expect("qubit in range");
            let pauli = pa.multiply(&pb).expect("same register");
            let mut term = rho.clone();
            conjugate_density(&mut term, |col| *col = apply_pauli_raw(&pauli, col));
            acc += term.scale(p / 16.0);
        }
    }
    *rho = acc;
}

/// Reusable step circuit for one `(H, cfg)` pair.
#[derive(Clone, Debug)]
pub struct TrotterCircuit {
    n_qubits: usize,
    gates: Vec<Gate>,
    noise_p: f64,
}

impl TrotterCircuit {
    pub fn new(h: &HamiltonianSpec, cfg: &TrotterConfig) -> Result<Self> {
        cfg.validate()?;
        let n = h.n_qubits();
        if n > DEFAULT_DENSE_LIMIT {
            return Err(Error::DenseLimit {
                n,
                limit: DEFAULT_DENSE_LIMIT,
            });
        }
        Ok(Self {
            n_qubits: n,
            gates: trotter_step(h, cfg)?,
            noise_p: cfg.noise_p,
        })
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn step_vector(&self, amps: &mut CVector) {
        for g in &self.gates {
            apply_gate(amps, self.n_qubits, g);
        }
    }

    pub fn step_density(&self, rho: &mut DensityMatrix) {
        let n = self.n_qubits;
        let m = rho.matrix_mut();
        for g in &self.gates {
            conjugate_density(m, |col| apply_gate(col, n, g));
            if let Gate::Cnot { control, target } = *g {
                depolarize(m, n, control, target, self.noise_p);
            }
        }
    }
}

fn check_state(h: &HamiltonianSpec, psi0: &StateVector) -> Result<()> {
    if psi0.n_qubits() != h.n_qubits() {
        return Err(Error::Dimension {
            expected: h.n_qubits(),
            found: psi0.n_qubits(),
        });
    }
    Ok(())
}

/// Noiseless Trotter state after `steps` steps.
pub fn evolve_pure(
    h: &HamiltonianSpec,
    psi0: &StateVector,
    steps: u64,
    cfg: &TrotterConfig,
) -> Result<CVector> {
    check_state(h, psi0)?;
    let circuit = TrotterCircuit::new(h, &TrotterConfig { noise_p: 0.0, ..*cfg })?;
    let mut amps = psi0.amplitudes().clone();
    for _ in 0..steps {
        circuit.step_vector(&mut amps);
    }
    Ok(amps)
}

/// Trotterized state after `steps` steps as a density matrix.
pub fn simulate(
    h: &HamiltonianSpec,
    psi0: &StateVector,
    steps: u64,
    cfg: &TrotterConfig,
) -> Result<DensityMatrix> {
    check_state(h, psi0)?;
    if cfg.noise_p == 0.0 {
        let amps = evolve_pure(h, psi0, steps, cfg)?;
        let pure = StateVector::normalized(h.n_qubits(), amps)?;
        return Ok(DensityMatrix::from_pure(&pure));
    }
    let circuit = TrotterCircuit::new(h, cfg)?;
    let mut rho = DensityMatrix::from_pure(psi0);
    for _ in 0..steps {
        circuit.step_density(&mut rho);
    }
    Ok(rho)
}

/// `⟨ψ(t)|ρ|ψ(t)⟩` with `ψ(t) = e^{-iHt} ψ₀` computed densely.
pub fn fidelity(rho: &DensityMatrix, h: &HamiltonianSpec, psi0: &StateVector, t: f64) -> Result<f64> {
    check_state(h, psi0)?;
    if rho.n_qubits() != psi0.n_qubits() {
        return Err(Error::Dimension {
            expected: psi0.n_qubits(),
            found: rho.n_qubits(),
        });
    }
    let exact = DenseEvolver::new(h)?.evolve(psi0, t)?;
    Ok(rho.fidelity_with(&exact))
}

/// Trotter fidelities at each step count of an ascending grid, stepping
/// incrementally. Entries above `cfg.max_steps` are `None`.
pub fn fidelity_series(
    h: &HamiltonianSpec,
    psi0: &StateVector,
    grid: &[u64],
    cfg: &TrotterConfig,
) -> Result<Vec<Option<f64>>> {
    check_state(h, psi0)?;
    if grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Config("step grid must be ascending".into()));
    }
    let circuit = TrotterCircuit::new(h, cfg)?;
    let exact = DenseEvolver::new(h)?;
    let mut amps = psi0.amplitudes().clone();
    let mut rho = DensityMatrix::from_pure(psi0);
    let mut done = 0u64;
    let mut out = Vec::with_capacity(grid.len());
    for &n in grid {
        if n > cfg.max_steps {
            out.push(None);
            continue;
        }
        while done < n {
            if cfg.noise_p == 0.0 {
                circuit.step_vector(&mut amps);
            } else {
                circuit.step_density(&mut rho);
            }
            done += 1;
        }
        let target = exact.evolve_vector(psi0.amplitudes(), n as f64 * cfg.delta_t);
        let f = if cfg.noise_p == 0.0 {
            target.dotc(&amps).norm_sqr()
        } else {
            target.dotc(&(rho.matrix() * &target)).re
        };
        out.push(Some(f));
    }
    Ok(out)
}

/// Finds `noise_p` such that the noisy fidelity after `steps` steps equals
/// `target`, by bisection on `[0, 1]`.
pub fn calibrate_noise(
    h: &HamiltonianSpec,
    psi0: &StateVector,
    steps: u64,
    target: f64,
    cfg: &TrotterConfig,
) -> Result<f64> {
    let eval = |p: f64| -> Result<f64> {
        let c = TrotterConfig { noise_p: p, ..*cfg };
        let rho = simulate(h, psi0, steps, &c)?;
        fidelity(&rho, h, psi0, steps as f64 * cfg.delta_t)
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    let (f_lo, f_hi) = (eval(lo)?, eval(hi)?);
    if !(f_hi <= target && target <= f_lo) {
        return Err(Error::Contract(format!(
            "target fidelity {target} is not bracketed by [{f_hi}, {f_lo}]"
        )));
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if eval(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// All step counts `0..=dense_until`, then `per_decade` log-spaced counts
/// per decade up to and including `n_max`.
pub fn step_grid(dense_until: u64, n_max: u64, per_decade: u32) -> Vec<u64> {
    let mut grid: Vec<u64> = (0..=dense_until.min(n_max)).collect();
    if n_max > dense_until && per_decade > 0 {
        let start = (dense_until.max(1) as f64).log10();
        let stop = (n_max as f64).log10();
        let count = ((stop - start) * per_decade as f64).ceil() as u32;
        for k in 1..=count {
            let x = start + (stop - start) * k as f64 / count as f64;
            let n = (10f64.powf(x).round() as u64).min(n_max);
            if n > *grid.last().unwrap() {
                grid.push(n);
            }
        }
        if *grid.last().unwrap() != n_max {
            grid.push(n_max);
        }
    }
    grid
}
