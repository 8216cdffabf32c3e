//! Pauli expectation values, exact or estimated from simulated shots.

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::gates;
use super::state::StateVector;
use crate::error::{Error, Result};
use crate::pauli::{i_pow, splitmix64, PauliString};

pub const DEFAULT_SHOTS: u32 = 8192;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorMode {
    #[default]
    Exact,
    Sampled,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub mode: EstimatorMode,
    #[serde(default = "default_shots")]
    pub shots: u32,
    #[serde(default)]
    pub seed: u64,
}

fn default_shots() -> u32 {
    DEFAULT_SHOTS
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self::exact()
    }
}

impl EstimatorConfig {
    pub fn exact() -> Self {
        Self {
            mode: EstimatorMode::Exact,
            shots: DEFAULT_SHOTS,
            seed: 0,
        }
    }

    pub fn sampled(shots: u32, seed: u64) -> Self {
        Self {
            mode: EstimatorMode::Sampled,
            shots,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mode == EstimatorMode::Sampled && self.shots == 0 {
            return Err(Error::Config("sampled estimation needs shots ≥ 1".into()));
        }
        Ok(())
    }

    /// Random stream for one Pauli string. Derived from the run seed and the
    /// string alone, so results do not depend on evaluation order.
    pub fn stream_for(&self, p: &PauliString) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(splitmix64(self.seed) ^ p.stable_hash())
    }
}

/// `⟨s|P|s⟩` for a phase-free Pauli string.
pub fn expectation(s: &StateVector, p: &PauliString, cfg: &EstimatorConfig) -> Result<f64> {
    if !p.is_canonical() {
        return Err(Error::Contract(format!(
            "expectation needs a phase-free Pauli string, got {p}"
        )));
    }
    if p.n_qubits() != s.n_qubits() {
        return Err(Error::Dimension {
            expected: s.n_qubits(),
            found: p.n_qubits(),
        });
    }
    if p.support() == 0 {
        return Ok(1.0);
    }
    match cfg.mode {
        EstimatorMode::Exact => Ok(exact_expectation(s, p)),
        EstimatorMode::Sampled => {
            cfg.validate()?;
            Ok(sampled_expectation(s, p, cfg.shots, &mut cfg.stream_for(p)))
        }
    }
}

fn exact_expectation(s: &StateVector, p: &PauliString) -> f64 {
    let (xm, zm) = p.index_masks();
    let base = (p.x_bits() & p.z_bits()).count_ones();
    let amps = s.amplitudes();
    let mut acc = Complex64::new(0.0, 0.0);
    for (j, a) in amps.iter().enumerate() {
        let sign = 2 * ((zm & j).count_ones() % 2);
        acc += amps[j ^ xm].conj() * i_pow(((base + sign) % 4) as u8) * a;
    }
    acc.re
}

/// Rotates each support qubit into the eigenbasis of its letter, samples
/// computational-basis outcomes and averages the product of ±1 eigenvalues.
pub fn sampled_expectation(
    s: &StateVector,
    p: &PauliString,
    shots: u32,
    rng: &mut ChaCha8Rng,
) -> f64 {
    let n = s.n_qubits();
    let mut amps = s.amplitudes().clone();
    for q in 0..n {
        match p.letter(q) {
            'X' => gates::apply_single(&mut amps, n, q, &gates::hadamard()),
            'Y' => {
                gates::apply_single(&mut amps, n, q, &gates::s_dagger());
                gates::apply_single(&mut amps, n, q, &gates::hadamard());
            }
            _ => {}
        }
    }
    let probs: Vec<f64> = amps.iter().map(|a| a.norm_sqr()).collect();
    let dist = WeightedIndex::new(&probs).expect("a normalized state has positive weight");
    let (xm, zm) = p.index_masks();
    let support = xm | zm;
    let mut total: i64 = 0;
    for _ in 0..shots {
        let outcome = dist.sample(rng);
        total += if (outcome & support).count_ones() % 2 == 0 { 1 } else { -1 };
    }
    total as f64 / shots as f64
}
