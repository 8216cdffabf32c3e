//! JSON experiment configuration.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::backend::{EstimatorConfig, EstimatorMode, StateVector};
use crate::error::{Error, Result};
use crate::hamiltonian::{Boundary, HamiltonianSpec};
use crate::pauli::PauliString;
use crate::perturb::TrialSettings;
use crate::speceig::{DEFAULT_CUTOFF, SAMPLED_CUTOFF};
use crate::trotter::TrotterConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Builtin {
    H1,
    H2,
    H3,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HamiltonianConfig {
    Builtin {
        builtin: Builtin,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n_qubits: Option<usize>,
        /// `(J_x, J_y, J_z)` of the Heisenberg chain.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        couplings: Option<[f64; 3]>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        j_zxz: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        boundary: Option<Boundary>,
    },
    Inline {
        n_qubits: usize,
        terms: Vec<InlineTerm>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineTerm {
    pub coeff: f64,
    pub label: String,
}

impl HamiltonianConfig {
    pub fn builtin(which: Builtin, n_qubits: usize) -> Self {
        Self::Builtin {
            builtin: which,
            n_qubits: Some(n_qubits),
            couplings: None,
            j_zxz: None,
            boundary: None,
        }
    }

    pub fn build(&self) -> Result<HamiltonianSpec> {
        match self {
            Self::Builtin {
                builtin,
                n_qubits,
                couplings,
                j_zxz,
                boundary,
            } => match builtin {
                Builtin::H1 => HamiltonianSpec::heisenberg_xyz(
                    n_qubits.unwrap_or(2),
                    couplings.unwrap_or([1.0, 2.0, 3.0]),
                ),
                Builtin::H2 => HamiltonianSpec::three_body_zxz(
                    n_qubits.unwrap_or(4),
                    j_zxz.unwrap_or(1.0),
                    boundary.unwrap_or_default(),
                ),
                Builtin::H3 => match n_qubits {
                    None | Some(2) => Ok(HamiltonianSpec::xy_pair()),
                    Some(n) => Err(Error::Config(format!("H3 acts on 2 qubits, got {n}"))),
                },
            },
            Self::Inline { n_qubits, terms } => {
                if terms.is_empty() {
                    return Err(Error::Config("inline Hamiltonian has no terms".into()));
                }
                let pairs: Vec<(f64, &str)> =
                    terms.iter().map(|t| (t.coeff, t.label.as_str())).collect();
                HamiltonianSpec::from_labels(*n_qubits, &pairs)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum InitialState {
    /// Computational basis state, qubit 1 first.
    Basis(String),
    Layered { layers: usize, seed: u64 },
}

impl InitialState {
    pub fn prepare(&self, n_qubits: usize) -> Result<StateVector> {
        let s = match self {
            Self::Basis(bits) => StateVector::basis(bits)?,
            Self::Layered { layers, seed } => StateVector::layered_random(n_qubits, *layers, *seed),
        };
        if s.n_qubits() != n_qubits {
            return Err(Error::Config(format!(
                "initial state has {} qubits, Hamiltonian has {n_qubits}",
                s.n_qubits()
            )));
        }
        Ok(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t_max: f64,
    pub points: usize,
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self {
            t_max: 10.0,
            points: 200,
        }
    }
}

/// Trotter step counts: every count up to `dense_until`, then
/// `per_decade` log-spaced counts up to `n_max`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepGrid {
    pub dense_until: u64,
    pub n_max: u64,
    pub per_decade: u32,
}

impl Default for StepGrid {
    fn default() -> Self {
        Self {
            dense_until: 200,
            n_max: 2_500_000,
            per_decade: 20,
        }
    }
}

/// Fit `noise_p` so that the noisy fidelity after `steps` equals `fidelity`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseCalibration {
    pub steps: u64,
    pub fidelity: f64,
}

impl Default for NoiseCalibration {
    fn default() -> Self {
        Self {
            steps: 25,
            fidelity: 0.5,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    pub trials: usize,
    pub max_dim: usize,
    pub epsilon: f64,
    pub seed: u64,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        let t = TrialSettings::default();
        Self {
            trials: t.trials,
            max_dim: t.max_dim,
            epsilon: t.epsilon,
            seed: t.seed,
        }
    }
}

impl From<BoundsConfig> for TrialSettings {
    fn from(b: BoundsConfig) -> Self {
        TrialSettings {
            trials: b.trials,
            max_dim: b.max_dim,
            epsilon: b.epsilon,
            seed: b.seed,
        }
    }
}

/// Output file names, relative to the output directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Outputs {
    pub moments: String,
    pub matrices: String,
    pub trace: String,
    pub comparison: String,
    pub bounds: String,
}

impl Default for Outputs {
    fn default() -> Self {
        Self {
            moments: "moments.txt".into(),
            matrices: "matrices.json".into(),
            trace: "trace.csv".into(),
            comparison: "compare_trotter.csv".into(),
            bounds: "bounds.txt".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub hamiltonian: HamiltonianConfig,
    pub initial_state: InitialState,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(default)]
    pub estimator: EstimatorConfig,
    #[serde(default)]
    pub time_grid: TimeGrid,
    /// Pauli label, e.g. `"Z1"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observable: Option<String>,
    /// Backend mode for observable matrices; D and E use `estimator`.
    #[serde(default)]
    pub observable_mode: EstimatorMode,
    /// Relative metric cutoff; the mode default when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<f64>,
    #[serde(default)]
    pub trotter: TrotterConfig,
    #[serde(default)]
    pub step_grid: StepGrid,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_calibration: Option<NoiseCalibration>,
    #[serde(default)]
    pub bounds: BoundsConfig,
    #[serde(default)]
    pub outputs: Outputs,
}

/// Command-line overrides applied on top of a loaded config.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub shots: Option<u32>,
    pub mode: Option<EstimatorMode>,
    pub cutoff: Option<f64>,
    pub k: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// `--seed` replaces the estimator seed, the layered-state seed and the
    /// bound-trial seed.
    pub fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            self.estimator.seed = seed;
            self.bounds.seed = seed;
            if let InitialState::Layered { seed: s, .. } = &mut self.initial_state {
                *s = seed;
            }
        }
        if let Some(shots) = o.shots {
            self.estimator.shots = shots;
        }
        if let Some(mode) = o.mode {
            self.estimator.mode = mode;
        }
        if let Some(c) = o.cutoff {
            self.cutoff = Some(c);
        }
        if let Some(k) = o.k {
            self.k = k;
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.estimator.validate()?;
        self.trotter.validate()?;
        if let Some(c) = self.cutoff {
            if !(c > 0.0 && c < 1.0) {
                return Err(Error::Config(format!("cutoff must lie in (0, 1), got {c}")));
            }
        }
        if !self.time_grid.t_max.is_finite() || self.time_grid.t_max < 0.0 {
            return Err(Error::Config("time_grid.t_max must be finite and non-negative".into()));
        }
        if let Some(cal) = self.noise_calibration {
            if !(cal.fidelity > 0.0 && cal.fidelity < 1.0) {
                return Err(Error::Config("noise_calibration.fidelity must lie in (0, 1)".into()));
            }
        }
        Ok(())
    }

    pub fn cutoff_or_default(&self) -> f64 {
        self.cutoff.unwrap_or(match self.estimator.mode {
            EstimatorMode::Exact => DEFAULT_CUTOFF,
            EstimatorMode::Sampled => SAMPLED_CUTOFF,
        })
    }

    pub fn observable_config(&self) -> EstimatorConfig {
        EstimatorConfig {
            mode: self.observable_mode,
            ..self.estimator
        }
    }

    pub fn observable_spec(&self, n_qubits: usize) -> Result<Option<(String, HamiltonianSpec)>> {
        let Some(label) = &self.observable else {
            return Ok(None);
        };
        let p = PauliString::parse(label, n_qubits)?;
        let spec = HamiltonianSpec::from_terms(n_qubits, [(num_complex::Complex64::new(1.0, 0.0), p)])?;
        Ok(Some((label.clone(), spec)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_and_inline_forms_parse() {
        let cfg = ExperimentConfig::from_json(
            r#"{"hamiltonian": {"builtin": "H2", "n_qubits": 5},
                "initial_state": {"layered": {"layers": 5, "seed": 3}},
                "K": 3, "observable": "Y2"}"#,
        )
        .unwrap();
        assert_eq!(cfg.hamiltonian.build().unwrap().len(), 3);
        assert_eq!(cfg.time_grid, TimeGrid::default());

        let cfg = ExperimentConfig::from_json(
            r#"{"hamiltonian": {"n_qubits": 3, "terms": [{"coeff": 1.0, "label": "Z1 X2 Z3"}]},
                "initial_state": {"basis": "101"}, "K": 1}"#,
        )
        .unwrap();
        assert_eq!(cfg.hamiltonian.build().unwrap().terms()[0].1.letters(), "ZXZ");
        assert_eq!(cfg.initial_state.prepare(3).unwrap().amplitudes()[5].re, 1.0);
    }

    #[test]
    fn unknown_fields_are_config_errors() {
        let err = ExperimentConfig::from_json(
            r#"{"hamiltonian": {"builtin": "H3"}, "initial_state": {"basis": "10"}, "K": 1, "shots": 3}"#,
        );
        assert!(matches!(err, Err(Error::Config(_))));
    }

    #[test]
    fn seed_override_reaches_state_and_estimator() {
        let mut cfg = ExperimentConfig::from_json(
            r#"{"hamiltonian": {"builtin": "H1"}, "initial_state": {"layered": {"layers": 5, "seed": 1}}, "K": 1}"#,
        )
        .unwrap();
        cfg.apply(&Overrides {
            seed: Some(9),
            mode: Some(EstimatorMode::Sampled),
            ..Default::default()
        });
        assert_eq!(cfg.estimator.seed, 9);
        assert_eq!(cfg.initial_state, InitialState::Layered { layers: 5, seed: 9 });
        assert_eq!(cfg.cutoff_or_default(), SAMPLED_CUTOFF);
    }

    #[test]
    fn mismatched_state_size_is_rejected() {
        assert!(InitialState::Basis("101".into()).prepare(2).is_err());
        let h3 = HamiltonianConfig::builtin(Builtin::H3, 3);
        assert!(h3.build().is_err());
    }
}
