//! D, E and observable overlap matrices assembled from Pauli expectation
//! values of the reference state.
//!
//! Every element reduces to `phase · ⟨φ|Q|φ⟩` for a canonical string `Q`.
//! The [`ExpectationCache`] makes sure each distinct `Q` is estimated once
//! for a given state, whichever matrix asks for it first.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::backend::{expectation, EstimatorConfig, StateVector};
use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianSpec;
use crate::linalg::{CMatrix, ONE};
use crate::moments::MomentSet;
use crate::pauli::PauliString;

/// Canonical string → estimate of `⟨φ|Q|φ⟩`.
#[derive(Clone, Debug)]
pub struct ExpectationCache<'a> {
    phi: &'a StateVector,
    cfg: EstimatorConfig,
    values: BTreeMap<PauliString, f64>,
    backend_calls: usize,
}

impl<'a> ExpectationCache<'a> {
    pub fn new(phi: &'a StateVector, cfg: EstimatorConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            phi,
            cfg,
            values: BTreeMap::new(),
            backend_calls: 0,
        })
    }

    pub fn config(&self) -> &EstimatorConfig {
        &self.cfg
    }

    /// `⟨φ|P|φ⟩` for any (possibly phased) string, estimating the canonical
    /// part on first use.
    pub fn value(&mut self, p: &PauliString) -> Result<Complex64> {
        let (canon, phase) = p.canonicalize();
        if canon.support() == 0 {
            return Ok(phase);
        }
        if let Some(v) = self.values.get(&canon) {
            return Ok(phase * v);
        }
        let v = expectation(self.phi, &canon, &self.cfg)?;
        self.backend_calls += 1;
        self.values.insert(canon, v);
        Ok(phase * v)
    }

    /// Distinct non-identity strings sent to the backend so far.
    pub fn backend_calls(&self) -> usize {
        self.backend_calls
    }

    pub fn entries(&self) -> &BTreeMap<PauliString, f64> {
        &self.values
    }

    pub fn assemble_e(&mut self, ms: &MomentSet) -> Result<CMatrix> {
        self.check(ms.n_qubits())?;
        let ops = ms.ops();
        let l = ops.len();
        let mut e = CMatrix::zeros(l, l);
        for i in 0..l {
            e[(i, i)] = ONE;
            for j in i + 1..l {
                let v = self.value(&ops[i].adjoint().mul_same_size(&ops[j]))?;
                e[(i, j)] = v;
                e[(j, i)] = v.conj();
            }
        }
        Ok(e)
    }

    /// `M_ij = Σ_a c_a ⟨φ|P_i† O_a P_j|φ⟩`, estimated for `i ≤ j` and mirrored.
    pub fn assemble_operator(&mut self, ms: &MomentSet, o: &HamiltonianSpec) -> Result<CMatrix> {
        self.check(ms.n_qubits())?;
        if o.n_qubits() != ms.n_qubits() {
            return Err(Error::Dimension {
                expected: ms.n_qubits(),
                found: o.n_qubits(),
            });
        }
        let ops = ms.ops();
        let l = ops.len();
        let mut m = CMatrix::zeros(l, l);
        for i in 0..l {
            let left = ops[i].adjoint();
            for j in i..l {
                let mut acc = Complex64::new(0.0, 0.0);
                for (c, p) in o.terms() {
                    acc += c * self.value(&left.mul_same_size(p).mul_same_size(&ops[j]))?;
                }
                if i == j {
                    m[(i, i)] = Complex64::new(acc.re, 0.0);
                } else {
                    m[(i, j)] = acc;
                    m[(j, i)] = acc.conj();
                }
            }
        }
        Ok(m)
    }

    fn check(&self, n: usize) -> Result<()> {
        if n != self.phi.n_qubits() {
            return Err(Error::Dimension {
                expected: self.phi.n_qubits(),
                found: n,
            });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssemblyMeta {
    pub estimator: EstimatorConfig,
    /// Distinct canonical strings estimated on the backend.
    pub distinct_strings: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OverlapMatrices {
    pub d: CMatrix,
    pub e: CMatrix,
    pub meta: AssemblyMeta,
}

pub fn assemble_e(ms: &MomentSet, phi: &StateVector, cfg: &EstimatorConfig) -> Result<CMatrix> {
    ExpectationCache::new(phi, *cfg)?.assemble_e(ms)
}

pub fn assemble_d(
    ms: &MomentSet,
    h: &HamiltonianSpec,
    phi: &StateVector,
    cfg: &EstimatorConfig,
) -> Result<CMatrix> {
    ExpectationCache::new(phi, *cfg)?.assemble_operator(ms, h)
}

pub fn assemble_observable(
    ms: &MomentSet,
    o: &HamiltonianSpec,
    phi: &StateVector,
    cfg: &EstimatorConfig,
) -> Result<CMatrix> {
    ExpectationCache::new(phi, *cfg)?.assemble_operator(ms, o)
}

/// D and E from one shared cache.
pub fn assemble(
    ms: &MomentSet,
    h: &HamiltonianSpec,
    phi: &StateVector,
    cfg: &EstimatorConfig,
) -> Result<OverlapMatrices> {
    let mut cache = ExpectationCache::new(phi, *cfg)?;
    let e = cache.assemble_e(ms)?;
    let d = cache.assemble_operator(ms, h)?;
    Ok(OverlapMatrices {
        d,
        e,
        meta: AssemblyMeta {
            estimator: *cfg,
            distinct_strings: cache.backend_calls(),
        },
    })
}

/// On-disk form of assembled matrices. Entries are `[re, im]` pairs written
/// with 17 significant digits, so a reload reproduces every bit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatricesFile {
    pub n_qubits: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub hamiltonian: Vec<TermRecord>,
    pub estimator: EstimatorConfig,
    pub seeds: BTreeMap<String, u64>,
    pub ops: Vec<String>,
    #[serde(rename = "D", serialize_with = "ser_matrix")]
    pub d: Vec<Vec<[f64; 2]>>,
    #[serde(rename = "E", serialize_with = "ser_matrix")]
    pub e: Vec<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty", serialize_with = "ser_matrix_map")]
    pub observables: BTreeMap<String, Vec<Vec<[f64; 2]>>>,
    pub distinct_strings: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermRecord {
    #[serde(serialize_with = "ser_pair")]
    pub coeff: [f64; 2],
    pub label: String,
}

impl TermRecord {
    pub fn from_spec(h: &HamiltonianSpec) -> Vec<Self> {
        h.terms()
            .iter()
            .map(|(c, p)| TermRecord {
                coeff: [c.re, c.im],
                label: p.letters(),
            })
            .collect()
    }
}

pub fn matrix_to_rows(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn rows_to_matrix(rows: &[Vec<[f64; 2]>]) -> Result<CMatrix> {
    let n = rows.len();
    for r in rows {
        if r.len() != n {
            return Err(Error::Dimension {
                expected: n,
                found: r.len(),
            });
        }
    }
    Ok(CMatrix::from_fn(n, n, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1])))
}

/// Decimal text with 17 significant digits.
pub fn format17(x: f64) -> String {
    format!("{x:.16e}")
}

fn raw17(x: f64) -> Box<serde_json::value::RawValue> {
    serde_json::value::RawValue::from_string(format17(x)).expect("finite float is valid JSON")
}

fn ser_pair<S: serde::Serializer>(v: &[f64; 2], s: S) -> std::result::Result<S::Ok, S::Error> {
    [raw17(v[0]), raw17(v[1])].serialize(s)
}

fn ser_matrix<S: serde::Serializer>(
    m: &[Vec<[f64; 2]>],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<Vec<[Box<serde_json::value::RawValue>; 2]>> = m
        .iter()
        .map(|r| r.iter().map(|v| [raw17(v[0]), raw17(v[1])]).collect())
        .collect();
    rows.serialize(s)
}

fn ser_matrix_map<S: serde::Serializer>(
    m: &BTreeMap<String, Vec<Vec<[f64; 2]>>>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    struct Wrap<'a>(&'a [Vec<[f64; 2]>]);
    impl Serialize for Wrap<'_> {
        fn serialize<S2: serde::Serializer>(&self, s: S2) -> std::result::Result<S2::Ok, S2::Error> {
            ser_matrix(self.0, s)
        }
    }
    let mut map = s.serialize_map(Some(m.len()))?;
    for (k, v) in m {
        map.serialize_entry(k, &Wrap(v))?;
    }
    map.end()
}

impl MatricesFile {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn d_matrix(&self) -> Result<CMatrix> {
        rows_to_matrix(&self.d)
    }

    pub fn e_matrix(&self) -> Result<CMatrix> {
        rows_to_matrix(&self.e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian_defect;
    use crate::moments::build_moment_set;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn single_state_gives_unit_e() {
        let h = HamiltonianSpec::xy_pair();
        let ms = build_moment_set(&h, 0);
        let phi = StateVector::basis("10").unwrap();
        let e = assemble_e(&ms, &phi, &EstimatorConfig::exact()).unwrap();
        assert_eq!(e, CMatrix::identity(1, 1));
    }

    #[test]
    fn xy_pair_e_matrix() {
        let h = HamiltonianSpec::xy_pair();
        let ms = build_moment_set(&h, 1);
        let phi = StateVector::basis("10").unwrap();
        let e = assemble_e(&ms, &phi, &EstimatorConfig::exact()).unwrap();
        // XX|10⟩ = |01⟩ and YY|10⟩ = |01⟩, so the last two states coincide.
        let expected = CMatrix::from_row_slice(
            3,
            3,
            &[c(1.0), c(0.0), c(0.0), c(0.0), c(1.0), c(1.0), c(0.0), c(1.0), c(1.0)],
        );
        assert!((e - expected).norm() < 1e-15);
        let d = assemble_d(&ms, &h, &phi, &EstimatorConfig::exact()).unwrap();
        assert_eq!(d[(0, 0)], c(0.0));
    }

    #[test]
    fn scalar_hamiltonian_scales_e() {
        let h = HamiltonianSpec::heisenberg_xyz(2, [1.0, 2.0, 3.0]).unwrap();
        let ms = build_moment_set(&h, 1);
        let phi = StateVector::layered_random(2, 5, 11);
        let scalar = HamiltonianSpec::from_labels(2, &[(2.5, "II")]).unwrap();
        let e = assemble_e(&ms, &phi, &EstimatorConfig::exact()).unwrap();
        let d = assemble_d(&ms, &scalar, &phi, &EstimatorConfig::exact()).unwrap();
        assert!((d - e.scale(2.5)).norm() < 1e-14);
    }

    #[test]
    fn observable_examples() {
        let phi = StateVector::basis("10").unwrap();
        let h = HamiltonianSpec::xy_pair();
        let ms0 = build_moment_set(&h, 0);
        let z1 = HamiltonianSpec::from_labels(2, &[(1.0, "Z1")]).unwrap();
        let m = assemble_observable(&ms0, &z1, &phi, &EstimatorConfig::exact()).unwrap();
        assert_eq!(m[(0, 0)], c(-1.0));

        let ms = build_moment_set(&h, 1);
        let id = HamiltonianSpec::from_labels(2, &[(1.0, "II")]).unwrap();
        let m = assemble_observable(&ms, &id, &phi, &EstimatorConfig::exact()).unwrap();
        let e = assemble_e(&ms, &phi, &EstimatorConfig::exact()).unwrap();
        assert_eq!(m, e);
    }

    #[test]
    fn sampled_matrices_are_exactly_hermitian_with_unit_diagonal() {
        let h = HamiltonianSpec::heisenberg_xyz(3, [1.0, 2.0, 3.0]).unwrap();
        let ms = build_moment_set(&h, 1);
        let phi = StateVector::layered_random(3, 5, 2);
        let om = assemble(&ms, &h, &phi, &EstimatorConfig::sampled(256, 9)).unwrap();
        assert_eq!(hermitian_defect(&om.d), 0.0);
        assert_eq!(hermitian_defect(&om.e), 0.0);
        for i in 0..ms.len() {
            assert_eq!(om.e[(i, i)], ONE);
        }
    }

    #[test]
    fn cache_counts_distinct_strings() {
        let h = HamiltonianSpec::xy_pair();
        let ms = build_moment_set(&h, 2);
        let phi = StateVector::basis("10").unwrap();
        let om = assemble(&ms, &h, &phi, &EstimatorConfig::exact()).unwrap();
        // Products of {I, XX, YY, ZZ} stay inside that group: three non-identity strings.
        assert_eq!(om.meta.distinct_strings, 3);
    }

    #[test]
    fn mismatched_register_is_rejected() {
        let h = HamiltonianSpec::xy_pair();
        let ms = build_moment_set(&h, 1);
        let phi = StateVector::basis("101").unwrap();
        assert!(assemble_e(&ms, &phi, &EstimatorConfig::exact()).is_err());
    }
}
