//! Spectral time evolution of the hybrid-state coefficients.
//!
//! With E-orthonormal generalized eigenpairs `(λ_j, v_j)` the propagator on
//! the ansatz space is `Σ_j e^{-iλ_j T} v_j v_j† E`; applying it costs the
//! same for every `T`.

use num_complex::Complex64;

use crate::backend::{DenseEvolver, StateVector};
use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianSpec;
use crate::linalg::{hermitian_defect, sandwich, CMatrix, CVector};
use crate::moments::MomentSet;
use crate::speceig::EigenSolution;

/// Relative E-norm² below which a coefficient vector counts as the zero ket.
const NULL_TOLERANCE: f64 = 1e-10;

/// Classical coefficients over a moment set at time `t`.
#[derive(Clone, Debug)]
pub struct HybridState<'a> {
    pub moment_set: &'a MomentSet,
    pub alpha: CVector,
    pub t: f64,
}

impl HybridState<'_> {
    /// `⟨ψ(α)|ψ(α)⟩ = α† E α`.
    pub fn norm_sqr(&self, e: &CMatrix) -> f64 {
        sandwich(&self.alpha, e, &self.alpha).re
    }

    /// Dense `Σ_i α_i ops[i]|φ⟩`.
    pub fn to_dense(&self, phi: &StateVector) -> Result<CVector> {
        self.moment_set.combine(phi, &self.alpha)
    }
}

/// `α(0) = (1, 0, …, 0)`, i.e. the reference state itself.
pub fn initial_alpha(ms: &MomentSet, e: &CMatrix) -> Result<CVector> {
    if ms.is_empty() || !ms.ops()[0].is_identity() {
        return Err(Error::Contract("moment set must start with the identity".into()));
    }
    let mut alpha = CVector::zeros(ms.len());
    alpha[0] = Complex64::new(1.0, 0.0);
    let n = sandwich(&alpha, e, &alpha).re;
    if (n - 1.0).abs() > 1e-8 {
        return Err(Error::Contract(format!("E[0,0] = {n}, expected 1")));
    }
    Ok(alpha)
}

/// Rescales an arbitrary start vector so that `α† E α = 1`.
pub fn normalize_alpha(e: &CMatrix, alpha: &CVector) -> Result<CVector> {
    let n = sandwich(alpha, e, alpha).re;
    if n <= NULL_TOLERANCE * alpha.norm_squared().max(1e-300) {
        return Err(Error::Contract(
            "start vector lies in the null space of E and represents the zero ket".into(),
        ));
    }
    Ok(alpha.unscale(n.sqrt()))
}

/// Precomputed `c = V† E α(0)`; `at(T)` is then `V · (e^{-iλT} ∘ c)`.
#[derive(Clone, Debug)]
pub struct SpectralPropagator<'a> {
    sol: &'a EigenSolution,
    coeffs: CVector,
}

impl<'a> SpectralPropagator<'a> {
    pub fn new(sol: &'a EigenSolution, e: &CMatrix, alpha0: &CVector) -> Result<Self> {
        if alpha0.len() != sol.dim() || e.nrows() != sol.dim() {
            return Err(Error::Dimension {
                expected: sol.dim(),
                found: alpha0.len(),
            });
        }
        let n = sandwich(alpha0, e, alpha0).re;
        if n <= NULL_TOLERANCE * alpha0.norm_squared() {
            return Err(Error::Contract(
                "α(0) lies in the null space of E: it is the zero ket and cannot be evolved".into(),
            ));
        }
        let coeffs = sol.vectors.adjoint() * (e * alpha0);
        Ok(Self { sol, coeffs })
    }

    /// Components of `α(0)` along each eigenvector.
    pub fn coefficients(&self) -> &CVector {
        &self.coeffs
    }

    pub fn at(&self, t: f64) -> CVector {
        self.with_factors(|lambda| Complex64::from_polar(1.0, -lambda * t))
    }

    fn with_factors<F: Fn(f64) -> Complex64>(&self, f: F) -> CVector {
        let scaled = CVector::from_iterator(
            self.coeffs.len(),
            self.coeffs
                .iter()
                .zip(&self.sol.lambdas)
                .map(|(c, &l)| c * f(l)),
        );
        &self.sol.vectors * scaled
    }
}

/// `α(T) = Σ_j e^{-iλ_j T} v_j (v_j† E α(0))`.
pub fn fast_forward(sol: &EigenSolution, e: &CMatrix, alpha0: &CVector, t: f64) -> Result<CVector> {
    Ok(SpectralPropagator::new(sol, e, alpha0)?.at(t))
}

/// Linearized propagator `Σ_j (1 - iλ_j Δt)^N v_j v_j† E`. Not unitary: the
/// E-norm grows by `|1 - iλΔt|^{2N}` along each eigenvector.
pub fn vff_mode(
    sol: &EigenSolution,
    e: &CMatrix,
    alpha0: &CVector,
    delta_t: f64,
    steps: u32,
) -> Result<CVector> {
    if delta_t.is_nan() || delta_t <= 0.0 {
        return Err(Error::Contract(format!("Δt must be positive, got {delta_t}")));
    }
    let prop = SpectralPropagator::new(sol, e, alpha0)?;
    Ok(prop.with_factors(|lambda| Complex64::new(1.0, -lambda * delta_t).powu(steps)))
}

/// `sqrt(x† E x)`.
pub fn e_norm(e: &CMatrix, x: &CVector) -> f64 {
    sandwich(x, e, x).re.max(0.0).sqrt()
}

/// Dense reference for one `(H, φ, moment set)` triple: exact evolution
/// and the ansatz basis, reused across a time grid.
pub struct DenseReference<'a> {
    phi: &'a StateVector,
    evolver: DenseEvolver,
    basis: CMatrix,
}

impl<'a> DenseReference<'a> {
    pub fn new(h: &HamiltonianSpec, phi: &'a StateVector, ms: &MomentSet) -> Result<Self> {
        Ok(Self {
            phi,
            evolver: DenseEvolver::new(h)?,
            basis: ms.basis_matrix(phi)?,
        })
    }

    pub fn exact_state(&self, t: f64) -> CVector {
        self.evolver.evolve_vector(self.phi.amplitudes(), t)
    }

    pub fn hybrid_state(&self, alpha: &CVector) -> CVector {
        &self.basis * alpha
    }

    /// `|⟨ψ_exact(t)|ψ(α)⟩|²`.
    pub fn fidelity(&self, alpha: &CVector, t: f64) -> f64 {
        self.exact_state(t).dotc(&self.hybrid_state(alpha)).norm_sqr()
    }
}

/// `|⟨e^{-iHT}φ | Σ_i α_i ops[i]φ⟩|²` with a dense exact reference.
pub fn fidelity_vs_exact(
    h: &HamiltonianSpec,
    phi: &StateVector,
    ms: &MomentSet,
    alpha_t: &CVector,
    t: f64,
) -> Result<f64> {
    if alpha_t.len() != ms.len() {
        return Err(Error::Dimension {
            expected: ms.len(),
            found: alpha_t.len(),
        });
    }
    Ok(DenseReference::new(h, phi, ms)?.fidelity(alpha_t, t))
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ObservableTrace {
    /// `Re(α† M α)` per time point.
    pub values: Vec<f64>,
    /// `|Im(α† M α)|` per time point.
    pub im_diagnostic: Vec<f64>,
}

/// Expectation values `α(t)† M_O α(t)` along a path of coefficient vectors.
pub fn observable_trace(alpha_path: &[CVector], m_o: &CMatrix) -> Result<ObservableTrace> {
    let defect = hermitian_defect(m_o);
    if defect > 1e-8 {
        return Err(Error::Contract(format!(
            "observable matrix is not Hermitian (max |M - M†| = {defect:e})"
        )));
    }
    let mut trace = ObservableTrace::default();
    for alpha in alpha_path {
        if alpha.len() != m_o.nrows() {
            return Err(Error::Dimension {
                expected: m_o.nrows(),
                found: alpha.len(),
            });
        }
        let v = sandwich(alpha, m_o, alpha);
        trace.values.push(v.re);
        trace.im_diagnostic.push(v.im.abs());
    }
    Ok(trace)
}

/// `points` evenly spaced times on `[0, t_max]` (both ends included).
pub fn time_grid(t_max: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..points)
            .map(|k| t_max * k as f64 / (points - 1) as f64)
            .collect(),
    }
}
