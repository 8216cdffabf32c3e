//! Generalized Hermitian eigenproblem `D v = λ E v` with a positive
//! semidefinite, possibly singular or noisy metric `E`.
//!
//! `E` is diagonalized as `U Σ U†`; directions with `σ < cutoff · σ_max`
//! (negative shot-noise eigenvalues included) are dropped. On the kept
//! directions the problem is whitened into an ordinary Hermitian one,
//! `A = Σ^{-1/2} U† D U Σ^{-1/2}`, whose eigenvectors map back through
//! `V = U Σ^{-1/2} B`. The returned columns satisfy `V† E V = I`.

use crate::error::{Error, Result};
use crate::linalg::{eigh, hermitian_defect, hermitize, select_columns, CMatrix, CVector};

/// Relative cutoff for exact matrices.
pub const DEFAULT_CUTOFF: f64 = 1e-10;
/// Relative cutoff recommended for 8192-shot sampled matrices.
pub const SAMPLED_CUTOFF: f64 = 1e-3;
/// Largest tolerated `|M - M†|` entry on input.
pub const HERMITIAN_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct EigenSolution {
    /// Ascending generalized eigenvalues.
    pub lambdas: Vec<f64>,
    /// `L × ρ`, E-orthonormal columns.
    pub vectors: CMatrix,
    pub rank: usize,
    pub cutoff_used: f64,
    /// Metric eigenvalues that fell below the cutoff.
    pub dropped_spectrum: Vec<f64>,
    /// Orthonormal basis of the retained column space of `E` (`L × ρ`).
    pub column_space: CMatrix,
}

impl EigenSolution {
    pub fn dim(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn vector(&self, j: usize) -> CVector {
        self.vectors.column(j).into_owned()
    }

    /// `Σ_j v_j v_j† E`, the projector the completeness relation refers to.
    pub fn completeness_operator(&self, e: &CMatrix) -> CMatrix {
        &self.vectors * self.vectors.adjoint() * e
    }
}

pub fn solve(d: &CMatrix, e: &CMatrix, cutoff_rel: f64) -> Result<EigenSolution> {
    let l = d.nrows();
    if d.ncols() != l || e.nrows() != l || e.ncols() != l {
        return Err(Error::Dimension {
            expected: l,
            found: e.nrows(),
        });
    }
    for (name, m) in [("D", d), ("E", e)] {
        let defect = hermitian_defect(m);
        if defect > HERMITIAN_TOLERANCE {
            return Err(Error::Contract(format!(
                "{name} is not Hermitian (max |M - M†| = {defect:e})"
            )));
        }
    }

    let (sigma, u) = eigh(e);
    let sigma_max = sigma.last().copied().unwrap_or(0.0);
    if sigma_max <= 0.0 {
        return Err(Error::DegenerateMetric { sigma_max });
    }
    let threshold = cutoff_rel * sigma_max;
    let kept: Vec<usize> = (0..l).filter(|&k| sigma[k] >= threshold).collect();
    let dropped_spectrum = (0..l)
        .filter(|&k| sigma[k] < threshold)
        .map(|k| sigma[k])
        .collect();
    if kept.is_empty() {
        return Err(Error::DegenerateMetric { sigma_max });
    }

    let u_kept = select_columns(&u, &kept);
    let mut whiten = u_kept.clone();
    for (c, &k) in kept.iter().enumerate() {
        let s = 1.0 / sigma[k].sqrt();
        whiten.column_mut(c).scale_mut(s);
    }
    let a = hermitize(&(whiten.adjoint() * d * &whiten));
    let (lambdas, b) = eigh(&a);
    let vectors = whiten * b;

    Ok(EigenSolution {
        rank: lambdas.len(),
        lambdas,
        vectors,
        cutoff_used: cutoff_rel,
        dropped_spectrum,
        column_space: u_kept,
    })
}

/// `‖(Σ_j v_j v_j† E) x − x‖` for one probe vector.
pub fn completeness_defect_at(sol: &EigenSolution, e: &CMatrix, x: &CVector) -> f64 {
    (sol.completeness_operator(e) * x - x).norm()
}

/// Worst completeness defect over an orthonormal basis of the retained
/// column space of `E`.
pub fn completeness_defect(sol: &EigenSolution, e: &CMatrix) -> f64 {
    let p = sol.completeness_operator(e);
    (0..sol.column_space.ncols())
        .map(|k| {
            let x = sol.column_space.column(k);
            (&p * x - x).norm()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn diag(v: &[f64]) -> CMatrix {
        CMatrix::from_diagonal(&CVector::from_iterator(
            v.len(),
            v.iter().map(|&x| Complex64::new(x, 0.0)),
        ))
    }

    #[test]
    fn identity_metric_is_ordinary_eigenproblem() {
        let d = diag(&[3.0, 1.0, 2.0]);
        let sol = solve(&d, &CMatrix::identity(3, 3), DEFAULT_CUTOFF).unwrap();
        assert_eq!(sol.rank, 3);
        for (got, want) in sol.lambdas.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-14);
        }
        // λ = 1 belongs to basis vector 1.
        assert!((sol.vectors[(1, 0)].norm() - 1.0).abs() < 1e-14);
        assert!((sol.vectors[(2, 1)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_metric_is_degenerate() {
        let d = diag(&[1.0, 2.0]);
        assert!(matches!(
            solve(&d, &CMatrix::zeros(2, 2), DEFAULT_CUTOFF),
            Err(Error::DegenerateMetric { .. })
        ));
    }

    #[test]
    fn non_hermitian_input_is_rejected() {
        let mut d = diag(&[1.0, 2.0]);
        d[(0, 1)] = Complex64::new(1.0, 0.0);
        assert!(matches!(
            solve(&d, &CMatrix::identity(2, 2), DEFAULT_CUTOFF),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn negative_metric_noise_is_dropped_not_folded() {
        let e = diag(&[1.0, -1e-4, 0.5]);
        let d = diag(&[1.0, 0.0, 2.0]);
        let sol = solve(&d, &e, SAMPLED_CUTOFF).unwrap();
        assert_eq!(sol.rank, 2);
        assert_eq!(sol.dropped_spectrum, vec![-1e-4]);
        assert!((sol.lambdas[0] - 1.0).abs() < 1e-14);
        assert!((sol.lambdas[1] - 4.0).abs() < 1e-14);
    }

    #[test]
    fn null_space_probe_has_full_defect() {
        let e = diag(&[1.0, 0.0]);
        let d = diag(&[2.0, 0.0]);
        let sol = solve(&d, &e, DEFAULT_CUTOFF).unwrap();
        let probe = CVector::from_vec(vec![Complex64::new(0.0, 0.0), Complex64::new(3.0, 0.0)]);
        assert!((completeness_defect_at(&sol, &e, &probe) - 3.0).abs() < 1e-14);
        assert!(completeness_defect(&sol, &e) < 1e-14);
    }
}
