//! Perturbation bounds relating noiseless `(D, E)` to noisy `(D̃, Ẽ)`, and
//! the fidelity error kernel of the fast-forwarded state.

use std::fmt::Write as _;

use nalgebra::{Cholesky, Schur};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{eigh, eigvalsh, hermitian_defect, hermitize, spectral_norm, CMatrix, CVector};
use crate::pauli::splitmix64;
use crate::speceig::{solve, EigenSolution, DEFAULT_CUTOFF};

/// Slack allowed on `lhs ≤ rhs`.
pub const BOUND_SLACK: f64 = 1e-12;
/// Relative smallest metric eigenvalue accepted as positive definite.
const PD_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub bound_name: &'static str,
    /// Left-hand sides, one per compared eigenvalue (or a single norm).
    pub lhs: Vec<f64>,
    pub rhs: f64,
    pub holds: bool,
    pub preconditions_met: bool,
    pub reason: Option<String>,
}

impl BoundReport {
    fn evaluated(bound_name: &'static str, lhs: Vec<f64>, rhs: f64) -> Self {
        let holds = lhs.iter().all(|&x| x <= rhs + BOUND_SLACK);
        Self {
            bound_name,
            lhs,
            rhs,
            holds,
            preconditions_met: true,
            reason: None,
        }
    }

    fn unmet(bound_name: &'static str, reason: String) -> Self {
        Self {
            bound_name,
            lhs: Vec::new(),
            rhs: f64::NAN,
            holds: false,
            preconditions_met: false,
            reason: Some(reason),
        }
    }

    pub fn max_lhs(&self) -> f64 {
        self.lhs.iter().copied().fold(0.0, f64::max)
    }
}

fn check_square(ms: &[&CMatrix]) -> Result<usize> {
    let l = ms[0].nrows();
    for m in ms {
        if m.nrows() != l || m.ncols() != l {
            return Err(Error::Dimension {
                expected: l,
                found: m.nrows(),
            });
        }
    }
    Ok(l)
}

/// `A = L⁻¹ D L⁻†` for `E = L L†`, or why it cannot be formed.
fn reduce(d: &CMatrix, e: &CMatrix, name: &str) -> std::result::Result<CMatrix, String> {
    let defect = hermitian_defect(e);
    if defect > 1e-8 {
        return Err(format!("{name} is not Hermitian (defect {defect:e})"));
    }
    let sigma = eigvalsh(e);
    let (lo, hi) = (sigma[0], *sigma.last().unwrap());
    if hi <= 0.0 || lo <= PD_TOLERANCE * hi {
        return Err(format!("{name} is not positive definite (smallest eigenvalue {lo:e})"));
    }
    let chol = Cholesky::new(hermitize(e))
        .ok_or_else(|| format!("Cholesky factorization of {name} failed"))?;
    let l = chol.l();
    let x = l
        .solve_lower_triangular(d)
        .ok_or_else(|| format!("{name} factor is singular"))?;
    let a = l
        .solve_lower_triangular(&x.adjoint())
        .ok_or_else(|| format!("{name} factor is singular"))?;
    Ok(hermitize(&a))
}

/// Ascending generalized eigenvalues of both pencils against `‖A − Ã‖₂`.
pub fn stewart_bound(d: &CMatrix, e: &CMatrix, d_t: &CMatrix, e_t: &CMatrix) -> Result<BoundReport> {
    const NAME: &str = "stewart";
    check_square(&[d, e, d_t, e_t])?;
    let (a, a_t) = match (reduce(d, e, "E"), reduce(d_t, e_t, "perturbed E")) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(r), _) | (_, Err(r)) => return Ok(BoundReport::unmet(NAME, r)),
    };
    let lam = eigvalsh(&a);
    let lam_t = eigvalsh(&a_t);
    let lhs = lam.iter().zip(&lam_t).map(|(x, y)| (x - y).abs()).collect();
    Ok(BoundReport::evaluated(NAME, lhs, spectral_norm(&(a - a_t))))
}

/// Distance from each eigenvalue of `Ẽ` to the spectrum of `E`, against
/// `‖Ẽ − E‖₂`. A non-Hermitian `Ẽ` is handled through its Schur form.
pub fn bauer_fike(e: &CMatrix, e_t: &CMatrix) -> Result<BoundReport> {
    const NAME: &str = "bauer-fike";
    check_square(&[e, e_t])?;
    let defect = hermitian_defect(e);
    if defect > 1e-8 {
        return Ok(BoundReport::unmet(NAME, format!("E is not Hermitian (defect {defect:e})")));
    }
    let spec = eigvalsh(e);
    let spec_t: Vec<Complex64> = if hermitian_defect(e_t) <= 1e-14 {
        eigvalsh(e_t).into_iter().map(|x| Complex64::new(x, 0.0)).collect()
    } else {
        let (_, t) = Schur::new(e_t.clone()).unpack();
        t.diagonal().iter().copied().collect()
    };
    let lhs = spec_t
        .iter()
        .map(|mu| spec.iter().map(|&l| (mu - l).norm()).fold(f64::INFINITY, f64::min))
        .collect();
    Ok(BoundReport::evaluated(NAME, lhs, spectral_norm(&(e_t - e))))
}

/// Parameters of the sin Θ comparison.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DavisKahanSplit {
    /// Number of lowest eigenvalues of `A` forming the block `A₀`.
    pub l: usize,
    /// Interval holding `spec(A₀)`; defaults to `[λ_1, λ_l]`.
    pub interval: Option<(f64, f64)>,
    /// Smallest gap `δ` accepted between the interval and `spec(Ã₁)`.
    pub delta_margin: f64,
}

/// `‖V₀†Ṽ₁‖₂` against `‖V₀†(Ã − A)Ṽ₁‖₂ / δ`.
pub fn davis_kahan(
    d: &CMatrix,
    e: &CMatrix,
    d_t: &CMatrix,
    e_t: &CMatrix,
    split: DavisKahanSplit,
) -> Result<BoundReport> {
    const NAME: &str = "davis-kahan";
    let n = check_square(&[d, e, d_t, e_t])?;
    if split.l == 0 || split.l >= n {
        return Ok(BoundReport::unmet(NAME, format!("split l = {} outside 1..{n}", split.l)));
    }
    let (a, a_t) = match (reduce(d, e, "E"), reduce(d_t, e_t, "perturbed E")) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(r), _) | (_, Err(r)) => return Ok(BoundReport::unmet(NAME, r)),
    };
    let (lam, v) = eigh(&a);
    let (lam_t, v_t) = eigh(&a_t);
    let (lo, hi) = split.interval.unwrap_or((lam[0], lam[split.l - 1]));
    if lam[..split.l].iter().any(|&x| x < lo || x > hi) {
        return Ok(BoundReport::unmet(
            NAME,
            format!("eigenvalues of A₀ leave the interval [{lo}, {hi}]"),
        ));
    }
    let delta = lam_t[split.l..]
        .iter()
        .map(|&x| if x < lo { lo - x } else if x > hi { x - hi } else { 0.0 })
        .fold(f64::INFINITY, f64::min);
    if delta.is_nan() || delta <= split.delta_margin.max(0.0) {
        return Ok(BoundReport::unmet(
            NAME,
            format!("gap δ = {delta:e} does not exceed the margin {}", split.delta_margin),
        ));
    }
    let v0 = v.columns(0, split.l);
    let v1_t = v_t.columns(split.l, n - split.l);
    let lhs = spectral_norm(&(v0.adjoint() * v1_t));
    let rhs = spectral_norm(&(v0.adjoint() * (a_t - a) * v1_t)) / delta;
    Ok(BoundReport::evaluated(NAME, vec![lhs], rhs))
}

/// `K = Σ_{jj'} e^{-i(λ̃_j' − λ_j)T} E v_j v_j† E ṽ_j' ṽ_j'† Ẽ`.
pub fn error_kernel_matrix(
    sol: &EigenSolution,
    sol_t: &EigenSolution,
    e: &CMatrix,
    e_t: &CMatrix,
    t: f64,
) -> Result<CMatrix> {
    let l = sol.dim();
    if sol_t.dim() != l || e.nrows() != l || e_t.nrows() != l {
        return Err(Error::Dimension {
            expected: l,
            found: sol_t.dim(),
        });
    }
    let mut left = e * &sol.vectors;
    for (j, &lam) in sol.lambdas.iter().enumerate() {
        let phase = Complex64::from_polar(1.0, lam * t);
        left.column_mut(j).iter_mut().for_each(|x| *x *= phase);
    }
    let mut right = sol_t.vectors.clone();
    for (j, &lam) in sol_t.lambdas.iter().enumerate() {
        let phase = Complex64::from_polar(1.0, -lam * t);
        right.column_mut(j).iter_mut().for_each(|x| *x *= phase);
    }
    Ok(left * sol.vectors.adjoint() * e * right * sol_t.vectors.adjoint() * e_t)
}

/// `α(0)† K α(0)`, the overlap of the noiseless and noisy evolved states.
pub fn error_kernel(
    sol: &EigenSolution,
    sol_t: &EigenSolution,
    e: &CMatrix,
    e_t: &CMatrix,
    alpha0: &CVector,
    t: f64,
) -> Result<Complex64> {
    let k = error_kernel_matrix(sol, sol_t, e, e_t, t)?;
    if alpha0.len() != k.nrows() {
        return Err(Error::Dimension {
            expected: k.nrows(),
            found: alpha0.len(),
        });
    }
    Ok(alpha0.dotc(&(k * alpha0)))
}

/// Aggregate of one seeded trial suite.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteSummary {
    pub bound_name: &'static str,
    pub trials: usize,
    pub preconditions_met: usize,
    pub held: usize,
    /// Largest `lhs / rhs` over trials with met preconditions.
    pub worst_ratio: f64,
}

impl SuiteSummary {
    pub fn empty(bound_name: &'static str) -> Self {
        Self {
            bound_name,
            trials: 0,
            preconditions_met: 0,
            held: 0,
            worst_ratio: 0.0,
        }
    }

    pub fn record(&mut self, r: &BoundReport) {
        self.trials += 1;
        if r.preconditions_met {
            self.preconditions_met += 1;
            if r.holds {
                self.held += 1;
            }
            let ratio = if r.rhs > 0.0 { r.max_lhs() / r.rhs } else { 0.0 };
            self.worst_ratio = self.worst_ratio.max(ratio);
        }
    }

    fn record_check(&mut self, ok: bool, ratio: f64) {
        self.trials += 1;
        self.preconditions_met += 1;
        if ok {
            self.held += 1;
        }
        self.worst_ratio = self.worst_ratio.max(ratio);
    }

    pub fn passed(&self) -> bool {
        self.preconditions_met > 0 && self.held == self.preconditions_met
    }
}

/// Settings of the randomized bound checks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrialSettings {
    pub trials: usize,
    pub max_dim: usize,
    /// Spectral size of the perturbations.
    pub epsilon: f64,
    pub seed: u64,
}

impl Default for TrialSettings {
    fn default() -> Self {
        Self {
            trials: 100,
            max_dim: 10,
            epsilon: 1e-3,
            seed: 0,
        }
    }
}

fn random_complex(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

fn random_hermitian(rng: &mut ChaCha8Rng, n: usize, norm: f64) -> CMatrix {
    let h = hermitize(&random_complex(rng, n));
    let s = spectral_norm(&h);
    if s > 0.0 {
        h.scale(norm / s)
    } else {
        h
    }
}

/// Positive definite with eigenvalues in roughly `[0.1, 1]`.
fn random_metric(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    let (_, q) = eigh(&random_hermitian(rng, n, 1.0));
    let diag = CVector::from_fn(n, |_, _| Complex64::new(rng.random_range(0.1..1.0), 0.0));
    hermitize(&(&q * CMatrix::from_diagonal(&diag) * q.adjoint()))
}

/// Pencil `(D, E)` whose reduced matrix has two clusters, `[0, 1]` for the
/// first `l` eigenvalues and `[3, 4]` for the rest.
fn clustered_pencil(rng: &mut ChaCha8Rng, n: usize, l: usize) -> (CMatrix, CMatrix) {
    let e = random_metric(rng, n);
    let chol = Cholesky::new(e.clone()).expect("metric is positive definite").l();
    let (_, q) = eigh(&random_hermitian(rng, n, 1.0));
    let diag = CVector::from_fn(n, |i, _| {
        let base = if i < l { 0.0 } else { 3.0 };
        Complex64::new(base + rng.random_range(0.0..1.0), 0.0)
    });
    let a = &q * CMatrix::from_diagonal(&diag) * q.adjoint();
    (hermitize(&(&chol * a * chol.adjoint())), e)
}

/// Runs every bound over `settings.trials` seeded random pencils.
pub fn run_trial_suites(settings: &TrialSettings) -> Result<Vec<SuiteSummary>> {
    let mut stewart = SuiteSummary::empty("stewart");
    let mut bf = SuiteSummary::empty("bauer-fike");
    let mut dk = SuiteSummary::empty("davis-kahan");
    let mut kernel = SuiteSummary::empty("error-kernel");
    let max_dim = settings.max_dim.max(2);
    for trial in 0..settings.trials {
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(settings.seed ^ ((trial as u64) << 20)));
        let n = rng.random_range(2..=max_dim);
        let eps = settings.epsilon;

        let e = random_metric(&mut rng, n);
        let d = random_hermitian(&mut rng, n, 1.0);
        let d_t = &d + random_hermitian(&mut rng, n, eps);
        let e_t = &e + random_hermitian(&mut rng, n, eps);
        stewart.record(&stewart_bound(&d, &e, &d_t, &e_t)?);
        bf.record(&bauer_fike(&e, &e_t)?);

        let l = rng.random_range(1..n);
        let (dc, ec) = clustered_pencil(&mut rng, n, l);
        let dc_t = &dc + random_hermitian(&mut rng, n, eps);
        let ec_t = &ec + random_hermitian(&mut rng, n, eps);
        let split = DavisKahanSplit {
            l,
            interval: None,
            delta_margin: 0.0,
        };
        dk.record(&davis_kahan(&dc, &ec, &dc_t, &ec_t, split)?);

        // Kernel contract: equals the direct overlap, and is 1 at T = 0
        // when only D is perturbed.
        let sol = solve(&d, &e, DEFAULT_CUTOFF)?;
        let sol_d = solve(&d_t, &e, DEFAULT_CUTOFF)?;
        let sol_t = solve(&d_t, &e_t, DEFAULT_CUTOFF)?;
        let mut alpha0 = CVector::from_fn(n, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let norm = alpha0.dotc(&(&e * &alpha0)).re.sqrt();
        alpha0.unscale_mut(norm);
        let t = rng.random_range(0.0..20.0);
        let k = error_kernel(&sol, &sol_t, &e, &e_t, &alpha0, t)?;
        let a = crate::evolve::fast_forward(&sol, &e, &alpha0, t)?;
        let a_t = crate::evolve::fast_forward(&sol_t, &e_t, &alpha0, t)?;
        let direct = a.dotc(&(&e * a_t));
        let at_zero = error_kernel(&sol, &sol_d, &e, &e, &alpha0, 0.0)?;
        let dev = (k - direct).norm().max((at_zero - 1.0).norm());
        kernel.record_check(dev <= 1e-8, dev / 1e-8);
    }
    Ok(vec![stewart, bf, dk, kernel])
}

/// Fixed-width pass/fail table.
pub fn format_table(rows: &[SuiteSummary]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<14} {:>7} {:>9} {:>7} {:>12}  result",
        "bound", "trials", "eligible", "held", "worst_ratio"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:<14} {:>7} {:>9} {:>7} {:>12.4e}  {}",
            r.bound_name,
            r.trials,
            r.preconditions_met,
            r.held,
            r.worst_ratio,
            if r.passed() { "PASS" } else { "FAIL" }
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(v: &[f64]) -> CMatrix {
        CMatrix::from_diagonal(&CVector::from_iterator(
            v.len(),
            v.iter().map(|&x| Complex64::new(x, 0.0)),
        ))
    }

    #[test]
    fn unperturbed_pencils_give_zero_bounds() {
        let d = diag(&[1.0, -2.0, 0.5]);
        let e = diag(&[1.0, 2.0, 0.5]);
        let r = stewart_bound(&d, &e, &d, &e).unwrap();
        assert!(r.preconditions_met && r.holds);
        assert_eq!((r.max_lhs(), r.rhs), (0.0, 0.0));
        let r = bauer_fike(&e, &e).unwrap();
        assert!(r.holds && r.max_lhs() == 0.0);
    }

    #[test]
    fn shifted_metric_is_tight() {
        let e = diag(&[1.0, 2.0, 0.5]);
        let e_t = &e + CMatrix::identity(3, 3).scale(1e-3);
        let r = bauer_fike(&e, &e_t).unwrap();
        assert!(r.holds);
        for x in &r.lhs {
            assert!((x - 1e-3).abs() < 1e-15);
        }
        assert!((r.rhs - 1e-3).abs() < 1e-15);
    }

    #[test]
    fn singular_metric_is_reported_not_thrown() {
        let d = diag(&[1.0, 2.0]);
        let e = diag(&[1.0, 0.0]);
        let r = stewart_bound(&d, &e, &d, &e).unwrap();
        assert!(!r.preconditions_met);
        assert!(r.reason.unwrap().contains("positive definite"));
    }

    #[test]
    fn davis_kahan_needs_a_gap() {
        let d = diag(&[0.0, 0.1, 3.0]);
        let e = CMatrix::identity(3, 3);
        let ok = DavisKahanSplit {
            l: 2,
            interval: None,
            delta_margin: 0.0,
        };
        let r = davis_kahan(&d, &e, &d, &e, ok).unwrap();
        assert!(r.preconditions_met && r.holds && r.max_lhs() < 1e-15);
        let wide = DavisKahanSplit {
            interval: Some((0.0, 5.0)),
            ..ok
        };
        assert!(!davis_kahan(&d, &e, &d, &e, wide).unwrap().preconditions_met);
        let bad = DavisKahanSplit { l: 3, ..ok };
        assert!(!davis_kahan(&d, &e, &d, &e, bad).unwrap().preconditions_met);
    }

    #[test]
    fn identical_solutions_have_unit_kernel() {
        let d = diag(&[1.0, -2.0, 0.5]);
        let e = diag(&[1.0, 2.0, 0.5]);
        let sol = solve(&d, &e, DEFAULT_CUTOFF).unwrap();
        let mut a = CVector::zeros(3);
        a[0] = Complex64::new(1.0, 0.0);
        for t in [0.0, 1.0, 37.5] {
            let k = error_kernel(&sol, &sol, &e, &e, &a, t).unwrap();
            assert!((k - 1.0).norm() < 1e-12);
        }
    }

    #[test]
    fn eigenvalue_only_error_is_periodic() {
        let e = CMatrix::identity(2, 2);
        let sol = solve(&diag(&[1.0, 2.0]), &e, DEFAULT_CUTOFF).unwrap();
        let (d1, d2) = (0.01, -0.03);
        let sol_t = solve(&diag(&[1.0 + d1, 2.0 + d2]), &e, DEFAULT_CUTOFF).unwrap();
        let (w1, w2) = (0.3f64, 0.7f64);
        let a = CVector::from_vec(vec![
            Complex64::new(w1.sqrt(), 0.0),
            Complex64::new(w2.sqrt(), 0.0),
        ]);
        let period = 2.0 * std::f64::consts::PI / (d1 - d2).abs();
        let infid = |t: f64| 1.0 - error_kernel(&sol, &sol_t, &e, &e, &a, t).unwrap().norm_sqr();
        for t in [3.0, 40.0, 100.0] {
            let closed = 2.0 * w1 * w2 * (1.0 - ((d1 - d2) * t).cos());
            assert!((infid(t) - closed).abs() < 1e-12);
            assert!((infid(t) - infid(t + period)).abs() < 1e-10);
        }
    }

    #[test]
    fn mismatched_sizes_are_errors() {
        let s2 = solve(&diag(&[1.0, 2.0]), &CMatrix::identity(2, 2), DEFAULT_CUTOFF).unwrap();
        let s3 = solve(&diag(&[1.0, 2.0, 3.0]), &CMatrix::identity(3, 3), DEFAULT_CUTOFF).unwrap();
        let e = CMatrix::identity(2, 2);
        assert!(error_kernel_matrix(&s2, &s3, &e, &e, 1.0).is_err());
    }

    #[test]
    fn seeded_suites_all_hold() {
        let rows = run_trial_suites(&TrialSettings::default()).unwrap();
        for r in &rows {
            assert_eq!(r.trials, 100);
            assert!(r.passed(), "{}", format_table(&rows));
        }
        assert_eq!(rows[0].preconditions_met, 100);
    }
}
