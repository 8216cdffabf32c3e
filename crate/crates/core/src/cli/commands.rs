//! Subcommand bodies. Each returns its output text so the caller decides
//! where it goes.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::backend::{EstimatorConfig, StateVector};
use crate::error::Result;
use crate::evolve::{e_norm, initial_alpha, time_grid, DenseReference, SpectralPropagator};
use crate::hamiltonian::HamiltonianSpec;
use crate::linalg::{sandwich, CMatrix};
use crate::moments::{build_moment_set, MomentSet};
use crate::overlaps::{assemble, assemble_e, format17, matrix_to_rows, ExpectationCache, MatricesFile, OverlapMatrices, TermRecord};
use crate::perturb::{bauer_fike, format_table, run_trial_suites, SuiteSummary};
use crate::speceig::{solve, EigenSolution};
use crate::trotter::{calibrate_noise, fidelity_series, step_grid, TrotterConfig};

use super::config::{Builtin, ExperimentConfig, HamiltonianConfig, InitialState};

/// Everything derived from a config up to the eigensolve.
pub struct Prepared {
    pub h: HamiltonianSpec,
    pub phi: StateVector,
    pub ms: MomentSet,
    pub matrices: OverlapMatrices,
    pub sol: EigenSolution,
    pub observable: Option<(String, CMatrix)>,
}

pub fn prepare(cfg: &ExperimentConfig, k: usize) -> Result<Prepared> {
    cfg.validate()?;
    let h = cfg.hamiltonian.build()?;
    let phi = cfg.initial_state.prepare(h.n_qubits())?;
    let ms = build_moment_set(&h, k);
    let matrices = assemble(&ms, &h, &phi, &cfg.estimator)?;
    let sol = solve(&matrices.d, &matrices.e, cfg.cutoff_or_default())?;
    let observable = match cfg.observable_spec(h.n_qubits())? {
        Some((label, o)) => {
            let mut cache = ExpectationCache::new(&phi, cfg.observable_config())?;
            Some((label, cache.assemble_operator(&ms, &o)?))
        }
        None => None,
    };
    Ok(Prepared {
        h,
        phi,
        ms,
        matrices,
        sol,
        observable,
    })
}

pub fn seeds(cfg: &ExperimentConfig) -> BTreeMap<String, u64> {
    let mut s = BTreeMap::from([("estimator".to_string(), cfg.estimator.seed)]);
    if let InitialState::Layered { seed, .. } = cfg.initial_state {
        s.insert("initial_state".into(), seed);
    }
    s
}

pub fn matrices_file(cfg: &ExperimentConfig) -> Result<MatricesFile> {
    let p = prepare(cfg, cfg.k)?;
    Ok(MatricesFile {
        n_qubits: p.h.n_qubits(),
        k: cfg.k,
        hamiltonian: TermRecord::from_spec(&p.h),
        estimator: cfg.estimator,
        seeds: seeds(cfg),
        ops: p.ms.labels(),
        d: matrix_to_rows(&p.matrices.d),
        e: matrix_to_rows(&p.matrices.e),
        observables: p
            .observable
            .iter()
            .map(|(l, m)| (l.clone(), matrix_to_rows(m)))
            .collect(),
        distinct_strings: p.matrices.meta.distinct_strings,
    })
}

/// `t,fidelity,observable,norm,im_diagnostic` over the configured grid.
pub fn evolve_csv(cfg: &ExperimentConfig) -> Result<String> {
    let p = prepare(cfg, cfg.k)?;
    let e = &p.matrices.e;
    let alpha0 = initial_alpha(&p.ms, e)?;
    let prop = SpectralPropagator::new(&p.sol, e, &alpha0)?;
    let reference = DenseReference::new(&p.h, &p.phi, &p.ms)?;
    let mut out = String::from("t,fidelity,observable,norm,im_diagnostic\n");
    for t in time_grid(cfg.time_grid.t_max, cfg.time_grid.points) {
        let alpha = prop.at(t);
        let fid = reference.fidelity(&alpha, t);
        let (obs, im) = match &p.observable {
            Some((_, m)) => {
                let v = sandwich(&alpha, m, &alpha);
                (format17(v.re), format17(v.im.abs()))
            }
            None => (String::new(), String::new()),
        };
        let norm = e_norm(e, &alpha).powi(2);
        let _ = writeln!(out, "{},{},{obs},{},{im}", format17(t), format17(fid), format17(norm));
    }
    Ok(out)
}

pub struct Comparison {
    pub csv: String,
    pub noise_p: f64,
}

/// `N,t,fidelity_trotter,fidelity_cqff_k1,fidelity_cqff_k2` on the step grid.
pub fn compare_trotter(cfg: &ExperimentConfig) -> Result<Comparison> {
    cfg.validate()?;
    let h = cfg.hamiltonian.build()?;
    let phi = cfg.initial_state.prepare(h.n_qubits())?;
    let noise_p = match cfg.noise_calibration {
        Some(cal) => calibrate_noise(&h, &phi, cal.steps, cal.fidelity, &cfg.trotter)?,
        None => cfg.trotter.noise_p,
    };
    let trotter = TrotterConfig { noise_p, ..cfg.trotter };
    let sg = cfg.step_grid;
    let grid = step_grid(sg.dense_until, sg.n_max, sg.per_decade);
    let trotter_f = fidelity_series(&h, &phi, &grid, &trotter)?;

    let mut cqff = Vec::new();
    for k in [1, 2] {
        let p = prepare(cfg, k)?;
        let alpha0 = initial_alpha(&p.ms, &p.matrices.e)?;
        let prop = SpectralPropagator::new(&p.sol, &p.matrices.e, &alpha0)?;
        let reference = DenseReference::new(&p.h, &p.phi, &p.ms)?;
        let col: Vec<f64> = grid
            .iter()
            .map(|&n| {
                let t = n as f64 * trotter.delta_t;
                reference.fidelity(&prop.at(t), t)
            })
            .collect();
        cqff.push(col);
    }

    let mut csv = String::from("N,t,fidelity_trotter,fidelity_cqff_k1,fidelity_cqff_k2\n");
    for (i, &n) in grid.iter().enumerate() {
        let tf = trotter_f[i].map(format17).unwrap_or_default();
        let _ = writeln!(
            csv,
            "{n},{},{tf},{},{}",
            format17(n as f64 * trotter.delta_t),
            format17(cqff[0][i]),
            format17(cqff[1][i])
        );
    }
    Ok(Comparison { csv, noise_p })
}

pub struct BoundsOutcome {
    pub table: String,
    pub all_hold: bool,
}

/// Seeded trial suites plus one Bauer–Fike check of a sampled metric
/// against its exact value for the configured experiment, if any.
pub fn bounds_report(cfg: Option<&ExperimentConfig>) -> Result<BoundsOutcome> {
    let settings = cfg.map(|c| c.bounds).unwrap_or_default().into();
    let mut rows = run_trial_suites(&settings)?;
    if let Some(cfg) = cfg {
        cfg.validate()?;
        let h = cfg.hamiltonian.build()?;
        let phi = cfg.initial_state.prepare(h.n_qubits())?;
        let ms = build_moment_set(&h, cfg.k);
        let exact = assemble_e(&ms, &phi, &EstimatorConfig::exact())?;
        let shots = cfg.estimator.shots.min(1024);
        let sampled = assemble_e(&ms, &phi, &EstimatorConfig::sampled(shots, cfg.estimator.seed))?;
        let mut row = SuiteSummary::empty("bauer-fike/E");
        row.record(&bauer_fike(&exact, &sampled)?);
        rows.push(row);
    }
    let all_hold = rows.iter().all(SuiteSummary::passed);
    Ok(BoundsOutcome {
        table: format_table(&rows),
        all_hold,
    })
}

/// Rows of the subspace-size table: label and `|CS_K|` for `K = 1 …`.
pub fn table1_sizes() -> Result<Vec<(String, Vec<usize>)>> {
    let rows = [(Builtin::H1, 2, 1), (Builtin::H1, 3, 2), (Builtin::H2, 4, 2), (Builtin::H2, 5, 3), (Builtin::H3, 2, 1)];
    rows.iter()
        .map(|&(b, n, k)| {
            let h = HamiltonianConfig::builtin(b, n).build()?;
            let sizes = build_moment_set(&h, k).cumulative_sizes()[1..].to_vec();
            Ok((format!("{b:?} ({n} qubits)"), sizes))
        })
        .collect()
}

pub fn moments_table(cfg: Option<&ExperimentConfig>) -> Result<String> {
    let mut out = String::new();
    match cfg {
        None => {
            let _ = writeln!(out, "{:<16} {:>5} {:>5} {:>5}", "", "K=1", "K=2", "K=3");
            for (label, sizes) in table1_sizes()? {
                let _ = write!(out, "{label:<16}");
                for s in sizes {
                    let _ = write!(out, " {s:>5}");
                }
                out.push('\n');
            }
        }
        Some(cfg) => {
            let h = cfg.hamiltonian.build()?;
            let ms = build_moment_set(&h, cfg.k);
            let _ = writeln!(out, "H = {h}");
            let _ = writeln!(out, "{:<6} {:>8} {:>10}", "level", "new", "cumulative");
            let mut prev = 0;
            for (p, c) in ms.cumulative_sizes().into_iter().enumerate() {
                let _ = writeln!(out, "{p:<6} {:>8} {c:>10}", c - prev);
                prev = c;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h3_config() -> ExperimentConfig {
        ExperimentConfig::from_json(
            r#"{"hamiltonian": {"builtin": "H3"}, "initial_state": {"basis": "10"}, "K": 2,
                "observable": "Z1", "time_grid": {"t_max": 2.0, "points": 5},
                "step_grid": {"dense_until": 5, "n_max": 100, "per_decade": 2}}"#,
        )
        .unwrap()
    }

    #[test]
    fn table1_matches_known_sizes() {
        let sizes: Vec<Vec<usize>> = table1_sizes().unwrap().into_iter().map(|r| r.1).collect();
        assert_eq!(sizes, vec![vec![4], vec![7, 16], vec![3, 4], vec![4, 7, 8], vec![3]]);
    }

    #[test]
    fn evolve_rows_follow_closed_form() {
        let csv = evolve_csv(&h3_config()).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,fidelity,observable,norm,im_diagnostic");
        assert_eq!(lines.len(), 6);
        for line in &lines[1..] {
            let f: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
            assert!((f[1] - 1.0).abs() < 1e-10);
            assert!((f[2] + (4.0 * f[0]).cos()).abs() < 1e-10);
        }
    }

    #[test]
    fn comparison_marks_absent_trotter_entries() {
        let mut cfg = h3_config();
        cfg.trotter.max_steps = 10;
        let c = compare_trotter(&cfg).unwrap();
        let last = c.csv.lines().last().unwrap();
        assert!(last.starts_with("100,"));
        assert_eq!(last.split(',').nth(2), Some(""));
        assert_eq!(c.noise_p, 0.0);
    }

    #[test]
    fn bounds_with_config_adds_sampled_row() {
        let mut cfg = h3_config();
        cfg.bounds.trials = 5;
        let out = bounds_report(Some(&cfg)).unwrap();
        assert!(out.all_hold, "{}", out.table);
        assert!(out.table.contains("bauer-fike/E"));
    }
}
