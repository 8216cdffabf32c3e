//! Command-line experiment runner.

pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::backend::{EstimatorConfig, EstimatorMode};
use crate::error::{Error, Result};
use crate::hamiltonian::Boundary;

use config::{Builtin, ExperimentConfig, HamiltonianConfig, InitialState, NoiseCalibration, Overrides};

pub const EXIT_IO: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "cqff", version, about = "Classical-quantum fast-forwarding experiments")]
pub struct Cli {
    /// Experiment config (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Overrides the estimator, initial-state and trial seeds.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub shots: Option<u32>,
    #[arg(long, global = true, value_enum)]
    pub mode: Option<ModeArg>,
    /// Relative metric cutoff.
    #[arg(long, global = true)]
    pub cutoff: Option<f64>,
    /// Moment order K.
    #[arg(long, global = true)]
    pub k: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModeArg {
    Exact,
    Sampled,
}

impl From<ModeArg> for EstimatorMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Exact => EstimatorMode::Exact,
            ModeArg::Sampled => EstimatorMode::Sampled,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Moment-set sizes per level (the builtin table without a config).
    Moments,
    /// Writes D, E and observable matrices as JSON.
    Matrices,
    /// Writes the fidelity and observable trace as CSV.
    Evolve,
    /// Writes the Trotter vs fast-forward fidelity comparison as CSV.
    CompareTrotter,
    /// Runs the perturbation-bound trial suites.
    Bounds,
    /// Regenerates one of the builtin experiments.
    Reproduce {
        #[arg(value_enum)]
        target: Target,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Target {
    Table1,
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
}

impl Target {
    pub fn name(self) -> &'static str {
        match self {
            Target::Table1 => "table1",
            Target::Fig1 => "fig1",
            Target::Fig2 => "fig2",
            Target::Fig3 => "fig3",
            Target::Fig4 => "fig4",
            Target::Fig5 => "fig5",
        }
    }

    /// Builtin config; `None` for the table, which needs none.
    pub fn config(self) -> Option<ExperimentConfig> {
        let layered = InitialState::Layered { layers: 5, seed: 1 };
        let h1 = |n| HamiltonianConfig::Builtin {
            builtin: Builtin::H1,
            n_qubits: Some(n),
            couplings: Some([1.0, 2.0, 3.0]),
            j_zxz: None,
            boundary: None,
        };
        let h2 = |n| HamiltonianConfig::Builtin {
            builtin: Builtin::H2,
            n_qubits: Some(n),
            couplings: None,
            j_zxz: Some(1.0),
            boundary: Some(Boundary::Interior),
        };
        let (h, state, k, obs) = match self {
            Target::Table1 => return None,
            Target::Fig1 => (h1(2), layered, 1, "Z1"),
            Target::Fig2 => (h1(3), layered, 2, "Z1"),
            Target::Fig3 => (h2(4), layered, 2, "Y2"),
            Target::Fig4 => (h2(5), layered, 3, "Y2"),
            Target::Fig5 => (
                HamiltonianConfig::builtin(Builtin::H3, 2),
                InitialState::Basis("10".into()),
                2,
                "Z1",
            ),
        };
        Some(ExperimentConfig {
            hamiltonian: h,
            initial_state: state,
            k,
            estimator: EstimatorConfig::sampled(crate::backend::DEFAULT_SHOTS, 1),
            time_grid: Default::default(),
            observable: Some(obs.into()),
            observable_mode: EstimatorMode::Exact,
            cutoff: None,
            trotter: Default::default(),
            step_grid: Default::default(),
            noise_calibration: (self == Target::Fig5).then(NoiseCalibration::default),
            bounds: Default::default(),
            outputs: Default::default(),
        })
    }
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } | Error::Config(_) | Error::Json(_) => EXIT_CONFIG,
        Error::Dimension { .. } | Error::DenseLimit { .. } | Error::Contract(_) | Error::DegenerateMetric { .. } => {
            EXIT_NUMERICAL
        }
        Error::Io(_) => EXIT_IO,
    }
}

fn load_config(cli: &Cli) -> Result<Option<ExperimentConfig>> {
    let Some(path) = &cli.config else {
        return Ok(None);
    };
    let mut cfg = ExperimentConfig::load(path)?;
    cfg.apply(&overrides(cli));
    cfg.validate()?;
    Ok(Some(cfg))
}

fn overrides(cli: &Cli) -> Overrides {
    Overrides {
        seed: cli.seed,
        shots: cli.shots,
        mode: cli.mode.map(Into::into),
        cutoff: cli.cutoff,
        k: cli.k,
    }
}

fn require(cfg: Option<ExperimentConfig>, command: &str) -> Result<ExperimentConfig> {
    cfg.ok_or_else(|| Error::Config(format!("`{command}` needs --config")))
}

fn write_file(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, text)?;
    Ok(path)
}

fn write_manifest(
    dir: &Path,
    command: &str,
    cfg: Option<&ExperimentConfig>,
    derived: serde_json::Value,
    files: &[PathBuf],
) -> Result<PathBuf> {
    let names: Vec<String> = files
        .iter()
        .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
        .collect();
    let manifest = json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "seeds": cfg.map(commands::seeds),
        "derived": derived,
        "files": names,
    });
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    write_file(dir, "manifest.json", &text)
}

/// Runs one experiment config through the pipeline a reproduce target uses.
fn run_experiment(
    dir: &Path,
    label: &str,
    cfg: &ExperimentConfig,
    out: &mut dyn Write,
) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    let mut derived = json!({});
    if cfg.noise_calibration.is_some() {
        let c = commands::compare_trotter(cfg)?;
        derived = json!({ "noise_p": c.noise_p });
        files.push(write_file(dir, &cfg.outputs.comparison, &c.csv)?);
    } else {
        let m = commands::matrices_file(cfg)?;
        files.push(write_file(dir, &cfg.outputs.matrices, &m.to_json()?)?);
        files.push(write_file(dir, &cfg.outputs.trace, &commands::evolve_csv(cfg)?)?);
    }
    files.push(write_manifest(dir, label, Some(cfg), derived, &files)?);
    for f in &files {
        writeln!(out, "{}", f.display())?;
    }
    Ok(files)
}

pub fn reproduce(
    target: Target,
    overrides: &Overrides,
    out_dir: &Path,
    out: &mut dyn Write,
) -> Result<Vec<PathBuf>> {
    let dir = out_dir.join(target.name());
    let label = format!("reproduce {}", target.name());
    match target.config() {
        None => {
            let table = commands::moments_table(None)?;
            out.write_all(table.as_bytes())?;
            let mut files = vec![write_file(&dir, "moments.txt", &table)?];
            files.push(write_manifest(&dir, &label, None, json!({}), &files)?);
            Ok(files)
        }
        Some(mut cfg) => {
            cfg.apply(overrides);
            cfg.validate()?;
            run_experiment(&dir, &label, &cfg, out)
        }
    }
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    let cfg = load_config(cli)?;
    let dir = cli.out.as_path();
    match &cli.command {
        Command::Moments => {
            let table = commands::moments_table(cfg.as_ref())?;
            out.write_all(table.as_bytes())?;
            if let Some(cfg) = &cfg {
                let f = write_file(dir, &cfg.outputs.moments, &table)?;
                write_manifest(dir, "moments", Some(cfg), json!({}), &[f])?;
            }
        }
        Command::Matrices => {
            let cfg = require(cfg, "matrices")?;
            let m = commands::matrices_file(&cfg)?;
            let f = write_file(dir, &cfg.outputs.matrices, &m.to_json()?)?;
            write_manifest(dir, "matrices", Some(&cfg), json!({}), std::slice::from_ref(&f))?;
            writeln!(out, "{}", f.display())?;
        }
        Command::Evolve => {
            let cfg = require(cfg, "evolve")?;
            let f = write_file(dir, &cfg.outputs.trace, &commands::evolve_csv(&cfg)?)?;
            write_manifest(dir, "evolve", Some(&cfg), json!({}), std::slice::from_ref(&f))?;
            writeln!(out, "{}", f.display())?;
        }
        Command::CompareTrotter => {
            let cfg = require(cfg, "compare-trotter")?;
            let c = commands::compare_trotter(&cfg)?;
            let f = write_file(dir, &cfg.outputs.comparison, &c.csv)?;
            write_manifest(dir, "compare-trotter", Some(&cfg), json!({ "noise_p": c.noise_p }), std::slice::from_ref(&f))?;
            writeln!(out, "{}", f.display())?;
        }
        Command::Bounds => {
            let report = commands::bounds_report(cfg.as_ref())?;
            out.write_all(report.table.as_bytes())?;
            if let Some(cfg) = &cfg {
                let f = write_file(dir, &cfg.outputs.bounds, &report.table)?;
                write_manifest(dir, "bounds", Some(cfg), json!({}), &[f])?;
            }
            if !report.all_hold {
                return Err(Error::Contract("a perturbation bound was violated".into()));
            }
        }
        Command::Reproduce { target } => {
            if cli.config.is_some() {
                return Err(Error::Config("`reproduce` uses builtin configs; drop --config".into()));
            }
            reproduce(*target, &overrides(cli), dir, out)?;
        }
    }
    Ok(())
}

/// Parses `args`, runs, and maps failures onto exit codes.
pub fn main_entry<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match run(&cli, &mut lock) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
