//! `nwl` command-line front end: CHSH and Werner sweeps, sampled protocol
//! circuit runs, witness training and post-measurement tomography.
//!
//! Sweeps write CSV (or JSON arrays); single-point commands write JSON (or
//! a flat CSV table). Angles are radians throughout.

pub mod commands;
pub mod grid;
pub mod tomography;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use nwl_core::states::StateParams;
use nwl_core::vew::{TrainConfig, WitnessFamily};

use commands::{Sampling, StateSpec};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    InvalidArgs(String),
    #[error(transparent)]
    Core(#[from] nwl_core::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Every failure maps to this code; success is 0.
pub const EXIT_ERROR: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "nwl",
    version,
    about = "Entanglement detection and nonlocal measurement numerics"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Shots per circuit execution.
    #[arg(long, default_value_t = 10_000)]
    pub shots: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Use exact outcome probabilities instead of sampled counts.
    #[arg(long)]
    pub exact: bool,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl CommonArgs {
    fn sampling(&self) -> Sampling {
        Sampling {
            shots: self.shots,
            seed: self.seed,
            exact: self.exact,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Chsh,
    Pauli,
}

impl From<FamilyArg> for WitnessFamily {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Chsh => WitnessFamily::ChshForm,
            FamilyArg::Pauli => WitnessFamily::PauliForm,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// CHSH value, meter estimates and entanglement over a (theta, phi) grid.
    ChshSweep {
        /// Comma list (`0,pi/4`) or `start:stop:count`. Default 0..pi in 9 steps.
        #[arg(long)]
        theta_grid: Option<String>,
        /// Default 0, pi/4, pi/2, 3pi/4.
        #[arg(long)]
        phi_grid: Option<String>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// One execution of the six-qubit protocol circuit.
    CircuitRun {
        #[arg(long, allow_hyphen_values = true)]
        theta: String,
        #[arg(long, allow_hyphen_values = true)]
        phi: String,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Train a variational witness on a pure or Werner state.
    VewTrain {
        #[arg(
            long,
            allow_hyphen_values = true,
            requires = "phi",
            conflicts_with = "werner"
        )]
        theta: Option<String>,
        #[arg(long, allow_hyphen_values = true, requires = "theta")]
        phi: Option<String>,
        /// Werner singlet weight p in [0, 1].
        #[arg(long)]
        werner: Option<f64>,
        #[arg(long, value_enum, default_value_t = FamilyArg::Chsh)]
        family: FamilyArg,
        /// Comma-separated starting parameters; family default when omitted.
        #[arg(long, allow_hyphen_values = true)]
        initial_alpha: Option<String>,
        #[arg(long, default_value_t = TrainConfig::DEFAULT_MAX_EVALS)]
        max_evals: usize,
        #[arg(long, default_value_t = TrainConfig::DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = TrainConfig::DEFAULT_PENALTY_WEIGHT)]
        penalty_weight: f64,
        #[arg(long, default_value_t = TrainConfig::DEFAULT_NORM_CAP)]
        norm_cap: f64,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Analytic Werner-state quantities over a p grid.
    WernerSweep {
        /// Comma list or `start:stop:count`. Default 0..1 in 21 steps.
        #[arg(long)]
        p_grid: Option<String>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Pauli tomography of the system state after both meters.
    Tomography {
        #[arg(long, allow_hyphen_values = true)]
        theta: String,
        #[arg(long, allow_hyphen_values = true)]
        phi: String,
        /// Project the linear-inversion estimate onto valid density matrices.
        #[arg(long)]
        psd_projection: bool,
        #[command(flatten)]
        common: CommonArgs,
    },
}

impl Command {
    pub fn common(&self) -> &CommonArgs {
        match self {
            Command::ChshSweep { common, .. }
            | Command::CircuitRun { common, .. }
            | Command::VewTrain { common, .. }
            | Command::WernerSweep { common, .. }
            | Command::Tomography { common, .. } => common,
        }
    }
}

fn to_csv<T: Serialize>(rows: &[T]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
    String::from_utf8(bytes).map_err(|e| CliError::InvalidArgs(e.to_string()))
}

fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

#[derive(Serialize)]
struct KeyValue<'a> {
    key: &'a str,
    value: String,
}

#[derive(Serialize)]
struct OutcomeRow<'a> {
    outcome: &'a str,
    count: Option<u64>,
    probability: f64,
}

#[derive(Serialize)]
struct SettingRow<'a> {
    setting: &'a str,
    estimated_expectation: f64,
}

fn state_params(theta: &str, phi: &str) -> Result<StateParams, CliError> {
    Ok(StateParams::new(
        grid::parse_value(theta)?,
        grid::parse_value(phi)?,
    ))
}

/// Executes a parsed command and returns the rendered output.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    match &cli.command {
        Command::ChshSweep {
            theta_grid,
            phi_grid,
            common,
        } => {
            let thetas = theta_grid
                .as_deref()
                .map(grid::parse_grid)
                .transpose()?
                .unwrap_or_else(grid::default_theta_grid);
            let phis = phi_grid
                .as_deref()
                .map(grid::parse_grid)
                .transpose()?
                .unwrap_or_else(grid::default_phi_grid);
            let rows = commands::chsh_sweep(&thetas, &phis, common.sampling())?;
            match common.format.unwrap_or(Format::Csv) {
                Format::Csv => to_csv(&rows),
                Format::Json => to_json(&rows),
            }
        }
        Command::WernerSweep { p_grid, common } => {
            let ps = p_grid
                .as_deref()
                .map(grid::parse_grid)
                .transpose()?
                .unwrap_or_else(grid::default_p_grid);
            let rows = commands::werner_sweep(&ps)?;
            match common.format.unwrap_or(Format::Csv) {
                Format::Csv => to_csv(&rows),
                Format::Json => to_json(&rows),
            }
        }
        Command::CircuitRun { theta, phi, common } => {
            let run = commands::circuit_run(state_params(theta, phi)?, common.sampling())?;
            match common.format.unwrap_or(Format::Json) {
                Format::Json => to_json(&run),
                Format::Csv => {
                    let rows: Vec<OutcomeRow> = run
                        .probabilities
                        .iter()
                        .map(|(k, &p)| OutcomeRow {
                            outcome: k,
                            count: run.counts.as_ref().map(|c| c[k]),
                            probability: p,
                        })
                        .collect();
                    to_csv(&rows)
                }
            }
        }
        Command::VewTrain {
            theta,
            phi,
            werner,
            family,
            initial_alpha,
            max_evals,
            tol,
            penalty_weight,
            norm_cap,
            common,
        } => {
            let state = match (theta, phi, werner) {
                (Some(t), Some(p), None) => StateSpec::Pure {
                    theta: grid::parse_value(t)?,
                    phi: grid::parse_value(p)?,
                },
                (None, None, Some(p)) => StateSpec::Werner { p: *p },
                _ => {
                    return Err(CliError::InvalidArgs(
                        "give either --theta and --phi, or --werner".into(),
                    ))
                }
            };
            let family = WitnessFamily::from(*family);
            let mut cfg = TrainConfig::for_family(family, common.seed);
            if let Some(a) = initial_alpha {
                cfg.initial_alpha = a
                    .split(',')
                    .map(grid::parse_value)
                    .collect::<Result<_, _>>()?;
            }
            cfg.max_evals = *max_evals;
            cfg.tol = *tol;
            cfg.penalty_weight = *penalty_weight;
            cfg.norm_cap = *norm_cap;
            if cfg.max_evals < family.n_params() + 2 {
                return Err(CliError::InvalidArgs(format!(
                    "--max-evals must be at least {}",
                    family.n_params() + 2
                )));
            }
            let out = commands::vew_train(state, family, &cfg)?;
            match common.format.unwrap_or(Format::Json) {
                Format::Json => to_json(&out),
                Format::Csv => {
                    let r = &out.result;
                    let join = |v: &[f64]| {
                        v.iter()
                            .map(|x| x.to_string())
                            .collect::<Vec<_>>()
                            .join(";")
                    };
                    let rows = [
                        KeyValue {
                            key: "family",
                            value: format!("{:?}", r.family),
                        },
                        KeyValue {
                            key: "alpha_star",
                            value: join(&r.alpha_star),
                        },
                        KeyValue {
                            key: "witness_value",
                            value: r.witness_value.to_string(),
                        },
                        KeyValue {
                            key: "constraint_residuals",
                            value: join(&r.constraint_residuals),
                        },
                        KeyValue {
                            key: "evals_used",
                            value: r.evals_used.to_string(),
                        },
                        KeyValue {
                            key: "initial_alpha",
                            value: join(&r.initial_alpha),
                        },
                        KeyValue {
                            key: "seed",
                            value: r.seed.to_string(),
                        },
                        KeyValue {
                            key: "norm_cap",
                            value: r.norm_cap.to_string(),
                        },
                        KeyValue {
                            key: "penalty_weight",
                            value: r.penalty_weight.to_string(),
                        },
                    ];
                    to_csv(&rows)
                }
            }
        }
        Command::Tomography {
            theta,
            phi,
            psd_projection,
            common,
        } => {
            let result = tomography::tomography(
                state_params(theta, phi)?,
                common.sampling(),
                *psd_projection,
            )?;
            match common.format.unwrap_or(Format::Json) {
                Format::Json => to_json(&result),
                Format::Csv => {
                    let rows: Vec<SettingRow> = result
                        .settings
                        .iter()
                        .map(|r| SettingRow {
                            setting: &r.setting,
                            estimated_expectation: r.estimated_expectation,
                        })
                        .collect();
                    to_csv(&rows)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<Cli, clap::Error> {
        Cli::try_parse_from(std::iter::once("nwl").chain(args.iter().copied()))
    }

    #[test]
    fn werner_sweep_csv_header() {
        let cli = parse(&["werner-sweep", "--p-grid", "0,1"]).unwrap();
        let out = run(&cli).unwrap();
        assert!(
            out.starts_with("p,chsh,ppt,concurrence,region,zz,xx,rho2_corner,rho2_concurrence\n")
        );
        assert_eq!(out.lines().count(), 3);
    }

    #[test]
    fn chsh_sweep_csv_header() {
        let cli = parse(&[
            "chsh-sweep",
            "--theta-grid",
            "0",
            "--phi-grid",
            "0",
            "--exact",
        ])
        .unwrap();
        let out = run(&cli).unwrap();
        assert!(out.starts_with(
            "theta,phi,chsh_analytic,chsh_sampled,zz_sampled,xx_sampled,ppt,concurrence,square_error\n"
        ));
    }

    #[test]
    fn vew_train_state_selection() {
        assert!(parse(&["vew-train", "--theta", "0.1", "--werner", "0.5"]).is_err());
        assert!(parse(&["vew-train", "--theta", "0.1"]).is_err());
        let cli = parse(&["vew-train"]).unwrap();
        assert!(matches!(run(&cli), Err(CliError::InvalidArgs(_))));
        let cli = parse(&[
            "vew-train",
            "--werner",
            "0",
            "--family",
            "pauli",
            "--format",
            "csv",
        ])
        .unwrap();
        let out = run(&cli).unwrap();
        assert!(out.starts_with("key,value\nfamily,PauliForm\n"));
    }

    #[test]
    fn bad_arguments() {
        assert!(parse(&["circuit-run", "--theta", "0"]).is_err());
        let cli = parse(&["circuit-run", "--theta", "zz", "--phi", "0"]).unwrap();
        assert!(run(&cli).is_err());
        let cli = parse(&["circuit-run", "--theta", "0", "--phi", "0", "--shots", "0"]).unwrap();
        assert!(run(&cli).is_err());
        let cli = parse(&["werner-sweep", "--p-grid", "0,2"]).unwrap();
        assert!(run(&cli).is_err());
    }
}
