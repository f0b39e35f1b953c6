//! `cfdiamond`: evaluate CF rates, certify infinite-slope cooperation gains
//! and sweep slope curves from the command line.
//!
//! Reports are JSON (or CSV for curves) on stdout or in `--out`. Failures
//! print one line `cfdiamond: error kind=<kind> reason=<json string>` on
//! stderr and exit with a status that identifies the kind.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cfdiamond::run::{dispatch, Command, Example, ExampleAction, Format, RunConfig, DEFAULT_GRID_RESOLUTION};
use cfdiamond::tol::{LAMBDA_GRID, TOL_DEV, TOL_LP, TOL_NORM, TOL_SUPP};
use cfdiamond::{ErrorKind, Tolerances};
use clap::{Args, Parser, Subcommand, ValueEnum};

const EXIT_SCHEMA: u8 = 3;
const EXIT_PRECONDITION: u8 = 4;
const EXIT_NUMERICAL: u8 = 5;
const EXIT_IO: u8 = 6;

#[derive(Parser, Debug)]
#[command(
    name = "cfdiamond",
    version,
    about = "Relay and diamond networks with a cooperation facilitator"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    #[arg(long, global = true, default_value_t = TOL_NORM)]
    tol_norm: f64,
    #[arg(long, global = true, default_value_t = TOL_SUPP)]
    tol_supp: f64,
    #[arg(long, global = true, default_value_t = TOL_DEV)]
    tol_dev: f64,
    #[arg(long, global = true, default_value_t = TOL_LP)]
    tol_lp: f64,
    #[arg(long, global = true, default_value_t = LAMBDA_GRID)]
    lambda_grid: usize,
    /// Comma-separated step sizes for slope curves.
    #[arg(long, global = true, value_delimiter = ',')]
    alpha_schedule: Option<Vec<f64>>,
    #[arg(long, global = true, default_value_t = DEFAULT_GRID_RESOLUTION)]
    grid_resolution: usize,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct Inputs {
    /// Channel as a RelayNetSpec JSON file.
    #[arg(long)]
    spec: PathBuf,
    /// Coding distribution as a CodingDist JSON file.
    #[arg(long)]
    coding: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// CF achievable rate of a coding distribution.
    EvalThm1(Inputs),
    /// PD/CF rate without cooperation, with the reduction residuals.
    EvalPdcf(Inputs),
    /// Infinite-slope verdict for a Markov-form coding distribution.
    CheckSlope(Inputs),
    /// Rate gain per bit of cooperation along the certified direction.
    SweepCurve(Inputs),
    /// Built-in example channels.
    Example {
        #[command(subcommand)]
        which: ExampleCmd,
    },
    /// Three-relay diamond network over a two-user MAC.
    Diamond3 {
        /// MAC as a MacSpec JSON file.
        #[arg(long)]
        mac: PathBuf,
        /// Cooperative sum-capacity samples, CSV with header c_cf,c_sum.
        #[arg(long)]
        curve: Option<PathBuf>,
        /// MAC rate pair and slack for the rate-splitting code: r0,r1,eps.
        #[arg(long, value_parser = parse_split)]
        split: Option<(f64, f64, f64)>,
    },
}

fn parse_split(s: &str) -> Result<(f64, f64, f64), String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [r0, r1, eps] => Ok((r0, r1, eps)),
        _ => Err(format!("expected r0,r1,eps, got {} values", parts.len())),
    }
}

#[derive(Subcommand, Debug)]
enum ExampleCmd {
    /// Two binary erasure links with a further-erasing relay.
    Bec {
        #[arg(long)]
        p: f64,
        /// Further-erasure probability; optimised when omitted.
        #[arg(long)]
        q: Option<f64>,
        #[arg(long)]
        c0: f64,
        #[arg(value_enum)]
        action: ActionArg,
    },
    /// Y1 = X xor Z, Yr = Z xor W.
    Modadd {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        c0: f64,
        #[arg(value_enum)]
        action: ActionArg,
    },
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum ActionArg {
    Rate,
    CheckSlope,
    SweepCurve,
    Lambda,
    Spec,
    Coding,
}

impl From<ActionArg> for ExampleAction {
    fn from(a: ActionArg) -> Self {
        match a {
            ActionArg::Rate => ExampleAction::Rate,
            ActionArg::CheckSlope => ExampleAction::CheckSlope,
            ActionArg::SweepCurve => ExampleAction::SweepCurve,
            ActionArg::Lambda => ExampleAction::Lambda,
            ActionArg::Spec => ExampleAction::Spec,
            ActionArg::Coding => ExampleAction::Coding,
        }
    }
}

impl Cli {
    fn into_config(self) -> RunConfig {
        let command = match self.command {
            Cmd::EvalThm1(i) => Command::EvalThm1 {
                spec: i.spec,
                coding: i.coding,
            },
            Cmd::EvalPdcf(i) => Command::EvalPdcf {
                spec: i.spec,
                coding: i.coding,
            },
            Cmd::CheckSlope(i) => Command::CheckSlope {
                spec: i.spec,
                coding: i.coding,
            },
            Cmd::SweepCurve(i) => Command::SweepCurve {
                spec: i.spec,
                coding: i.coding,
            },
            Cmd::Example { which } => match which {
                ExampleCmd::Bec { p, q, c0, action } => Command::Example {
                    example: Example::Bec { p, q, c0 },
                    action: action.into(),
                },
                ExampleCmd::Modadd { p, delta, c0, action } => Command::Example {
                    example: Example::Modadd { p, delta, c0 },
                    action: action.into(),
                },
            },
            Cmd::Diamond3 { mac, curve, split } => Command::Diamond3 { mac, curve, split },
        };
        RunConfig {
            command,
            tolerances: Tolerances {
                norm: self.tol_norm,
                supp: self.tol_supp,
                dev: self.tol_dev,
                lp: self.tol_lp,
                lambda_grid: self.lambda_grid,
            },
            alpha_schedule: self.alpha_schedule,
            grid_resolution: self.grid_resolution,
            format: match self.format {
                FormatArg::Json => Format::Json,
                FormatArg::Csv => Format::Csv,
            },
        }
    }
}

/// Writes through a temporary file in the target directory, then renames.
fn write_atomic(path: &Path, text: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(text.as_bytes())?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn fail(kind: &str, code: u8, reason: &str) -> ExitCode {
    let quoted = serde_json::to_string(reason).unwrap_or_else(|_| "\"?\"".into());
    eprintln!("cfdiamond: error kind={kind} reason={quoted}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("CFD_LOG_LEVEL")).init();
    let cli = Cli::parse();
    let out = cli.out.clone();
    let cfg = cli.into_config();
    let output = match dispatch(&cfg) {
        Ok(o) => o,
        Err(e) => {
            let (kind, code) = match e.kind() {
                ErrorKind::Schema => ("schema", EXIT_SCHEMA),
                ErrorKind::Precondition => ("precondition", EXIT_PRECONDITION),
                ErrorKind::Numerical => ("numerical", EXIT_NUMERICAL),
                ErrorKind::Io => ("io", EXIT_IO),
            };
            return fail(kind, code, &e.to_string());
        }
    };
    let written = match &out {
        Some(path) => write_atomic(path, &output.body).and_then(|()| match &output.sidecar {
            Some(meta) => {
                let mut name = path.as_os_str().to_owned();
                name.push(".meta.json");
                write_atomic(Path::new(&name), meta)
            }
            None => Ok(()),
        }),
        None => std::io::stdout().write_all(output.body.as_bytes()),
    };
    match written {
        Ok(()) => {
            log::info!(
                "wrote {}",
                out.as_deref().map_or("stdout".into(), |p| p.display().to_string())
            );
            ExitCode::SUCCESS
        }
        Err(e) => fail("io", EXIT_IO, &e.to_string()),
    }
}
