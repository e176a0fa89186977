use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use elastring::config::RunConfig;
use elastring::model::DiracConvention;
use elastring_cli::{
    run_crosscheck, run_invert, run_modes, run_residuals, run_simulate, run_validate, CliResult,
    Solver,
};

#[derive(Parser)]
#[command(name = "elastring", version, about = "Taut string with elastic point supports")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the displacement field and write field, energy and profiles.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "galerkin-exact")]
        solver: SolverArg,
    },
    /// Natural frequencies from the Galerkin basis and the characteristic equation.
    Modes(Common),
    /// Fit the tension to measured natural frequencies.
    InvertTension {
        #[command(flatten)]
        common: Common,
        /// Comma-separated frequencies in Hz, overriding the config.
        #[arg(long, value_delimiter = ',')]
        measured: Option<Vec<f64>>,
    },
    /// Report compatibility of the initial data with the supports.
    Validate(Common),
    /// Series residuals driven by the finite-difference support trace.
    Residuals(Common),
    /// Compare frequencies and fields across methods.
    Crosscheck(Common),
}

#[derive(Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Bundled configuration name.
    #[arg(long)]
    preset: Option<String>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Galerkin basis size.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    nt: Option<usize>,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long, value_enum)]
    convention: Option<ConventionArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    GalerkinExact,
    GalerkinLeapfrog,
    FdCoupled,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConventionArg {
    Dirac,
    #[value(name = "paper-L")]
    PaperL,
}

impl Common {
    fn resolve(&self) -> CliResult<RunConfig> {
        let base = match (&self.config, &self.preset) {
            (Some(path), _) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    elastring::Error::Config(format!("cannot read {}: {e}", path.display()))
                })?;
                RunConfig::from_toml_str(&text).map_err(|e| prefix_path(e, path))?
            }
            (None, Some(name)) => RunConfig::preset(name)?,
            (None, None) => unreachable!("clap requires --config or --preset"),
        };
        let convention = self.convention.map(|c| match c {
            ConventionArg::Dirac => DiracConvention::DiracConsistent,
            ConventionArg::PaperL => DiracConvention::PaperFactorL,
        });
        Ok(base.with_overrides(self.m, self.nx, self.nt, self.horizon, convention)?)
    }
}

fn prefix_path(e: elastring::Error, path: &std::path::Path) -> elastring::Error {
    match e {
        elastring::Error::Config(msg) => elastring::Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    }
}

fn run(cli: Cli) -> CliResult<bool> {
    match cli.command {
        Command::Simulate { common, solver } => {
            let solver = match solver {
                SolverArg::GalerkinExact => Solver::GalerkinExact,
                SolverArg::GalerkinLeapfrog => Solver::GalerkinLeapfrog,
                SolverArg::FdCoupled => Solver::FdCoupled,
            };
            run_simulate(&common.resolve()?, solver, &common.out)?;
        }
        Command::Modes(common) => {
            run_modes(&common.resolve()?, &common.out)?;
        }
        Command::InvertTension { common, measured } => {
            run_invert(&common.resolve()?, measured, &common.out)?;
        }
        Command::Validate(common) => {
            run_validate(&common.resolve()?, &common.out)?;
        }
        Command::Residuals(common) => {
            run_residuals(&common.resolve()?, &common.out)?;
        }
        Command::Crosscheck(common) => {
            let (_, pass) = run_crosscheck(&common.resolve()?, &common.out)?;
            if !pass {
                eprintln!("crosscheck: frequencies disagree beyond the tolerance");
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
