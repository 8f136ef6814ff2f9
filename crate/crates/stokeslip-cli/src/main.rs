//! Command-line driver: solves the built-in benchmark cases, reproduces
//! the convergence and slip-violation tables, runs patch tests and
//! estimates the inverse/trace constants.
//!
//! Options may also come from a `key = value` config file (`--config`);
//! explicit command-line flags win over file values.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use stokeslip::driver::{parse_config_file, run, BetaArg, MeshSource, RunCommand, RunSpec};

#[derive(Parser)]
#[command(
    name = "stokeslip",
    about = "Stabilized equal-order finite elements for Stokes flow with Nitsche slip conditions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Built-in case name (cavity2d, patch2d, patch3d, patch-affine3d,
    /// manufactured2d, naca2d, cylinder3d)
    #[arg(long)]
    case: Option<String>,
    /// Nitsche variant: -1 (skew-symmetric), 0 (incomplete), 1 (symmetric)
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<i64>,
    /// Nitsche penalty parameter (> 0)
    #[arg(long)]
    gamma0: Option<f64>,
    /// Stabilization parameter: a positive real, or `auto` to select it
    /// from the estimated inverse/trace constants
    #[arg(long)]
    beta: Option<String>,
    /// Polynomial degree for velocity and pressure (1 or 2)
    #[arg(long)]
    degree: Option<usize>,
    /// Viscosity (> 0); defaults to the case's reference value
    #[arg(long)]
    nu: Option<f64>,
    /// Structured refinement levels, comma separated (e.g. 8,16,32)
    #[arg(long)]
    levels: Option<String>,
    /// Structured refinement level for single-mesh commands
    #[arg(long)]
    n: Option<usize>,
    /// Mesh file in the text format (for naca2d / cylinder3d)
    #[arg(long)]
    mesh: Option<PathBuf>,
    /// Output directory for CSV/VTK/JSON artifacts
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed recorded in reports and used by randomized diagnostics
    #[arg(long)]
    seed: Option<u64>,
    /// Key-value config file; command-line flags override its entries
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one case on one mesh and export the fields
    Solve(Common),
    /// Convergence study over --levels with CSV output
    Converge(Common),
    /// Reproduce the in-space patch solutions for all Nitsche variants
    PatchTest {
        /// Spatial dimension of the patch (2 or 3)
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Estimate the inverse and trace inequality constants of a mesh
    EstimateConstants(Common),
    /// Slip-violation sweep over theta in {-1, 1} and gamma0 in {1e-3, 1, 1e3}
    SweepSlip(Common),
}

fn merge_config(common: &mut Common) -> Result<()> {
    let Some(path) = &common.config else {
        return Ok(());
    };
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config file {}", path.display()))?;
    for (key, value) in parse_config_file(&text)? {
        match key.as_str() {
            "case" => set_if_absent(&mut common.case, value),
            "theta" => {
                if common.theta.is_none() {
                    common.theta = Some(value.parse().context("theta in config file")?);
                }
            }
            "gamma0" => {
                if common.gamma0.is_none() {
                    common.gamma0 = Some(value.parse().context("gamma0 in config file")?);
                }
            }
            "beta" => set_if_absent(&mut common.beta, value),
            "degree" => {
                if common.degree.is_none() {
                    common.degree = Some(value.parse().context("degree in config file")?);
                }
            }
            "nu" => {
                if common.nu.is_none() {
                    common.nu = Some(value.parse().context("nu in config file")?);
                }
            }
            "levels" => set_if_absent(&mut common.levels, value),
            "n" => {
                if common.n.is_none() {
                    common.n = Some(value.parse().context("n in config file")?);
                }
            }
            "mesh" => {
                if common.mesh.is_none() {
                    common.mesh = Some(PathBuf::from(value));
                }
            }
            "out" => {
                if common.out.is_none() {
                    common.out = Some(PathBuf::from(value));
                }
            }
            "seed" => {
                if common.seed.is_none() {
                    common.seed = Some(value.parse().context("seed in config file")?);
                }
            }
            other => bail!("unknown config key `{other}`"),
        }
    }
    Ok(())
}

fn set_if_absent(slot: &mut Option<String>, value: String) {
    if slot.is_none() {
        *slot = Some(value);
    }
}

fn parse_levels(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<usize>()
                .with_context(|| format!("bad level `{tok}`"))
        })
        .collect()
}

fn build_spec(command: RunCommand, mut common: Common, default_case: &str) -> Result<RunSpec> {
    merge_config(&mut common)?;
    let beta = match common.beta.as_deref() {
        None | Some("auto") => BetaArg::Auto,
        Some(text) => {
            let value: f64 = text.parse().with_context(|| format!("bad beta `{text}`"))?;
            BetaArg::Value(value)
        }
    };
    let mesh = if let Some(path) = common.mesh {
        MeshSource::File(path)
    } else if let Some(levels) = &common.levels {
        let levels = parse_levels(levels)?;
        if levels.len() == 1 && !matches!(command, RunCommand::Converge | RunCommand::SweepSlip) {
            MeshSource::Level(levels[0])
        } else {
            MeshSource::Levels(levels)
        }
    } else if let Some(n) = common.n {
        match command {
            RunCommand::Converge | RunCommand::SweepSlip => MeshSource::Levels(vec![n]),
            _ => MeshSource::Level(n),
        }
    } else {
        match command {
            RunCommand::Converge => MeshSource::Levels(vec![8, 16, 32, 64, 128]),
            RunCommand::SweepSlip => MeshSource::Levels(vec![8, 16, 32, 64, 128]),
            _ => MeshSource::Level(8),
        }
    };
    Ok(RunSpec {
        command,
        case: common.case.unwrap_or_else(|| default_case.to_string()),
        nu: common.nu,
        theta: common.theta.unwrap_or(-1),
        gamma0: common.gamma0,
        beta,
        degree: common.degree.unwrap_or(1),
        mesh,
        out_dir: common.out.unwrap_or_else(|| PathBuf::from("out")),
        seed: common.seed.unwrap_or(0),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let spec = match cli.command {
        Command::Solve(common) => build_spec(RunCommand::Solve, common, "cavity2d"),
        Command::Converge(common) => build_spec(RunCommand::Converge, common, "cavity2d"),
        Command::PatchTest { dim, common } => {
            let case = if dim == 2 { "patch2d" } else { "patch3d" };
            build_spec(RunCommand::PatchTest { dim }, common, case)
        }
        Command::EstimateConstants(common) => {
            build_spec(RunCommand::EstimateConstants, common, "cavity2d")
        }
        Command::SweepSlip(common) => build_spec(RunCommand::SweepSlip, common, "cavity2d"),
    };
    let spec = match spec {
        Ok(spec) => spec,
        Err(err) => {
            eprintln!("error: {err:#}");
            return ExitCode::from(2);
        }
    };
    match run(&spec) {
        Ok(artifacts) => {
            for file in &artifacts.files {
                println!("wrote {}", file.display());
            }
            if artifacts.exit_ok {
                ExitCode::SUCCESS
            } else {
                eprintln!("run completed with failures (see report.json)");
                ExitCode::FAILURE
            }
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
