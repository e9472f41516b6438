//! Command-line front end: eigenlevel reports, single runs and sweeps.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use photoalign::channel::{ChannelLabel, Manifold};
use photoalign::config::RunConfig;
use photoalign::experiment::{simulate, RunError, Sampling};
use photoalign::output::{eigen_csv, sweep_csv, trace_csv};
use photoalign::radial::{RadialError, SolveOptions};
use photoalign::sweep::run_sweep;
use photoalign::system::{level_tables, PhotoassociationSystem, SystemError};

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_PARTIAL: u8 = 4;

#[derive(Parser)]
#[command(name = "photoalign", version, about = "Pulsed photoassociation into aligned molecules")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Bound levels, rotational constants and turning points per channel.
    Eigen,
    /// One thermal run; writes the time series.
    Propagate,
    /// Parameter scan; writes one row per point.
    Sweep,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(message: impl std::fmt::Display) -> Self {
        Self { code: EXIT_CONFIG, message: message.to_string() }
    }

    fn numerical(message: impl std::fmt::Display) -> Self {
        Self { code: EXIT_NUMERICAL, message: message.to_string() }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: &Cli) -> Result<u8, Failure> {
    let path = cli.config.as_deref().ok_or_else(|| Failure::config("--config PATH is required"))?;
    let mut config = RunConfig::load(path).map_err(Failure::config)?;
    if let Some(w) = cli.workers {
        if let Some(s) = config.sweep.as_mut() {
            s.workers = w;
        }
        rayon::ThreadPoolBuilder::new().num_threads(w).build_global().ok();
    }
    fs::create_dir_all(&cli.out).map_err(|e| Failure::config(format!("{}: {e}", cli.out.display())))?;
    let hash = config.hash();
    write(&cli.out, &format!("{}_config.toml", config.output.prefix), &config.echo())?;
    match cli.command {
        Command::Eigen => eigen(&config, &cli.out, &hash),
        Command::Propagate => propagate(&config, &cli.out, &hash),
        Command::Sweep => sweep(&config, &cli.out, &hash),
    }
}

fn write(dir: &Path, name: &str, text: &str) -> Result<(), Failure> {
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| Failure::numerical(format!("{}: {e}", path.display())))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn remediation(e: &RadialError) -> String {
    match e {
        RadialError::NotConverged { .. } => {
            format!("{e}\nhint: raise grid.beta (mapped) or grid.points (uniform), or extend grid.r_max")
        }
        other => other.to_string(),
    }
}

fn system_failure(e: SystemError) -> Failure {
    match e {
        SystemError::Radial(r @ RadialError::NotConverged { .. }) => Failure::numerical(remediation(&r)),
        SystemError::Radial(r @ (RadialError::Table(_) | RadialError::Projection { .. })) => Failure::config(r),
        SystemError::Invalid(m) => Failure::config(m),
        other => Failure::numerical(other),
    }
}

fn run_failure(e: RunError) -> Failure {
    match e {
        RunError::Pulse(_) | RunError::Invalid(_) => Failure::config(e),
        RunError::System(s) => system_failure(s),
        RunError::Ensemble(_) => Failure::numerical(e),
    }
}

fn eigen(config: &RunConfig, out: &Path, hash: &str) -> Result<u8, Failure> {
    let m = &config.model;
    let grid = config
        .grid
        .build(&[&m.ground, &m.excited], m.mass_amu)
        .map_err(|e| Failure::config(remediation(&e)))?;
    let mut channels = Vec::new();
    for &j in &config.eigen.j_values {
        channels.push((ChannelLabel { manifold: Manifold::Target, j, omega: 0 }, &m.ground));
        channels.push((ChannelLabel { manifold: Manifold::Intermediate, j, omega: 0 }, &m.excited));
    }
    let opts = SolveOptions {
        energy_cap_ghz: config.eigen.energy_cap_ghz,
        max_levels: config.eigen.max_levels,
        convergence_tolerance_mhz: m.convergence_tolerance_mhz,
    };
    let tables = level_tables(&channels, Arc::new(grid), &opts).map_err(|e| Failure::numerical(remediation(&e)))?;
    for t in &tables {
        let s = &t.solution;
        println!("{}: {} levels", s.label(), s.len());
        let designated = match s.label().manifold {
            Manifold::Intermediate => m.intermediate_level,
            _ => m.target_level,
        };
        if designated < s.len() {
            let v = designated;
            println!(
                "  v = {v}: E = {:.3} MHz, B_v = {:.4} MHz, outer turning point {:.2} bohr",
                s.energy_mhz(v),
                t.rotational_constants_mhz[v],
                s.outer_turning_point(v).unwrap_or(f64::NAN)
            );
        }
    }
    write(out, &format!("{}_eigen.csv", config.output.prefix), &eigen_csv(&tables, hash))?;
    Ok(0)
}

fn propagate(config: &RunConfig, out: &Path, hash: &str) -> Result<u8, Failure> {
    let spec = config.dynamics_model().map_err(Failure::config)?;
    let system = PhotoassociationSystem::build(spec).map_err(system_failure)?;
    let run = simulate(&system, &config.run, Sampling::Full).map_err(run_failure)?;
    let s = &run.summary;
    println!("final population {:.6e}", s.final_population);
    match (s.static_alignment, s.dynamic_amplitude) {
        (Some(a), Some(d)) => println!("static alignment {a:.6}, dynamic amplitude {d:.6}"),
        _ => println!("alignment undefined: population below the floor"),
    }
    let projection = config.run.ensemble.projection.name();
    write(out, &format!("{}_trace.csv", config.output.prefix), &trace_csv(&run.result, hash, projection))?;
    Ok(0)
}

fn sweep(config: &RunConfig, out: &Path, hash: &str) -> Result<u8, Failure> {
    let plan = config.sweep_plan().map_err(Failure::config)?;
    let spec = config.dynamics_model().map_err(Failure::config)?;
    println!("{} points", plan.point_count());
    let system = PhotoassociationSystem::build(spec).map_err(system_failure)?;
    let table = run_sweep(&system, &plan).map_err(Failure::numerical)?;
    let prefix = &config.output.prefix;
    write(out, &format!("{prefix}_sweep.csv"), &sweep_csv(&table, hash, &config.model_fingerprint()))?;
    let projection = config.run.ensemble.projection.name();
    for (k, row) in table.rows.iter().enumerate() {
        if let Some(trace) = &row.trace {
            write(out, &format!("{prefix}_point{k:04}_trace.csv"), &trace_csv(trace, hash, projection))?;
        }
    }
    let failed = table.failures();
    if failed > 0 {
        eprintln!("{failed} of {} points failed; see the error column", table.rows.len());
        return Ok(EXIT_PARTIAL);
    }
    Ok(0)
}
