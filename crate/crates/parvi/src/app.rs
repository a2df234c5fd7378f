//! Binary entry points: argument parsing and the three subcommands.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::config::{load_run_config, TargetSpec};
use crate::diagnostics::mmd2;
use crate::error::{Error, Result};
use crate::io::{
    format_six_significant, read_particles, write_empty_particles, write_metrics, write_particles,
    write_snapshots,
};
use crate::solvers::{run, DiagnosticsSpec};
use crate::targets::{
    generate_mixture_data, load_csv_dataset, logistic_posterior, mixture_posterior,
    sample_gaussian_init, sample_reference, TargetModel,
};

#[derive(Debug, Parser)]
#[command(
    name = "parvi",
    version,
    about = "Particle-based variational inference: energy descent solvers and diagnostics"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a configured solver and write snapshots, metrics, and the
    /// resolved config to the output directory.
    Run {
        /// Path to a `key = value` run configuration file.
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output.dir` from the config file.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Print the squared maximum mean discrepancy between two particle
    /// CSV files.
    Mmd {
        #[arg(long)]
        particles: PathBuf,
        #[arg(long)]
        reference: PathBuf,
    },
    /// Draw a reference sample from a named target and write it as a
    /// particle CSV file.
    SampleReference {
        /// One of toy1, toy2, toy3, gaussian.
        #[arg(long)]
        target: String,
        /// Sample size; 0 writes a header-only file.
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Dimension for the gaussian target (toys are two-dimensional).
        #[arg(long)]
        dim: Option<usize>,
    },
}

/// Parses arguments and dispatches. The process exit code comes from the
/// returned result.
pub fn main() -> Result<()> {
    init_thread_pool()?;
    let cli = Cli::parse();
    dispatch(cli)
}

fn init_thread_pool() -> Result<()> {
    let Ok(raw) = std::env::var("PARVI_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().map_err(|_| {
        Error::invalid(format!(
            "PARVI_THREADS must be a positive integer, got {raw:?}"
        ))
    })?;
    if threads == 0 {
        return Err(Error::invalid("PARVI_THREADS must be at least 1"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::invalid(format!("cannot configure the thread pool: {e}")))?;
    Ok(())
}

pub fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, output_dir } => cmd_run(&config, output_dir),
        Command::Mmd {
            particles,
            reference,
        } => cmd_mmd(&particles, &reference),
        Command::SampleReference {
            target,
            n,
            seed,
            out,
            dim,
        } => cmd_sample_reference(&target, n, seed, &out, dim),
    }
}

/// Instantiates the target distribution described by a config, loading or
/// generating its data. `run_seed` drives minibatch draws for stochastic
/// targets.
fn build_target(spec: &TargetSpec, run_seed: u64) -> Result<TargetModel> {
    match spec {
        TargetSpec::Toy1 => Ok(TargetModel::Toy1),
        TargetSpec::Toy2 => Ok(TargetModel::Toy2),
        TargetSpec::Toy3 => Ok(TargetModel::Toy3),
        TargetSpec::Gaussian { dim } => Ok(TargetModel::StandardGaussian { dim: *dim }),
        TargetSpec::Flat { dim } => Ok(TargetModel::Flat { dim: *dim }),
        TargetSpec::Mixture {
            t,
            omega1,
            omega2,
            sigma,
            data_seed,
        } => {
            let data = generate_mixture_data(*t, *omega1, *omega2, *sigma, *data_seed)?;
            Ok(mixture_posterior(data))
        }
        TargetSpec::Logistic {
            csv,
            label_column,
            standardize,
            split,
            alpha,
            batch_size,
            data_seed,
        } => {
            let (train, _test) =
                load_csv_dataset(csv, label_column, *standardize, *split, *data_seed)?;
            logistic_posterior(train, *alpha, *batch_size, run_seed)
        }
    }
}

fn cmd_run(config_path: &Path, output_override: Option<PathBuf>) -> Result<()> {
    let mut config = load_run_config(config_path)?;
    if let Some(dir) = output_override {
        config.output_dir = dir;
    }
    let target = build_target(&config.target, config.seed)?;
    let dim = target.dim();
    let kernel = config.kernel_config(dim)?;

    let mean = if config.init_mean.is_empty() {
        vec![0.0; dim]
    } else {
        config.init_mean.clone()
    };
    if mean.len() != dim {
        return Err(Error::invalid(format!(
            "init.mean has {} entries but the {} target has dim {dim}",
            mean.len(),
            config.target.name()
        )));
    }
    let init = sample_gaussian_init(
        config.n_particles,
        dim,
        &mean,
        config.init_scale,
        config.seed,
    )?;

    let mmd_reference = config
        .mmd_reference
        .as_ref()
        .map(|path| read_particles(path))
        .transpose()?;
    if let Some(reference) = &mmd_reference {
        if reference.dim() != dim {
            return Err(Error::mismatch(format!(
                "mmd.reference has dim {} but the target has dim {dim}",
                reference.dim()
            )));
        }
    }
    let diagnostics = DiagnosticsSpec {
        snapshot_every: config.snapshot_every,
        mmd_reference,
    };
    let solver = config.solver_config();

    let output = run(&target, init, &solver, &kernel, &diagnostics)?;

    std::fs::create_dir_all(&config.output_dir)?;
    write_snapshots(&config.output_dir.join("snapshots.csv"), &output.snapshots)?;
    write_metrics(&config.output_dir.join("metrics.csv"), &output.metrics)?;
    std::fs::write(config.output_dir.join("config_resolved.cfg"), config.echo())?;

    let last = output
        .metrics
        .last()
        .expect("run always records the initial state");
    println!(
        "{} on {}: {} outer iterations, energy {} -> {}, outputs in {}",
        config.scheme.name(),
        config.target.name(),
        config.outer_iters,
        format_six_significant(output.metrics[0].energy),
        format_six_significant(last.energy),
        config.output_dir.display()
    );
    Ok(())
}

fn cmd_mmd(particles_path: &Path, reference_path: &Path) -> Result<()> {
    let particles = read_particles(particles_path)?;
    let reference = read_particles(reference_path)?;
    let value = mmd2(&particles, &reference)?;
    println!("{}", format_six_significant(value));
    Ok(())
}

fn cmd_sample_reference(
    target_name: &str,
    n: usize,
    seed: u64,
    out: &Path,
    dim: Option<usize>,
) -> Result<()> {
    let target = match target_name {
        "toy1" | "toy2" | "toy3" => {
            if let Some(d) = dim {
                if d != 2 {
                    return Err(Error::invalid(format!(
                        "{target_name} is two-dimensional, got --dim {d}"
                    )));
                }
            }
            match target_name {
                "toy1" => TargetModel::Toy1,
                "toy2" => TargetModel::Toy2,
                _ => TargetModel::Toy3,
            }
        }
        "gaussian" => TargetModel::StandardGaussian {
            dim: dim.unwrap_or(2),
        },
        other => {
            return Err(Error::invalid(format!(
                "no reference sampler for target {other:?} (expected toy1, toy2, toy3, or gaussian)"
            )))
        }
    };
    if n == 0 {
        write_empty_particles(out, target.dim())?;
        println!("wrote 0 samples to {}", out.display());
        return Ok(());
    }
    let sample = sample_reference(&target, n, seed)?;
    write_particles(out, &sample)?;
    println!("wrote {} samples to {}", sample.len(), out.display());
    Ok(())
}
