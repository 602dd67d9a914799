use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use subsum::cli::{exit_code, run, write_artifacts, Command, RunConfig, TensorMode};
use subsum::Error;

/// Overrides `--out` when set.
const OUT_ENV: &str = "SUBSPACE_SUM_OUT";

#[derive(Parser, Debug)]
#[command(
    name = "subsum",
    version,
    about = "Complementability of sums of subspaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Args, Debug)]
struct Opts {
    /// Stopping tolerance on consecutive iterates.
    #[arg(long, global = true, default_value_t = 1e-12)]
    tol: f64,
    /// Iteration budget; derived from the certified rate when omitted.
    #[arg(long, global = true)]
    max_steps: Option<usize>,
    /// Perturbation used to build Perron certificates.
    #[arg(long, global = true)]
    delta: Option<f64>,
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Largest admissible tensor dimension d^m.
    #[arg(long, global = true, default_value_t = 4096)]
    size_cap: usize,
    /// Iterate even when the criterion does not hold.
    #[arg(long, global = true)]
    force: bool,
    /// Sample count for randomized checks.
    #[arg(long, global = true, default_value_t = 1000)]
    samples: usize,
    /// Worker threads when several input files are given.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Output directory.
    #[arg(long, global = true, default_value = "subsum-out")]
    out: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Interaction matrix, spectral radius, certificates and verdict.
    Analyze { files: Vec<PathBuf> },
    /// Projection onto the sum with convergence trace and rate bounds.
    Iterate { files: Vec<PathBuf> },
    /// Extremal example for an interaction matrix with r(E) = 1.
    Sharp {
        #[arg(long, default_value_t = 1)]
        y_dim: usize,
        #[arg(long, default_value_t = 1)]
        z_dim: usize,
        files: Vec<PathBuf>,
    },
    /// Marginal subspaces of a finite probability model.
    Marginal { files: Vec<PathBuf> },
    /// Tensor powers of a subspace system.
    Tensor {
        #[arg(long)]
        m: usize,
        #[arg(long, default_value = "e-criterion")]
        mode: TensorMode,
        files: Vec<PathBuf>,
    },
}

fn split(cmd: Cmd) -> (Command, Vec<PathBuf>) {
    match cmd {
        Cmd::Analyze { files } => (Command::Analyze, files),
        Cmd::Iterate { files } => (Command::Iterate, files),
        Cmd::Sharp {
            y_dim,
            z_dim,
            files,
        } => (Command::Sharp { y_dim, z_dim }, files),
        Cmd::Marginal { files } => (Command::Marginal, files),
        Cmd::Tensor { m, mode, files } => (Command::Tensor { m, mode }, files),
    }
}

/// Runs one input file and returns the exit status it earns.
fn process(cmd: Command, file: &Path, dir: &Path, cfg: &RunConfig) -> i32 {
    let name = file.display();
    let input = match fs::read_to_string(file) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{name}: {e}");
            return 1;
        }
    };
    match run(cmd, &input, cfg) {
        Ok(out) => {
            for n in &out.notices {
                eprintln!("{name}: {n}");
            }
            if let Err(e) = write_artifacts(dir, &out.artifacts) {
                eprintln!("{name}: {e}");
                return 1;
            }
            if let Some(f) = &out.failure {
                eprintln!("{name}: {f}");
            }
            println!(
                "{name}: {} files written to {}",
                out.artifacts.len(),
                dir.display()
            );
            out.exit_code()
        }
        Err(e) => {
            eprintln!("{name}: {}", describe(&e));
            exit_code(&e)
        }
    }
}

fn describe(e: &Error) -> String {
    match e {
        Error::CriterionFails { .. } => format!("{e}; rerun with --force to iterate anyway"),
        _ => e.to_string(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = cli.opts;
    let out = std::env::var_os(OUT_ENV)
        .map(PathBuf::from)
        .unwrap_or(opts.out);
    let cfg = RunConfig {
        tol: opts.tol,
        max_steps: opts.max_steps,
        delta: opts.delta,
        seed: opts.seed,
        size_cap: opts.size_cap,
        force: opts.force,
        samples: opts.samples,
    };
    if let Err(e) = cfg.validate() {
        eprintln!("{e}");
        return ExitCode::from(1);
    }
    let (cmd, files) = split(cli.command);
    if files.is_empty() {
        eprintln!("no input files given");
        return ExitCode::from(1);
    }
    let target = |file: &PathBuf| -> PathBuf {
        if files.len() == 1 {
            out.clone()
        } else {
            out.join(file.file_stem().unwrap_or(file.as_os_str()))
        }
    };
    let codes: Vec<i32> = if opts.jobs > 1 && files.len() > 1 {
        let pool = match rayon::ThreadPoolBuilder::new()
            .num_threads(opts.jobs)
            .build()
        {
            Ok(p) => p,
            Err(e) => {
                eprintln!("{e}");
                return ExitCode::from(1);
            }
        };
        pool.install(|| {
            files
                .par_iter()
                .map(|f| process(cmd, f, &target(f), &cfg))
                .collect()
        })
    } else {
        files
            .iter()
            .map(|f| process(cmd, f, &target(f), &cfg))
            .collect()
    };
    let code = codes.into_iter().max().unwrap_or(0);
    ExitCode::from(u8::try_from(code).unwrap_or(1))
}
