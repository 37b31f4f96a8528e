use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use decolab::commands;
use decolab::config::{self, ResolvedConfig};
use decolab::error::Error;

/// Entropy production and predictability-sieve analysis for a damped
/// harmonic oscillator.
#[derive(Parser)]
#[command(name = "decolab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Closed-form entropy production under quadratic Lindblad channels
    EntropyQuadratic(RunArgs),
    /// Brute-force master-equation entropy trajectory
    EntropyExact(RunArgs),
    /// Entropy production under spatially correlated noise
    EntropyCorrelated(RunArgs),
    /// Minimum-entropy-production search over squeezed coherent states
    Sieve(RunArgs),
    /// First-order validity study against the exact integrator
    Consistency(RunArgs),
    /// Kernel, decoherence-rate and spectrum tables
    KernelTable(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON configuration file
    #[arg(long)]
    config: PathBuf,
    /// Output CSV path (overrides the config's output field)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for sweep evaluation (defaults to all cores)
    #[arg(long)]
    threads: Option<usize>,
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::InvalidParameter(_) | Error::InvalidTruncation(_) | Error::DimensionMismatch { .. } => 1,
        Error::ConditionViolated(_) | Error::SpectrumTruncated(_) => 2,
        Error::UnderResolved { .. } | Error::IntegrationQuality(_) => 3,
        Error::Io(_) | Error::SpectrumFormat(_) => 4,
    }
}

fn resolve_out(cfg: &ResolvedConfig, args: &RunArgs) -> Result<PathBuf, Error> {
    args.out.clone().or_else(|| cfg.output.clone()).ok_or_else(|| {
        Error::InvalidParameter(
            "no output path: pass --out or set \"output\" in the config".to_string(),
        )
    })
}

fn run(args: &RunArgs, go: impl FnOnce(&ResolvedConfig, &PathBuf) -> Result<(), Error> + Send) -> Result<(), Error> {
    let cfg = config::load(&args.config)?;
    eprintln!(
        "effective config:\n{}",
        serde_json::to_string_pretty(&cfg.effective_json()).expect("config serializes")
    );
    let out = resolve_out(&cfg, args)?;
    match args.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidParameter(format!("cannot build thread pool: {e}")))?;
            pool.install(|| go(&cfg, &out))
        }
        None => go(&cfg, &out),
    }
}

fn dispatch(cmd: &Cmd) -> Result<(), Error> {
    match cmd {
        Cmd::EntropyQuadratic(args) => run(args, |cfg, out| {
            commands::entropy_quadratic(cfg)?.write_to(out)
        }),
        Cmd::EntropyExact(args) => run(args, |cfg, out| {
            commands::entropy_exact(cfg)?.write_to(out)
        }),
        Cmd::EntropyCorrelated(args) => run(args, |cfg, out| {
            commands::entropy_correlated(cfg)?.write_to(out)
        }),
        Cmd::Sieve(args) => run(args, |cfg, out| commands::sieve(cfg)?.write_to(out)),
        Cmd::Consistency(args) => run(args, |cfg, out| {
            let outcome = commands::consistency(cfg)?;
            // Partial rows are flushed even when the ladder was interrupted.
            outcome.report.write_to(out)?;
            match outcome.failure {
                Some(err) => Err(err),
                None => Ok(()),
            }
        }),
        Cmd::KernelTable(args) => run(args, |cfg, out| {
            let (report, spectrum_text) = commands::kernel_table(cfg)?;
            report.write_to(out)?;
            let mut name = out.file_name().unwrap_or_default().to_os_string();
            name.push(".spectrum");
            let spectrum_path = out.with_file_name(name);
            std::fs::write(&spectrum_path, spectrum_text)?;
            Ok(())
        }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
