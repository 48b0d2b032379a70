//! `mod2hecke`: generate the sequences and replay the checks from the shell.
//!
//! Exit status: 0 when every check passes, 1 when one fails, 2 on bad usage.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mod2hecke::qseries::is_prime;
use mod2hecke::suite::Level;

use report::{Format, Report};

const EXIT_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "mod2hecke",
    version,
    about = "Exact mod-2 Hecke computations at level 3"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Report format.
    #[arg(long, global = true, value_enum, default_value = "text")]
    format: Format,

    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    jobs: Option<u16>,

    /// Report file. Without it the report goes to `$MOD2HECKE_OUT_DIR/<command>.<ext>`
    /// when that variable is set, and to stdout otherwise.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(
        long,
        global = true,
        env = "MOD2HECKE_OUT_DIR",
        hide_env_values = true,
        hide = true
    )]
    out_dir: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// The C_n recurrence.
    #[command(subcommand)]
    Cn(CnCommand),
    /// The kernels K_m of U+I.
    #[command(subcommand)]
    Kernel(KernelCommand),
    /// q-expansion checks.
    #[command(subcommand)]
    Series(SeriesCommand),
    /// The basis of K adapted to X = T_7 and Y = T_13.
    #[command(subcommand)]
    Adapted(AdaptedCommand),
    /// The full check suite.
    #[command(subcommand)]
    Verify(VerifyCommand),
}

#[derive(Args, Debug)]
struct MaxArg {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    max: u64,
}

#[derive(Subcommand, Debug)]
enum CnCommand {
    /// Print C_0 .. C_max.
    Gen(MaxArg),
    /// Express every C_{4m}, 4m < max, through earlier C_k.
    Express(MaxArg),
    /// Check deg C_n = n - 1 exactly when 4 does not divide n, n <= max.
    DegreeLaw(MaxArg),
}

#[derive(Subcommand, Debug)]
enum KernelCommand {
    /// Dimension, degrees and pr1 shape of K_m for m <= max-m.
    Verify {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        max_m: u64,
    },
    /// The reduced basis of K_m in g-coordinates.
    Basis {
        #[arg(long)]
        m: u64,
    },
    /// Kernels of (U+I)^2 on L and L* for m <= max-m.
    #[command(name = "lemma211")]
    Equality {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        max_m: u64,
    },
}

#[derive(Subcommand, Debug)]
enum SeriesCommand {
    /// U_3 against U on the series of r^n, n <= max.
    CheckU3 {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        max: u64,
        #[arg(long, default_value_t = 4096)]
        precision: u64,
    },
    /// F, G and D as polynomials in r against their direct enumerations.
    CheckF {
        #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
        precision: u64,
    },
}

#[derive(Subcommand, Debug)]
enum AdaptedCommand {
    /// Grid m_{i,j}, i + j <= grade, with its relation transcript.
    Build {
        #[arg(long)]
        grade: u64,
    },
    /// T_p as a truncated series in X and Y.
    TpSeries {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        grade: u64,
    },
    /// T_p on samples of K1 and K5.
    Stabilize {
        #[arg(long, value_delimiter = ',', default_value = "5,7,11,13")]
        primes: Vec<u64>,
        #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..))]
        samples: u64,
        /// Precision of the image series.
        #[arg(long, default_value_t = 4096, value_parser = clap::value_parser!(u64).range(1..))]
        precision: u64,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum LevelArg {
    Quick,
    Full,
}

#[derive(Subcommand, Debug)]
enum VerifyCommand {
    /// Every criterion, at CI size (`quick`) or at the headline bounds (`full`).
    All {
        #[arg(long, value_enum, default_value = "quick")]
        level: LevelArg,
    },
}

fn check_prime(p: u64) -> Result<(), String> {
    if p > 3 && is_prime(p) {
        Ok(())
    } else {
        Err(format!("{p} is not a prime > 3"))
    }
}

/// Rejects configurations the computations cannot honour before any work.
fn validate(command: &Command) -> Result<(), String> {
    match command {
        Command::Series(SeriesCommand::CheckU3 { max, precision }) if precision / 3 <= 2 * max => {
            Err(format!(
                "--precision must exceed 6 * max + 2 = {}",
                6 * max + 2
            ))
        }
        Command::Adapted(AdaptedCommand::TpSeries { p, .. }) => check_prime(*p),
        Command::Adapted(AdaptedCommand::Stabilize { primes, .. }) => {
            if primes.is_empty() {
                return Err("--primes is empty".into());
            }
            primes.iter().try_for_each(|&p| check_prime(p))
        }
        _ => Ok(()),
    }
}

fn dispatch(command: &Command) -> Report {
    let n = |v: &u64| *v as usize;
    match command {
        Command::Cn(CnCommand::Gen(a)) => commands::cn_gen(n(&a.max)),
        Command::Cn(CnCommand::Express(a)) => commands::cn_express(n(&a.max)),
        Command::Cn(CnCommand::DegreeLaw(a)) => commands::cn_degree_law(n(&a.max)),
        Command::Kernel(KernelCommand::Verify { max_m }) => commands::kernel_verify(n(max_m)),
        Command::Kernel(KernelCommand::Basis { m }) => commands::kernel_basis(n(m)),
        Command::Kernel(KernelCommand::Equality { max_m }) => commands::kernel_equality(n(max_m)),
        Command::Series(SeriesCommand::CheckU3 { max, precision }) => {
            commands::series_check_u3(n(max), n(precision))
        }
        Command::Series(SeriesCommand::CheckF { precision }) => {
            commands::series_check_f(n(precision))
        }
        Command::Adapted(AdaptedCommand::Build { grade }) => commands::adapted_build(n(grade)),
        Command::Adapted(AdaptedCommand::TpSeries { p, grade }) => {
            commands::adapted_tp_series(*p, n(grade))
        }
        Command::Adapted(AdaptedCommand::Stabilize {
            primes,
            samples,
            precision,
        }) => commands::adapted_stabilize(primes, n(samples), n(precision)),
        Command::Verify(VerifyCommand::All { level }) => commands::verify_all(match level {
            LevelArg::Quick => Level::Quick,
            LevelArg::Full => Level::Full,
        }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = validate(&cli.command) {
        eprintln!("error: {msg}");
        return ExitCode::from(EXIT_USAGE);
    }
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs as usize)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }

    let report = dispatch(&cli.command);
    let target = cli.out.clone().or_else(|| {
        cli.out_dir
            .as_ref()
            .map(|d| d.join(report.file_name(cli.format)))
    });
    match target {
        Some(path) => {
            if let Err(e) = report.write_to(&path, cli.format) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(EXIT_FAILED);
            }
            println!("{}", report.status_line());
        }
        None => print!("{}", report.render(cli.format)),
    }
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAILED)
    }
}
