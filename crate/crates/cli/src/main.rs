use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use wach_cli::{execute, Command, JobSpec, EXIT_PARSE};
use wach_core::io::{parse_chi, ProfileOverrides};

#[derive(Parser)]
#[command(name = "wach", version, about = "Build, verify and invert Wach modules of Fontaine-Laffaille modules")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// p-adic precision N (coefficients mod p^N)
    #[arg(long = "prec-p", global = true)]
    prec_p: Option<u32>,
    /// truncation order in pi0
    #[arg(long = "prec-pi0", global = true)]
    prec_pi0: Option<usize>,
    /// cyclotomic character of the generator gamma, a decimal integer = 1 mod p
    #[arg(long = "chi-gamma", global = true)]
    chi_gamma: Option<String>,
    /// iteration cap for the fixed-point solvers
    #[arg(long = "max-iter", global = true)]
    max_iter: Option<usize>,
    /// write the JSON result here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// seed for generated suites and perturbations
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Cmd {
    /// Apply the functor to an FL module and write the Wach module
    Build { input: PathBuf },
    /// Check the axioms of a Wach module (or validate an FL module)
    Verify { input: PathBuf },
    /// Recover filtration, weights and Frobenius matrix modulo pi0
    Reduce {
        input: PathBuf,
        #[arg(long = "h-max")]
        h_max: Option<u32>,
    },
    /// Tensor product of two modules
    Tensor { left: PathBuf, right: PathBuf },
    /// Normalize the phi-matrix of a Wach module to A*diag(q^r) for a target FL module
    Normalize {
        input: PathBuf,
        #[arg(long)]
        target: PathBuf,
    },
    /// Build, reduce and recognize modules; from a file or a seeded suite
    Roundtrip {
        input: Option<PathBuf>,
        #[arg(long)]
        suite: bool,
        /// modules per prime in the suite
        #[arg(long, default_value_t = wach_core::suite::DEFAULT_PER_PRIME)]
        count: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let chi_gamma = match cli.chi_gamma.as_deref().map(parse_chi).transpose() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_PARSE as u8);
        }
    };
    let command = match cli.command {
        Cmd::Build { input } => Command::Build { input },
        Cmd::Verify { input } => Command::Verify { input },
        Cmd::Reduce { input, h_max } => Command::Reduce { input, h_max },
        Cmd::Tensor { left, right } => Command::Tensor { left, right },
        Cmd::Normalize { input, target } => Command::Normalize { input, target },
        Cmd::Roundtrip { input, suite, count } => Command::Roundtrip { input, suite, count },
    };
    let job = JobSpec {
        command,
        overrides: ProfileOverrides { n: cli.prec_p, m_pi0: cli.prec_pi0, chi_gamma },
        max_iter: cli.max_iter,
        seed: cli.seed,
    };
    let outcome = execute(&job);
    if !outcome.output.is_empty() {
        match &cli.out {
            Some(path) => {
                if let Err(e) = std::fs::write(path, &outcome.output) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(EXIT_PARSE as u8);
                }
            }
            None => print!("{}", outcome.output),
        }
    }
    if let Some(msg) = &outcome.error {
        eprintln!("error: {msg}");
    }
    ExitCode::from(outcome.code as u8)
}
