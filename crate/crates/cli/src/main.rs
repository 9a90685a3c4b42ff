use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod run;

use run::CliError;

#[derive(Parser)]
#[command(name = "cit", version, about = "Zero testing of circuits at roots of unity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether the circuit vanishes at zeta_n.
    Check(CheckArgs),
    /// Exact evaluation in Z[x]/Phi_n (small n only).
    Oracle(CommonArgs),
    /// Exact test for sparse polynomials.
    Sparse(CommonArgs),
    /// Test a sum of powers of a sparse polynomial (diagonal file).
    Diagonal(CommonArgs),
    /// Compare the words derived by two grammars.
    SlpEq(SlpArgs),
    /// Produce or check a nonzeroness certificate.
    Certificate {
        #[command(subcommand)]
        action: CertificateAction,
    },
    /// Time every applicable engine on one input.
    Bench(BenchArgs),
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Circuit file (or diagonal file).
    #[arg(long)]
    circuit: PathBuf,
    /// Overrides the `n` header.
    #[arg(long)]
    n: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Trials per randomized run; engine default when absent.
    #[arg(long)]
    trials: Option<usize>,
    /// Print a JSON report.
    #[arg(long)]
    json: bool,
    /// Include the per-trial transcript.
    #[arg(long)]
    verbose: bool,
    /// Constant `c` in the `c log^2 n` bound on generating units.
    #[arg(long)]
    grh_multiplier: Option<f64>,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, value_enum, default_value_t = Algo::Auto)]
    algo: Algo,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Auto,
    Ff,
    Numeric,
    Sparse,
    Diagonal,
    Oracle,
}

#[derive(Args)]
struct SlpArgs {
    first: PathBuf,
    second: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 25)]
    trials: usize,
    #[arg(long)]
    json: bool,
    #[arg(long)]
    verbose: bool,
}

#[derive(Subcommand)]
enum CertificateAction {
    /// Search for a certificate and print it as JSON.
    Gen {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        n: Option<String>,
        /// Largest prime to try.
        #[arg(long)]
        p_bound: Option<String>,
    },
    /// Check a certificate; exit code 1 when it is invalid.
    Verify {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        n: Option<String>,
        #[arg(long)]
        cert: PathBuf,
    },
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, default_value_t = 3)]
    repeat: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Check(a) => report(a.common, a.algo),
        Command::Oracle(a) => report(a, Algo::Oracle),
        Command::Sparse(a) => report(a, Algo::Sparse),
        Command::Diagonal(a) => report(a, Algo::Diagonal),
        Command::SlpEq(a) => run::slp_eq(&a.first, &a.second, a.seed, a.trials, a.verbose).map(|r| {
            if a.json {
                println!("{}", r.to_json());
            } else {
                println!("{}", r.slp_word());
            }
            r.exit_code()
        }),
        Command::Certificate { action: CertificateAction::Gen { circuit, n, p_bound } } => {
            run::certificate_gen(&circuit, n.as_deref(), p_bound.as_deref()).map(|t| {
                print!("{t}");
                0
            })
        }
        Command::Certificate { action: CertificateAction::Verify { circuit, n, cert } } => {
            run::certificate_verify(&circuit, n.as_deref(), &cert).map(|ok| {
                println!("{}", if ok { "valid" } else { "invalid" });
                u8::from(!ok)
            })
        }
        Command::Bench(a) => run::bench(&a.common.into(), a.repeat).map(|t| {
            print!("{t}");
            0
        }),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn report(args: CommonArgs, algo: Algo) -> Result<u8, CliError> {
    let json = args.json;
    let r = run::check(&args.into(), algo)?;
    if json {
        println!("{}", r.to_json());
    } else {
        print!("{}", r.to_text());
    }
    Ok(r.exit_code())
}

impl From<CommonArgs> for run::Options {
    fn from(a: CommonArgs) -> Self {
        run::Options {
            circuit: a.circuit,
            n: a.n,
            seed: a.seed,
            trials: a.trials,
            json: a.json,
            verbose: a.verbose,
            grh_multiplier: a.grh_multiplier,
        }
    }
}
