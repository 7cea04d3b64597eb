use clap::{Parser, Subcommand};
use hodlr_cli::bench::{run_bench, write_csv, BenchConfig, BenchError};
use hodlr_cli::solve::{run_solve, SolveError};
use hodlr_cli::verify::{run_verify, VerifyConfig, MAX_LEVELS};
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

/// Exit codes: 0 success, 1 verification failure, 2 input error,
/// 3 numerical singularity.
#[derive(Parser)]
#[command(
    name = "hodlr",
    version,
    about = "Exact direct solver for hierarchical matrices with low-rank off-diagonal blocks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Time setup and solves across levels and write a CSV report
    Bench {
        /// Dense leaf block size
        #[arg(long)]
        n0: usize,
        /// Deepest level of the sweep; dimension grows as n0 * 2^level
        #[arg(long)]
        levels: usize,
        /// Off-diagonal rank: 1 runs the tridiagonal model, higher ranks the
        /// random regular generator
        #[arg(long)]
        rank: usize,
        /// Generator seed
        #[arg(long)]
        seed: u64,
        /// Right-hand sides per level; solve time is their median
        #[arg(long)]
        repeats: usize,
        /// Output CSV path
        #[arg(long)]
        csv: PathBuf,
        /// Worker threads for setup
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// Run the verification suites and report one line per check
    Verify {
        /// Deepest instance level used by the suites (at most 20)
        #[arg(long, default_value_t = 8)]
        levels: usize,
        /// Seeded instances per suite
        #[arg(long, default_value_t = 25)]
        seeds: u64,
    },
    /// Solve a serialized system and print the solution to stdout
    Solve {
        /// Matrix document path
        #[arg(long)]
        matrix: PathBuf,
        /// Right-hand side file, one decimal number per line
        #[arg(long)]
        rhs: PathBuf,
        /// Solve the transposed system instead
        #[arg(long)]
        adjoint: bool,
    },
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Bench {
            n0,
            levels,
            rank,
            seed,
            repeats,
            csv,
            threads,
        } => {
            let cfg = BenchConfig {
                n0,
                levels,
                rank,
                seed,
                repeats,
                threads,
            };
            let rows = match run_bench(&cfg) {
                Ok(rows) => rows,
                Err(e) => {
                    eprintln!("error: {e}");
                    return match e {
                        BenchError::Factor(_) => ExitCode::from(3),
                        _ => ExitCode::from(2),
                    };
                }
            };
            let file = match File::create(&csv) {
                Ok(f) => f,
                Err(e) => {
                    eprintln!("error: cannot create {}: {e}", csv.display());
                    return ExitCode::from(2);
                }
            };
            if let Err(e) = write_csv(&rows, BufWriter::new(file)) {
                eprintln!("error: writing {}: {e}", csv.display());
                return ExitCode::from(2);
            }
            for r in &rows {
                println!(
                    "level {:2}  n {:9}  setup {:.3}s  solve {:.6}s  residual {:.3e}",
                    r.level, r.n, r.setup_seconds, r.solve_seconds, r.residual_inf
                );
            }
            println!("wrote {} ({} rows)", csv.display(), rows.len());
            ExitCode::SUCCESS
        }
        Command::Verify { levels, seeds } => {
            if levels > MAX_LEVELS {
                eprintln!("error: --levels must be at most {MAX_LEVELS}");
                return ExitCode::from(2);
            }
            let cfg = VerifyConfig { levels, seeds };
            let stdout = io::stdout();
            let mut out = stdout.lock();
            match run_verify(&cfg, &mut out) {
                Ok(true) => ExitCode::SUCCESS,
                Ok(false) => ExitCode::from(1),
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
        Command::Solve {
            matrix,
            rhs,
            adjoint,
        } => match run_solve(&matrix, &rhs, adjoint) {
            Ok(x) => {
                let stdout = io::stdout();
                let mut out = BufWriter::new(stdout.lock());
                for v in x {
                    writeln!(out, "{v}").expect("stdout is writable");
                }
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                match e {
                    SolveError::Singular(_) => ExitCode::from(3),
                    _ => ExitCode::from(2),
                }
            }
        },
    }
}
