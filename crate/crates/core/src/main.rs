use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use bsq_core::cli::{
    cmd_fit, cmd_plot, cmd_run, cmd_sweep, cmd_verify, exit_code_for, fit_report, load_config,
    EXIT_INTERNAL, EXIT_OK, EXIT_USAGE,
};
use bsq_core::error::HarnessError;

#[derive(Parser)]
#[command(name = "bsq", version, about = "Pseudo-spectral Boussinesq laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one configuration and write its outputs
    Run {
        config: PathBuf,
    },
    /// Run a property suite: operators, budgets, recursion, nash-lemma or all
    Verify {
        suite: String,
    },
    /// Fit log(column) against t over a window
    Fit {
        csv: PathBuf,
        #[arg(long)]
        column: String,
        /// Window start (defaults to the resolved range minus its first 10%)
        #[arg(long, requires = "to")]
        from: Option<f64>,
        #[arg(long, requires = "from")]
        to: Option<f64>,
    },
    /// Plot columns against t as SVG
    Plot {
        csv: PathBuf,
        /// Comma-separated column names
        #[arg(long, value_delimiter = ',', required = true)]
        columns: Vec<String>,
        #[arg(long)]
        out: PathBuf,
        /// Logarithmic value axis
        #[arg(long)]
        log: bool,
    },
    /// Run several configurations concurrently
    Sweep {
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(required = true)]
        configs: Vec<PathBuf>,
    },
}

fn report(e: &HarnessError) -> i32 {
    eprintln!("error: {e}");
    e.exit_code()
}

fn execute(command: Command) -> i32 {
    match command {
        Command::Run { config } => {
            let cfg = match load_config(&config) {
                Ok(c) => c,
                Err(e) => return report(&e),
            };
            match cmd_run(&cfg) {
                Ok(summary) => {
                    println!(
                        "stop_reason={} steps={} final_t={}",
                        summary.stop_reason, summary.steps, summary.final_t
                    );
                    exit_code_for(&summary)
                }
                Err(e) => report(&e),
            }
        }
        Command::Verify { suite } => {
            let mut out = std::io::stdout();
            match cmd_verify(&suite, &mut out) {
                Ok(true) => EXIT_OK,
                Ok(false) => EXIT_INTERNAL,
                Err(e) => report(&e),
            }
        }
        Command::Fit {
            csv,
            column,
            from,
            to,
        } => match cmd_fit(&csv, &column, from.zip(to)) {
            Ok(fit) => {
                print!("{}", fit_report(&column, &fit));
                EXIT_OK
            }
            Err(e) => report(&e),
        },
        Command::Plot {
            csv,
            columns,
            out,
            log,
        } => match cmd_plot(&csv, &columns, &out, log) {
            Ok(()) => EXIT_OK,
            Err(e) => report(&e),
        },
        Command::Sweep { jobs, configs } => match cmd_sweep(&configs, jobs) {
            Ok(results) => {
                let mut code = EXIT_OK;
                for (path, result) in results {
                    match result {
                        Ok(s) => {
                            println!("{}: stop_reason={} steps={}", path.display(), s.stop_reason, s.steps);
                            code = code.max(exit_code_for(&s));
                        }
                        Err(e) => {
                            eprintln!("{}: error: {e}", path.display());
                            code = code.max(e.exit_code());
                        }
                    }
                }
                code
            }
            Err(e) => report(&e),
        },
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    ExitCode::from(execute(cli.command) as u8)
}
