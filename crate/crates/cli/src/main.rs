use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use coarsesep_cli::{describe, list_fixtures, run_text, RunOptions};

#[derive(Parser)]
#[command(name = "coarsesep", version, about = "Finite-window coarse separation analyses")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and write report.json and report.txt.
    Run {
        file: PathBuf,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
        /// Permutes the evaluation order only; reports do not depend on it.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// List the built-in fixtures.
    Fixtures,
    /// Document the parameters of an analysis.
    Describe { analysis: String },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Fixtures => {
            for (name, text) in list_fixtures() {
                println!("{name}\t{text}");
            }
            ExitCode::SUCCESS
        }
        Command::Describe { analysis } => match describe(&analysis) {
            Ok(s) => {
                print!("{s}");
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        },
        Command::Run {
            file,
            out,
            threads,
            seed,
        } => {
            let text = match fs::read_to_string(&file) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: cannot read {}: {e}", file.display());
                    return ExitCode::from(1);
                }
            };
            let report = match run_text(&text, RunOptions { threads, seed }) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("{}: {e}", file.display());
                    return ExitCode::from(1);
                }
            };
            let written = fs::create_dir_all(&out)
                .and_then(|_| fs::write(out.join("report.json"), report.to_json()))
                .and_then(|_| fs::write(out.join("report.txt"), report.to_text()));
            if let Err(e) = written {
                eprintln!("error: cannot write reports to {}: {e}", out.display());
                return ExitCode::from(1);
            }
            print!("{}", report.to_text());
            ExitCode::from(report.exit_code() as u8)
        }
    }
}
