use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use finsler_lab::cli::{self, EXIT_PARSE};

#[derive(Parser)]
#[command(name = "finsler-lab", version, about = "Finsler geometry and Ricci-soliton laboratory", arg_required_else_help = true)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every task of a scenario file and write the report and artifacts.
    Run {
        scenario: PathBuf,
        /// Output directory for report.json, timing.json and CSV artifacts.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Override the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; defaults to the number of cores.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// List the task names a scenario may use.
    Tasks,
}

fn fail(code: i32, message: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(code as u8)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match args.command {
        Command::Tasks => {
            for (name, about) in cli::TASKS {
                println!("{name:<14} {about}");
            }
            ExitCode::SUCCESS
        }
        Command::Run { scenario, out, seed, threads } => {
            if let Some(k) = threads {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
                    return fail(EXIT_PARSE, e);
                }
            }
            let text = match std::fs::read_to_string(&scenario) {
                Ok(t) => t,
                Err(e) => return fail(EXIT_PARSE, format!("{}: {e}", scenario.display())),
            };
            let resolved = match cli::parse(&text).and_then(|s| cli::resolve(s, seed)) {
                Ok(r) => r,
                Err(e) => return fail(EXIT_PARSE, e),
            };
            match cli::run(&resolved, &out) {
                Ok(report) => {
                    for t in &report.tasks {
                        let status = serde_json::to_value(t.status).ok();
                        let status = status.as_ref().and_then(|v| v.as_str()).unwrap_or("?");
                        match &t.error {
                            Some(e) => println!("[{}] {:<14} {status}: {e}", t.index, t.task),
                            None => println!("[{}] {:<14} {status}", t.index, t.task),
                        }
                    }
                    println!("report: {}", cli::run::report_path(&out).display());
                    ExitCode::from(report.summary.exit_code as u8)
                }
                Err(e) => fail(1, format!("cannot write to {}: {e}", out.display())),
            }
        }
    }
}
