use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use asgld_core::harness::{
    parse_spec, preset, refit_summary, run_experiment, self_check, serialize, DEFAULT_OUT_DIR,
    OUT_DIR_ENV,
};
use clap::{Parser, Subcommand};

/// Adaptive stochastic gradient Langevin dynamics experiments.
#[derive(Parser)]
#[command(name = "asgld", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment document.
    Run {
        spec: PathBuf,
        /// Worker threads (0 = all cores).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Output directory; overrides the document and the environment.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Default output directory when neither --out nor the document sets one.
        #[arg(long, env = OUT_DIR_ENV, default_value = DEFAULT_OUT_DIR, hide = true)]
        default_out: PathBuf,
    },
    /// Print a preset experiment document.
    Preset {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the built-in invariant checks.
    Check,
    /// Re-fit rates from the traces listed in a summary file.
    Fit {
        summary: PathBuf,
        /// Tail fraction for the rate fit (defaults to the recorded window).
        #[arg(long)]
        window: Option<f64>,
    },
}

fn run(spec_path: &Path, jobs: usize, out: Option<PathBuf>, default_out: PathBuf) -> Result<bool, String> {
    let text = fs::read_to_string(spec_path).map_err(|e| format!("{}: {e}", spec_path.display()))?;
    let spec = parse_spec(&text).map_err(|e| e.to_string())?;
    let dir = out
        .or_else(|| spec.execution.out_dir.clone())
        .unwrap_or(default_out);
    let report = run_experiment(&spec, &dir, jobs).map_err(|e| e.to_string())?;
    print!("{}", report.render());
    Ok(report.success())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            spec,
            jobs,
            out,
            default_out,
        } => run(&spec, jobs, out, default_out),
        Command::Preset { name, out } => preset(&name).map_err(|e| e.to_string()).and_then(|s| {
            let text = serialize(&s);
            match out {
                Some(path) => fs::write(&path, text)
                    .map(|_| true)
                    .map_err(|e| format!("{}: {e}", path.display())),
                None => {
                    print!("{text}");
                    Ok(true)
                }
            }
        }),
        Command::Check => {
            let outcomes = self_check();
            for c in &outcomes {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            Ok(outcomes.iter().all(|c| c.passed))
        }
        Command::Fit { summary, window } => refit_summary(&summary, window)
            .map(|rows| {
                for r in rows {
                    let dim = r.dimension.map_or(String::new(), |d| format!(" d={d}"));
                    println!("{:<10} {:<10}{dim} {:<14} {}", r.section, r.label, r.key, r.value);
                }
                true
            })
            .map_err(|e| e.to_string()),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
