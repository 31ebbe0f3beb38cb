use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use crfolio::cli::{self, Task, EXIT_CONFIG_ERROR};

/// Numerical laboratory for Morera-type theorems on families of analytic discs.
#[derive(Parser, Debug)]
#[command(name = "crfolio", version)]
struct Args {
    /// extend, jacobian, fibers, homology, symmetry, jumps, verdict,
    /// counterexamples, hypersurface, or list_catalog
    task: String,
    /// JSON run configuration
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for report.json and CSV dumps
    #[arg(long, default_value = "crfolio-out")]
    out: PathBuf,
    /// Overrides the config's seed
    #[arg(long)]
    seed: Option<u64>,
}

fn exit(code: i32) -> ExitCode {
    ExitCode::from(code as u8)
}

fn main() -> ExitCode {
    let args = Args::parse();
    if args.task == "list_catalog" {
        print!("{}", cli::list_catalog());
        return exit(0);
    }
    let task: Task = match args.task.parse() {
        Ok(t) => t,
        Err(e) => {
            eprintln!("crfolio: {e}");
            return exit(EXIT_CONFIG_ERROR);
        }
    };
    if let Err(e) = cli::init_threads() {
        eprintln!("crfolio: {e}");
        return exit(EXIT_CONFIG_ERROR);
    }
    let Some(path) = args.config else {
        eprintln!("crfolio: --config is required for task '{}'", task.name());
        return exit(EXIT_CONFIG_ERROR);
    };
    let mut cfg = match cli::load_config(&path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("crfolio: {e}");
            return exit(EXIT_CONFIG_ERROR);
        }
    };
    if cfg.task != task {
        eprintln!(
            "crfolio: {}: key `task`: config is for '{}' but '{}' was requested",
            path.display(),
            cfg.task.name(),
            task.name()
        );
        return exit(EXIT_CONFIG_ERROR);
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    match cli::run(&cfg, &args.out) {
        Ok(summary) => {
            if let Some(v) = &summary.report.verdict {
                println!("verdict: {v}");
            }
            if let Some(e) = &summary.report.error {
                eprintln!("crfolio: {}: {}", e.kind, e.message);
            }
            println!("report: {}", args.out.join("report.json").display());
            exit(summary.exit_code)
        }
        Err(e) => {
            eprintln!("crfolio: writing {}: {e}", args.out.display());
            exit(cli::EXIT_TASK_ERROR)
        }
    }
}
