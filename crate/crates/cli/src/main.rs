use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use subeq_cli::{run, RunConfig, EXIT_CONFIG};

#[derive(Parser, Debug)]
#[command(name = "subeq", version, about = "Subequations, their duals and Perron solutions on grids")]
struct Args {
    /// Run configuration (`key = value` lines or a JSON object).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the `seed` key.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the `out` key.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Suppress the report on stdout.
    #[arg(long)]
    quiet: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    ExitCode::from(execute(&args) as u8)
}

fn execute(args: &Args) -> i32 {
    let text = match fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.config.display());
            return EXIT_CONFIG;
        }
    };
    let mut cfg = match RunConfig::parse(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    if args.seed.is_some() {
        cfg.seed = args.seed;
    }
    if let Some(out) = &args.out {
        cfg.out = Some(out.display().to_string());
    }
    let outcome = match run(&cfg) {
        Ok(o) => o,
        Err(f) => {
            eprintln!("error: {}", f.message);
            return f.code;
        }
    };
    let report = serde_json::to_string_pretty(&outcome.report).expect("report serializes") + "\n";
    if let Some(dir) = &cfg.out {
        let dir = PathBuf::from(dir);
        let written = fs::create_dir_all(&dir)
            .and_then(|_| fs::write(dir.join("report.json"), &report))
            .and_then(|_| fs::write(dir.join("config.txt"), cfg.to_text()))
            .and_then(|_| match &outcome.csv {
                Some(csv) => fs::write(dir.join("solution.csv"), csv),
                None => Ok(()),
            });
        if let Err(e) = written {
            eprintln!("error: cannot write to {}: {e}", dir.display());
            return EXIT_CONFIG;
        }
    }
    if !args.quiet {
        print!("{report}");
    }
    if outcome.code != 0 {
        eprintln!("{}: undecided or not converged (exit {})", cfg.command.as_str(), outcome.code);
    }
    outcome.code
}
