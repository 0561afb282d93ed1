use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use active_scalar::harness::{parse_config, run, Command, HarnessError, EXIT_OTHER};

#[derive(Parser)]
#[command(name = "active-scalar", version, about = "Operator-splitting experiments for active scalar equations")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// Output directory (overrides output.dir; default ./out)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for parallel study rows
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Replaces every seed in the configuration
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evolve the initial state and write snapshots plus a diagnostics CSV
    Evolve { config: PathBuf },
    /// Run a convergence study and write report CSVs plus a plot script
    Study { config: PathBuf },
    /// Audit the admissibility of (A, v) and write a JSON report
    Admit { config: PathBuf },
}

fn fail(err: &HarnessError, out: Option<&Path>) -> ExitCode {
    eprintln!("{err}");
    let record = err.record_json();
    eprintln!("{record}");
    if let Some(dir) = out {
        let written = std::fs::create_dir_all(dir)
            .and_then(|_| std::fs::write(dir.join("error.json"), format!("{record}\n")));
        if let Err(e) = written {
            eprintln!("could not write error record: {e}");
        }
    }
    ExitCode::from(err.exit_code() as u8)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();

    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("could not configure {n} threads: {e}");
            return ExitCode::from(EXIT_OTHER as u8);
        }
    }

    let (command, path) = match cli.command {
        Cmd::Evolve { config } => (Command::Evolve, config),
        Cmd::Study { config } => (Command::Study, config),
        Cmd::Admit { config } => (Command::Admit, config),
    };
    let text = match std::fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) => {
            let err = HarnessError::Solver(active_scalar::Error::Io(format!("{}: {e}", path.display())));
            return fail(&err, cli.out.as_deref());
        }
    };
    let mut cfg = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => return fail(&HarnessError::Config(e), cli.out.as_deref()),
    };
    if let Some(seed) = cli.seed {
        cfg = cfg.with_seed(seed);
    }
    let out = cli
        .out
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));

    match run(&cfg, command, &out) {
        Ok(outcome) => {
            for p in &outcome.artifacts {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        // run() has already written error.json into the output directory
        Err(e) => fail(&e, None),
    }
}
