//! `fracbc`: run nonlocal diffusion experiments from TOML configs.
//!
//! Exit codes: 0 success, 2 invalid config or arguments, 3 numerical failure
//! (or a comparison outside its tolerance).

mod compare;
mod config;
mod run;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::Config;
use run::RunError;

#[derive(Debug, Parser)]
#[command(name = "fracbc", version, about = "Fractional diffusion solvers, Monte Carlo flights and spectral checks")]
#[command(args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    sub: Option<Sub>,

    /// Experiment config (TOML); a manifest.toml from an earlier run replays it
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Overrides stochastic.seed
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,

    /// Caps the worker pool; results do not depend on it
    #[arg(long, value_name = "N")]
    threads: Option<usize>,

    /// Overrides output.dir
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Node-wise difference of two runs; a third, finer run adds an order estimate
    Compare {
        run_a: PathBuf,
        run_b: PathBuf,
        run_c: Option<PathBuf>,
        /// Largest acceptable node-wise difference
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Also write compare.csv here
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
}

const EXIT_INVALID: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("invalid argument: --threads must be positive");
            return ExitCode::from(EXIT_INVALID);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("cannot size the worker pool: {e}");
            return ExitCode::from(EXIT_INVALID);
        }
    }
    match &cli.sub {
        Some(Sub::Compare { run_a, run_b, run_c, tol, out }) => compare_runs(run_a, run_b, run_c.as_deref(), *tol, out.as_deref()),
        None => run_config(&cli),
    }
}

fn run_config(cli: &Cli) -> ExitCode {
    let Some(path) = &cli.config else {
        eprintln!("invalid arguments: --config PATH is required (or use `fracbc compare`)");
        return ExitCode::from(EXIT_INVALID);
    };
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("cannot read {}: {e}", path.display());
            return ExitCode::from(EXIT_INVALID);
        }
    };
    let mut cfg = match Config::parse(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(EXIT_INVALID);
        }
    };
    if let Some(seed) = cli.seed {
        cfg.stochastic.get_or_insert_with(Default::default).seed = Some(seed);
    }
    if let Some(out) = &cli.out {
        cfg.output.get_or_insert_with(Default::default).dir = Some(out.display().to_string());
    }
    if let Err(e) = cfg.resolve() {
        eprintln!("{e}");
        return ExitCode::from(EXIT_INVALID);
    }
    let dir = PathBuf::from(cfg.output_dir());
    match run::execute(&cfg, &dir) {
        Ok(()) => {
            println!("wrote {}", dir.display());
            ExitCode::SUCCESS
        }
        Err(RunError::Invalid(m)) => {
            eprintln!("invalid config: {m}");
            ExitCode::from(EXIT_INVALID)
        }
        Err(RunError::Numeric(m)) => {
            eprintln!("numerical failure: {m}");
            if let Ok(d) = fs::read_to_string(dir.join("diagnostics.csv")) {
                eprint!("{d}");
            }
            ExitCode::from(EXIT_NUMERIC)
        }
        Err(RunError::Io(e)) => {
            eprintln!("i/o error: {e}");
            ExitCode::from(EXIT_NUMERIC)
        }
    }
}

fn compare_runs(a: &Path, b: &Path, c: Option<&Path>, tol: f64, out: Option<&Path>) -> ExitCode {
    let load = |p: &Path| compare::read_table(p);
    let tables = (|| Ok::<_, String>((load(a)?, load(b)?, c.map(load).transpose()?)))();
    let (ta, tb, tc) = match tables {
        Ok(t) => t,
        Err(e) => {
            eprintln!("invalid input: {e}");
            return ExitCode::from(EXIT_INVALID);
        }
    };
    let cmp = match compare::compare(&ta, &tb, tc.as_ref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("invalid input: {e}");
            return ExitCode::from(EXIT_INVALID);
        }
    };
    let csv = cmp.to_csv(tol);
    print!("{csv}");
    if let Some(dir) = out {
        if let Err(e) = fs::create_dir_all(dir).and_then(|_| fs::write(dir.join("compare.csv"), &csv)) {
            eprintln!("i/o error: {e}");
            return ExitCode::from(EXIT_NUMERIC);
        }
    }
    // with standard errors the statistical criterion decides
    let ok = match cmp.max_stderr_ratio {
        Some(r) => r <= 3.0,
        None => cmp.max_abs_diff <= tol,
    };
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_NUMERIC)
    }
}
