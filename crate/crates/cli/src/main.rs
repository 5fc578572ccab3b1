use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use crsma::{generate_channels, harness, oracle, solve_scheme, Error, ExperimentSpec, NetworkConfig, ScaSettings, Scheme};
use log::info;
use serde_json::json;

#[derive(Parser)]
#[command(name = "crsma", version, about = "Cooperative rate-splitting max-min optimizer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one channel draw and print the solution as JSON.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long)]
        seed: u64,
        /// Per-iteration trace as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run a Monte Carlo sweep and write the result tables.
    Sweep {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Compare the optimizer against the reference values.
    Oracle {
        #[arg(long, value_enum)]
        case: OracleCase,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Hd,
    Fd,
    Baseline,
}

impl From<ModeArg> for Scheme {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Hd => Scheme::Hd,
            ModeArg::Fd => Scheme::Fd,
            ModeArg::Baseline => Scheme::Baseline,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleCase {
    Capacity,
    #[value(name = "grid2user")]
    Grid2User,
    Tangency,
}

enum Failure {
    Validation(String),
    Solver(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Solver(_) | Error::InitializationInfeasible(_) => Failure::Solver(e.to_string()),
            _ => Failure::Validation(e.to_string()),
        }
    }
}

fn read(path: &PathBuf) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))
}

fn solve(config: PathBuf, mode: ModeArg, seed: u64, trace: Option<PathBuf>) -> Result<(), Failure> {
    let cfg = NetworkConfig::from_json(&read(&config)?)?;
    for w in cfg.assumption_warnings() {
        log::warn!("{w}");
    }
    let chan = generate_channels(&cfg, seed)?;
    let out = solve_scheme(mode.into(), &chan, &cfg, &ScaSettings::default())?;
    if let Some(path) = trace {
        let file = fs::File::create(&path).map_err(Error::from)?;
        out.write_trace(file)?;
    }
    let doc = json!({
        "scheme": out.scheme,
        "seed": seed,
        "theta": out.theta,
        "max_min": out.max_min(),
        "converged": out.runs.iter().all(|r| r.converged),
        "report": out.report,
        "solution": out.solution,
    });
    println!("{}", serde_json::to_string_pretty(&doc).map_err(Error::from)?);
    Ok(())
}

fn sweep(spec: PathBuf, out: Option<PathBuf>, jobs: Option<usize>) -> Result<(), Failure> {
    let spec = ExperimentSpec::from_json(&read(&spec)?)?;
    let dir = out
        .or_else(|| spec.output.clone())
        .ok_or_else(|| Failure::Validation("no output directory: pass --out or set `output`".into()))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Failure::Validation(e.to_string()))?;
    let table = pool.install(|| harness::run(&spec, &ScaSettings::default()))?;
    let files = harness::report(&table, &dir)?;
    let failed: usize = table.rows.iter().map(|r| r.n_fail).sum();
    info!("wrote {}, {}, {}", files.table.display(), files.plot.display(), files.manifest.display());
    let mut stdout = std::io::stdout().lock();
    table.write_csv(&mut stdout)?;
    if failed > 0 {
        return Err(Failure::Solver(format!("{failed} trials failed")));
    }
    Ok(())
}

fn run_oracle(case: OracleCase) -> Result<(), Failure> {
    let settings = ScaSettings::default();
    let check = match case {
        OracleCase::Capacity => oracle::check_capacity(50, &settings)?,
        OracleCase::Grid2User => oracle::check_grid(20, &settings)?,
        OracleCase::Tangency => oracle::check_tangency(10_000),
    };
    println!("{check}");
    if check.passed {
        Ok(())
    } else {
        Err(Failure::Solver(format!("{} oracle failed", check.name)))
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve { config, mode, seed, trace } => solve(config, mode, seed, trace),
        Command::Sweep { spec, out, jobs } => sweep(spec, out, jobs),
        Command::Oracle { case } => run_oracle(case),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Solver(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
