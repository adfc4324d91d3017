use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nmep::error::Error;
use nmep::scenario::{run, Action, Format, RunOptions, ScenarioConfig};

#[derive(Parser)]
#[command(name = "nmep", version, about = "Exceptional points of non-Markovian open quantum systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalue tracks over a parameter grid
    Sweep(Common),
    /// Locate an exceptional point and report its Jordan structure
    EpFind(Common),
    /// Reduced qubit (or network amplitude) dynamics
    Dynamics(Common),
    /// Splitting or vanishing-time scaling near an exceptional point
    Sensitivity(Common),
    /// Cross-check pseudomode, hierarchy and closed-form results
    Validate(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides NMEP_OUT and the config
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for parallel grids
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long = "format", value_enum)]
    formats: Vec<Fmt>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Fmt {
    Csv,
    Json,
    Svg,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (action, c) = match cli.command {
        Command::Sweep(c) => (Action::Sweep, c),
        Command::EpFind(c) => (Action::EpFind, c),
        Command::Dynamics(c) => (Action::Dynamics, c),
        Command::Sensitivity(c) => (Action::Sensitivity, c),
        Command::Validate(c) => (Action::Validate, c),
    };
    match execute(action, c) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(action: Action, c: Common) -> Result<(), Error> {
    if let Some(n) = c.jobs {
        if n == 0 {
            return Err(Error::Config {
                field: "--jobs".into(),
                message: "must be at least 1".into(),
            });
        }
        // only fails if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let cfg = ScenarioConfig::load(&c.config)?;
    let out_dir = c
        .out
        .or_else(|| std::env::var_os("NMEP_OUT").map(PathBuf::from))
        .or_else(|| cfg.output.dir.as_ref().map(|d| cfg.base_dir.join(d)))
        .unwrap_or_else(|| PathBuf::from("out"));
    let mut formats: Vec<Format> = c
        .formats
        .iter()
        .map(|f| match f {
            Fmt::Csv => Format::Csv,
            Fmt::Json => Format::Json,
            Fmt::Svg => Format::Svg,
        })
        .collect();
    if formats.is_empty() {
        formats = cfg.output.formats.clone();
    }
    if formats.is_empty() {
        formats.push(Format::Csv);
    }
    formats.dedup();
    let summary = run(&cfg, action, &RunOptions { out_dir, formats })?;
    for line in &summary.lines {
        println!("{line}");
    }
    for f in &summary.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}
