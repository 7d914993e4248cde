use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use phasecorr::app::{self, Overrides};
use phasecorr::config::{parse_spec, CorrelationRequest, RunConfig};
use phasecorr::runner::Workers;
use phasecorr::AppError;

#[derive(Parser)]
#[command(name = "phasecorr", version, about = "Phase-space simulation of driven Bose-Hubbard modes and their multi-time correlations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Master seed, replacing `ensemble.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory, replacing `output.dir`.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Write a gnuplot script next to every CSV.
    #[arg(long)]
    emit_gnuplot: bool,
}

impl Common {
    fn load(&self) -> Result<(RunConfig, Overrides), AppError> {
        let mut cfg = RunConfig::load(&self.config)?;
        let o = Overrides { seed: self.seed, workers: self.workers, out: self.out.clone(), gnuplot: self.emit_gnuplot };
        o.apply(&mut cfg);
        Ok((cfg, o))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Evolve from the vacuum to `t_end`, writing occupations and any configured correlations.
    Simulate(Common),
    /// Estimate the configured correlations, optionally starting from a checkpoint.
    Correlate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "PATH")]
        checkpoint: Option<PathBuf>,
    },
    /// Show the representation schedule and variable map for correlations.
    Plan {
        #[arg(long, value_name = "PATH", conflicts_with = "spec")]
        config: Option<PathBuf>,
        /// A product such as "a_1(t0) a+_1(t1)"; modes count from 1.
        #[arg(long)]
        spec: Option<String>,
    },
    /// Count products of ladder operators by how they can be estimated.
    Tally {
        #[arg(long, default_value_t = 3)]
        factors: usize,
        #[arg(long, default_value_t = 3)]
        times: usize,
    },
    /// Master-equation reference curves for the configured correlations.
    Oracle(Common),
    /// Paired-noise timestep doubling over successive halvings of `dt`.
    ConvergenceCheck(Common),
}

fn run(cli: Cli) -> Result<(), AppError> {
    match cli.command {
        Command::Simulate(c) => {
            let (cfg, o) = c.load()?;
            let report = app::simulate(&cfg, &Workers::new(o.workers)?)?;
            print_report(&report);
        }
        Command::Correlate { common, checkpoint } => {
            let (cfg, o) = common.load()?;
            let report = app::correlate(&cfg, &Workers::new(o.workers)?, checkpoint.as_deref())?;
            print_report(&report);
        }
        Command::Plan { config, spec } => {
            let specs = match (config, spec) {
                (Some(path), _) => RunConfig::load(&path)?
                    .correlation_requests()?
                    .into_iter()
                    .filter_map(|r| match r {
                        CorrelationRequest::Product { name, spec, .. } => Some((name, spec)),
                        CorrelationRequest::G2 { .. } => None,
                    })
                    .collect(),
                (None, Some(text)) => vec![("spec".to_string(), parse_spec(&text)?)],
                (None, None) => return Err(AppError::Config("plan needs --config or --spec".into())),
            };
            print!("{}", app::plan_report(&specs));
        }
        Command::Tally { factors, times } => {
            if !(1..=4).contains(&factors) || times == 0 {
                return Err(AppError::Config("tally supports 1 to 4 factors and at least one time".into()));
            }
            print!("{}", app::tally_report(factors, times));
        }
        Command::Oracle(c) => {
            let (cfg, _) = c.load()?;
            print_report(&app::oracle(&cfg)?);
        }
        Command::ConvergenceCheck(c) => {
            let (cfg, _) = c.load()?;
            print!("{}", app::convergence(&cfg)?.render());
        }
    }
    Ok(())
}

fn print_report(r: &app::RunReport) {
    println!("wrote to {}:", r.dir.display());
    for f in &r.files {
        println!("  {f}");
    }
    println!("escaped {} clamps {} wall {:.2}s", r.stats.escaped, r.stats.clamps, r.stats.wall_seconds);
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
