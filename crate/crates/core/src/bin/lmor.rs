use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lmor::harness::{self, ExperimentConfig, ExperimentOutcome};
use lmor::Result;

#[derive(Parser)]
#[command(name = "lmor", version, about = "Local reduced spaces for convection-diffusion-reaction problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a local reduced basis with the adaptive randomized range finder.
    Train(Common),
    /// Train, then evaluate projection errors on fresh random samples.
    Evaluate(Common),
    /// Singular values of the transfer operator and errors of the optimal spaces.
    Oracle(Common),
    /// Train and evaluate once per oversampling margin.
    StudyOversampling {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', required = true)]
        deltas: Vec<f64>,
    },
    /// Compare both sides of the Caccioppoli inequality on random local solutions.
    CheckCaccioppoli {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 20)]
        samples: usize,
    },
}

#[derive(Args)]
struct Common {
    /// TOML experiment configuration.
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    max_basis: Option<usize>,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::load(&self.config)?;
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(d) = &self.out_dir {
            cfg.out_dir = d.clone();
        }
        if let Some(m) = self.max_basis {
            cfg.training.max_basis = m;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn report(out: &ExperimentOutcome) {
    println!("basis size: {} ({:?})", out.basis_size(), out.range.termination);
    if let Some(m) = out.errors.as_ref().and_then(|e| e.median_total().last().copied()) {
        println!("median relative error at full basis: {m:e}");
    }
    if let Some(s) = &out.sigmas {
        println!("singular values: {} (largest {:e})", s.len(), s.first().copied().unwrap_or(0.0));
    }
    for p in &out.artifacts {
        println!("wrote {}", p.display());
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train(c) => report(&harness::run_training(&c.load()?)?),
        Command::Evaluate(c) => report(&harness::run_experiment(&c.load()?)?),
        Command::Oracle(c) => report(&harness::run_oracle(&c.load()?)?),
        Command::StudyOversampling { common, deltas } => {
            println!("delta,h,n_cells,basis_size,wall_time_s");
            for r in harness::oversampling_study(&common.load()?, &deltas)? {
                println!("{},{},{},{},{:.2}", r.delta, r.h, r.n_cells, r.basis_size, r.wall_time);
            }
        }
        Command::CheckCaccioppoli { common, samples } => {
            let pairs = harness::check_caccioppoli(&common.load()?, samples)?;
            let worst = pairs.iter().map(|(l, r)| l / r).fold(0.0, f64::max);
            println!("{} samples, largest lhs/rhs = {worst:.4}", pairs.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 2 } else { 1 })
        }
    }
}
