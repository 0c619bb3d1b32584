use std::path::PathBuf;
use std::process::ExitCode;

use anneal_lab::eigenstate_analysis::Reference;
use anneal_lab::evolution::RampKind;
use anneal_lab::scrambling::OperatorLabel;
use anneal_lab_cli::run::default_out_dir;
use anneal_lab_cli::{estimate, load_config, run, CliError, ExperimentConfig, ExperimentKind, RampConfig, SectorChoice};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "anneal-lab", version, about = "Chaos and scrambling in quantum-annealing ramps")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print predicted dimensions, step counts, eigensolves and memory.
    Estimate { config: PathBuf },
    /// Accumulate ramp unitaries, storing checkpoints and their MLSR trace.
    Evolve {
        #[command(flatten)]
        ramp: RampArgs,
        #[arg(long = "N")]
        n: usize,
        #[arg(long, value_enum, default_value = "+")]
        sector: SectorArg,
        #[arg(long)]
        checkpoint_stride: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Entanglement profile of ramp-unitary eigenvectors over several sizes.
    Eigenstates {
        #[command(flatten)]
        ramp: RampArgs,
        #[arg(long = "ref", value_enum)]
        reference: Option<RefArg>,
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Operator-size distributions along a ramp.
    Scramble {
        #[command(flatten)]
        ramp: RampArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        op: Vec<OperatorLabel>,
        #[arg(long = "N")]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RampArgs {
    #[arg(long, value_enum)]
    ramp: Option<RampArg>,
    /// One-way ramp time (defaults to 3N²).
    #[arg(long = "T")]
    total_time: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
}

impl RampArgs {
    fn config(&self) -> RampConfig {
        RampConfig {
            kind: self.ramp.map(|r| match r {
                RampArg::Forward => RampKind::Forward,
                RampArg::Cyclic => RampKind::Cyclic,
            }),
            total_time: self.total_time,
            dt: self.dt,
            ..RampConfig::default()
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum RampArg {
    Forward,
    Cyclic,
}

#[derive(Clone, Copy, ValueEnum)]
enum SectorArg {
    #[value(name = "+")]
    Even,
    #[value(name = "-")]
    Odd,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum RefArg {
    #[value(name = "HM")]
    Hm,
    #[value(name = "HP")]
    Hp,
}

fn base(experiment: ExperimentKind, sizes: Vec<usize>, ramp: &RampArgs) -> ExperimentConfig {
    ExperimentConfig {
        experiment,
        model: None,
        sizes,
        sector: None,
        ramp: ramp.config(),
        s_grid: None,
        phi_grid: None,
        dicke_k: None,
        operators: Vec::new(),
        sample_times: None,
        reference: None,
        bulk_trim: None,
        checkpoint_stride: None,
        save_checkpoints: false,
        onset_band: None,
        seed: 0,
        output_dir: None,
    }
}

fn execute(config: ExperimentConfig, out: Option<PathBuf>) -> Result<bool, CliError> {
    config.validate().map_err(CliError::Config)?;
    let dir = out.unwrap_or_else(|| default_out_dir(&config));
    let manifest = run(&config, &dir)?;
    for t in manifest.tasks.iter().filter(|t| !t.ok) {
        eprintln!("task {} failed: {}", t.name, t.error.as_deref().unwrap_or("unknown error"));
    }
    eprintln!("wrote {} files to {}", manifest.files.len(), dir.display());
    Ok(manifest.succeeded())
}

fn dispatch(command: Command) -> Result<bool, CliError> {
    match command {
        Command::Run { config, out } => execute(load_config(&config)?, out),
        Command::Estimate { config } => {
            let report = estimate(&load_config(&config)?);
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            Ok(true)
        }
        Command::Evolve {
            ramp,
            n,
            sector,
            checkpoint_stride,
            out,
        } => {
            let mut c = base(ExperimentKind::RampUnitaryMlsr, vec![n], &ramp);
            c.sector = Some(match sector {
                SectorArg::Even => SectorChoice::Even,
                SectorArg::Odd => SectorChoice::Odd,
                SectorArg::Full => SectorChoice::Full,
            });
            c.checkpoint_stride = checkpoint_stride;
            c.save_checkpoints = true;
            execute(c, out)
        }
        Command::Eigenstates {
            ramp,
            reference,
            sizes,
            out,
        } => {
            let mut c = base(ExperimentKind::Eigenstates, sizes, &ramp);
            c.reference = reference.map(|r| match r {
                RefArg::Hm => Reference::Mixer,
                RefArg::Hp => Reference::Problem,
            });
            execute(c, out)
        }
        Command::Scramble { ramp, op, n, out } => {
            let mut c = base(ExperimentKind::Scramble, vec![n], &ramp);
            c.operators = op;
            execute(c, out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(k) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            eprintln!("error: cannot configure {k} threads: {e}");
            return ExitCode::from(2);
        }
    }
    match dispatch(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
