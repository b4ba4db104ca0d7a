use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};

use adaptnet::commands::{run_command, Command, RunOptions};
use adaptnet::{load_config, AppResult};
use adaptnet_core::modes::Mode1Variant;
use adaptnet_core::ScenarioConfig;
use clap::{Parser, Subcommand, ValueEnum};

static STOP: AtomicBool = AtomicBool::new(false);

#[derive(Parser)]
#[command(name = "adaptnet", version, about = "Multi-UAV sensing and communication simulator")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Scenario JSON; defaults apply to every missing key.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Trajectory CSV (`id,x,y,t`) for cluster and frechet.
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Reward sharing for train-mode1.
    #[arg(long, global = true, value_enum, default_value_t = Variant::Cooperative)]
    variant: Variant,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Scripted mission with world snapshots and per-step metrics.
    Simulate,
    /// DQN path selection for the sensing mode.
    TrainMode1,
    /// MADDPG link control for the communication mode.
    TrainMode2,
    /// Average age of information across arrival rates and disciplines.
    AoiBench,
    /// Fréchet k-medoids clustering of input trajectories.
    Cluster,
    /// Pairwise Fréchet distances of input trajectories.
    Frechet,
    /// Sensing error and step time across UAV counts.
    ScaleSweep,
}

#[derive(ValueEnum, Clone, Copy)]
enum Variant {
    Cooperative,
    Independent,
}

fn run(cli: &Cli) -> AppResult<()> {
    let mut config = match &cli.config {
        Some(p) => load_config(p)?,
        None => ScenarioConfig::default(),
    };
    if let Some(s) = cli.seed {
        config.seed = s;
    }
    let cmd = match cli.command {
        Cmd::Simulate => Command::Simulate,
        Cmd::TrainMode1 => Command::TrainMode1,
        Cmd::TrainMode2 => Command::TrainMode2,
        Cmd::AoiBench => Command::AoiBench,
        Cmd::Cluster => Command::Cluster,
        Cmd::Frechet => Command::Frechet,
        Cmd::ScaleSweep => Command::ScaleSweep,
    };
    let opts = RunOptions {
        out: cli.out.clone(),
        input: cli.input.clone(),
        variant: match cli.variant {
            Variant::Cooperative => Mode1Variant::Cooperative,
            Variant::Independent => Mode1Variant::Independent,
        },
        stop: &STOP,
    };
    run_command(&config, cmd, &opts)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("ADAPTNET_LOG", "warn")).init();
    let cli = Cli::parse();
    if let Err(e) = ctrlc::set_handler(|| STOP.store(true, Ordering::Relaxed)) {
        log::warn!("interrupt handler unavailable: {e}");
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
