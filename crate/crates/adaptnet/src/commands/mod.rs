//! One entry point per CLI command. Each writes its artifacts into the
//! output directory and nothing else.

mod analytics;
mod simulate;
mod train;

use std::path::{Path, PathBuf};
use std::sync::atomic::AtomicBool;

use adaptnet_core::modes::Mode1Variant;
use adaptnet_core::ScenarioConfig;

pub use analytics::{aoi_bench, aoi_sweep, bench_frame, cluster_trajectories, frechet_batch, BENCH_COLUMNS};
pub use simulate::{
    run_simulation, scale_point, scale_sweep, simulate, write_scale_sweep, ScalePoint, SimulationRun,
    SimulationSummary, AOI_COLUMNS, DETECTION_COLUMNS, SCALE_COLUMNS, STEP_COLUMNS,
};
pub use train::{train_mode1_cmd, train_mode2_cmd, TrainingSummary};

use crate::error::{AppError, AppResult};
use crate::io::{ensure_dir, read_trajectories};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    TrainMode1,
    TrainMode2,
    AoiBench,
    Cluster,
    Frechet,
    ScaleSweep,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::TrainMode1 => "train-mode1",
            Command::TrainMode2 => "train-mode2",
            Command::AoiBench => "aoi-bench",
            Command::Cluster => "cluster",
            Command::Frechet => "frechet",
            Command::ScaleSweep => "scale-sweep",
        }
    }
}

pub struct RunOptions<'a> {
    pub out: PathBuf,
    /// Trajectory CSV for the batch analytics commands.
    pub input: Option<PathBuf>,
    pub variant: Mode1Variant,
    /// Set from a signal handler; training stops after the current episode.
    pub stop: &'a AtomicBool,
}

fn input(opts: &RunOptions<'_>, cmd: Command) -> AppResult<PathBuf> {
    opts.input
        .clone()
        .ok_or_else(|| AppError::Input(format!("{} needs --input <trajectories.csv>", cmd.name())))
}

/// Runs `cmd` and writes its artifacts under `opts.out`.
pub fn run_command(config: &ScenarioConfig, cmd: Command, opts: &RunOptions<'_>) -> AppResult<()> {
    config.validate()?;
    let out: &Path = &opts.out;
    ensure_dir(out)?;
    crate::io::write_json(&out.join("config.json"), config)?;
    match cmd {
        Command::Simulate => {
            let s = simulate(config, out)?;
            log::info!("simulated {} steps, {} detections, {} deliveries", s.steps, s.detections, s.deliveries);
        }
        Command::TrainMode1 => {
            let s = train_mode1_cmd(config, opts.variant, out, opts.stop)?;
            log::info!("mode1 reward {:.3} -> {:.3}", s.first_decile_reward, s.last_decile_reward);
        }
        Command::TrainMode2 => {
            let s = train_mode2_cmd(config, out, opts.stop)?;
            log::info!("mode2 reward {:.3} -> {:.3}", s.first_decile_reward, s.last_decile_reward);
        }
        Command::AoiBench => {
            aoi_bench(config, out)?;
        }
        Command::Cluster => {
            let t = read_trajectories(&input(opts, cmd)?)?;
            cluster_trajectories(config, &t, out)?;
        }
        Command::Frechet => {
            let t = read_trajectories(&input(opts, cmd)?)?;
            frechet_batch(config, &t, out)?;
        }
        Command::ScaleSweep => {
            let points = scale_sweep(config)?;
            for p in &points {
                log::info!("{} UAVs: {:.3} ms/step", p.uav_count, p.step_seconds * 1e3);
            }
            write_scale_sweep(&points, out)?;
        }
    }
    Ok(())
}
