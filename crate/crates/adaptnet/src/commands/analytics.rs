//! Queueing benchmark and batch trajectory analytics.

use std::path::Path;

use adaptnet_core::clustering::{cluster_report, k_medoids, pairwise_frechet};
use adaptnet_core::comms::bench::{fcfs_mm1_aoi, lcfs_s_mm1_aoi, simulate_mm1, Mm1Result};
use adaptnet_core::comms::QueueDiscipline;
use adaptnet_core::rng::mix_seed;
use adaptnet_core::trajectory::{discrete_frechet, resample_uniform, sliding_window_frechet};
use adaptnet_core::{ScenarioConfig, Trajectory};
use rayon::prelude::*;

use super::simulate::{cluster_map_frame, window_frame};
use crate::error::{AppError, AppResult};
use crate::metrics::{emit_plot_data, MetricsFrame, PlotKind};

pub const BENCH_COLUMNS: &[&str] = &[
    "lambda",
    "mu",
    "discipline",
    "avg_aoi",
    "delivered",
    "dropped",
    "fcfs_closed_form",
    "lcfs_s_closed_form",
];

/// Simulates every (arrival rate, discipline) pair of the sweep. Each pair
/// draws from its own seed, so results do not depend on scheduling.
pub fn aoi_sweep(config: &ScenarioConfig) -> AppResult<Vec<Mm1Result>> {
    let b = &config.aoi_bench;
    let jobs: Vec<(usize, f64, QueueDiscipline)> = b
        .lambdas
        .iter()
        .flat_map(|&l| QueueDiscipline::ALL.into_iter().map(move |d| (l, d)))
        .enumerate()
        .map(|(i, (l, d))| (i, l, d))
        .collect();
    jobs.par_iter()
        .map(|&(i, l, d)| Ok(simulate_mm1(d, l, b.mu, b.horizon, mix_seed(config.seed, i as u64))?))
        .collect()
}

pub fn bench_frame(results: &[Mm1Result]) -> MetricsFrame {
    let mut m = MetricsFrame::new(BENCH_COLUMNS);
    for r in results {
        m.push(vec![
            r.lambda.into(),
            r.mu.into(),
            r.discipline.name().into(),
            r.avg_aoi.into(),
            r.delivered.into(),
            r.dropped.into(),
            fcfs_mm1_aoi(r.lambda, r.mu).into(),
            lcfs_s_mm1_aoi(r.lambda, r.mu).into(),
        ])
        .expect("fixed width");
    }
    m
}

pub fn aoi_bench(config: &ScenarioConfig, out: &Path) -> AppResult<Vec<Mm1Result>> {
    let results = aoi_sweep(config)?;
    let frame = bench_frame(&results);
    frame.write_csv(&out.join("aoi_bench.csv"))?;
    emit_plot_data(&frame, PlotKind::AoiCurves, out)?;
    Ok(results)
}

fn label(t: &Trajectory, i: usize) -> String {
    t.label().map_or_else(|| i.to_string(), str::to_string)
}

/// Clusters input trajectories by Fréchet distance after resampling each
/// to the comparison length.
pub fn cluster_trajectories(config: &ScenarioConfig, trajectories: &[Trajectory], out: &Path) -> AppResult<()> {
    if trajectories.is_empty() {
        return Err(AppError::Input("no trajectories to cluster".into()));
    }
    let resampled = trajectories
        .iter()
        .map(|t| {
            if t.len() >= 2 {
                resample_uniform(t, config.comparison_length)
            } else {
                Ok(t.clone())
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let matrix = pairwise_frechet(&resampled)?;
    let k = config.cluster_k.min(trajectories.len());
    let clustering = k_medoids(&matrix, k, config.seed)?;
    let mut m = MetricsFrame::new(&["traj_id", "cluster", "medoid_id", "distance_to_medoid"]);
    for (i, &c) in clustering.assignment.iter().enumerate() {
        let medoid = clustering.medoids[c];
        m.push(vec![
            label(&trajectories[i], i).into(),
            c.into(),
            label(&trajectories[medoid], medoid).into(),
            matrix.get(i, medoid).into(),
        ])?;
    }
    m.write_csv(&out.join("clusters.csv"))?;
    let report = cluster_report(&clustering, trajectories)?;
    emit_plot_data(&cluster_map_frame(&report), PlotKind::ClusterMap, out)?;
    Ok(())
}

/// Pairwise discrete Fréchet distances of the raw input trajectories, plus
/// a sliding-window comparison of the first two.
pub fn frechet_batch(config: &ScenarioConfig, trajectories: &[Trajectory], out: &Path) -> AppResult<()> {
    let mut pairs = Vec::new();
    for i in 0..trajectories.len() {
        for j in i + 1..trajectories.len() {
            pairs.push((i, j));
        }
    }
    let distances = pairs
        .par_iter()
        .map(|&(i, j)| discrete_frechet(&trajectories[i], &trajectories[j]))
        .collect::<Result<Vec<_>, _>>()?;
    let mut m = MetricsFrame::new(&["traj_a", "traj_b", "distance"]);
    for (&(i, j), d) in pairs.iter().zip(distances) {
        m.push(vec![label(&trajectories[i], i).into(), label(&trajectories[j], j).into(), d.into()])?;
    }
    m.write_csv(&out.join("frechet.csv"))?;
    let windows = match trajectories {
        [a, b, ..] => {
            let w = config.comparison_length.min(a.len().min(b.len())).max(1);
            sliding_window_frechet(a, b, w, (w / 2).max(1))?
        }
        _ => Vec::new(),
    };
    emit_plot_data(&window_frame(&windows), PlotKind::TrajectoryCompare, out)?;
    Ok(())
}
