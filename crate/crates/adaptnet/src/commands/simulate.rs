//! Scripted end-to-end mission run and the UAV-count scaling study.

use std::path::Path;
use std::time::Instant;

use adaptnet_core::mission::{CommsControl, Mission};
use adaptnet_core::modes::{Emphasis, ModeController};
use adaptnet_core::trajectory::sliding_window_frechet;
use adaptnet_core::world::{MotionCommand, Snapshot};
use adaptnet_core::ScenarioConfig;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::AppResult;
use crate::io::{write_json, JsonLines};
use crate::metrics::{emit_plot_data, Cell, MetricsFrame, PlotKind};

pub const STEP_COLUMNS: &[&str] = &[
    "step",
    "time",
    "emphasis",
    "active_uavs",
    "detections",
    "false_alarms",
    "detection_rate",
    "mean_error",
    "deliveries",
    "drops",
    "bits",
    "energy_j",
    "avg_aoi",
    "mean_battery",
];

pub const AOI_COLUMNS: &[&str] = &[
    "time",
    "uav_id",
    "discipline",
    "inst_age",
    "avg_age",
    "delivered",
    "dropped",
    "energy_j",
];

pub const DETECTION_COLUMNS: &[&str] = &["time", "uav_id", "target_id", "x", "y", "true_x", "true_y", "snr"];

#[derive(Debug, Clone, Serialize)]
struct SnapshotLine<'a> {
    step: usize,
    #[serde(flatten)]
    snapshot: &'a Snapshot,
}

/// Everything a scripted run produced, before any of it is written out.
pub struct SimulationRun {
    pub steps: MetricsFrame,
    pub aoi: MetricsFrame,
    pub detections: MetricsFrame,
    pub snapshots: Vec<Snapshot>,
    pub mission: Mission,
    /// Per-axis measurement errors of every target detection.
    pub axis_errors: Vec<f64>,
    /// Wall time spent inside mission steps, seconds.
    pub step_seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationSummary {
    pub seed: u64,
    pub uav_count: usize,
    pub target_count: usize,
    pub steps: usize,
    pub detections: usize,
    pub deliveries: usize,
    pub drops: u64,
    pub bits: f64,
    pub comm_energy_j: f64,
    pub mean_error: Option<f64>,
    pub avg_aoi: Vec<f64>,
    pub final_emphasis: Emphasis,
    pub state_hash: String,
}

fn emphasis_name(e: Emphasis) -> &'static str {
    match e {
        Emphasis::Sensing => "SENSING",
        Emphasis::Communication => "COMMUNICATION",
    }
}

/// Runs one scripted mission: UAVs patrol their assigned paths while the
/// controller favours sensing, and hover to save energy while it favours
/// communication. The uplink runs relevance-gated throughout.
pub fn run_simulation(config: &ScenarioConfig) -> AppResult<SimulationRun> {
    let mut mission = Mission::new(config, 0)?;
    let mut controller = ModeController::new(&config.controller);
    let discipline = config.discipline_name();
    let mut steps = MetricsFrame::new(STEP_COLUMNS);
    let mut aoi = MetricsFrame::new(AOI_COLUMNS);
    let mut detections = MetricsFrame::new(DETECTION_COLUMNS);
    let mut snapshots = vec![mission.world.snapshot()];
    let mut axis_errors = Vec::new();
    let n = mission.uav_count();
    let mut delivered = vec![0usize; n];
    let mut comm_energy = vec![0.0; n];
    let mut step_seconds = 0.0;

    for _ in 0..config.episode_steps {
        let commands: Vec<MotionCommand> = mission
            .world
            .uavs
            .iter()
            .map(|u| match controller.emphasis() {
                Emphasis::Sensing => MotionCommand::FollowPath(u.assigned_path),
                Emphasis::Communication => MotionCommand::Hold,
            })
            .collect();
        let battery_before: f64 = mission.world.uavs.iter().map(|u| u.battery).sum();
        let t0 = Instant::now();
        let ev = mission.step(&commands, CommsControl::Gated)?;
        step_seconds += t0.elapsed().as_secs_f64();
        let battery_after: f64 = mission.world.uavs.iter().map(|u| u.battery).sum();

        let scores: Vec<_> = ev.uavs.iter().flat_map(|u| u.offered.iter().map(|p| p.relevance)).collect();
        let emphasis = controller.observe(&scores);

        let mut seen = vec![false; mission.world.targets.len()];
        let (mut err_sum, mut err_n, mut false_alarms) = (0.0, 0usize, 0usize);
        for (u, uev) in ev.uavs.iter().enumerate() {
            for d in &uev.detections {
                let target = match d.target_id {
                    Some(j) => {
                        seen[j] = true;
                        let (ex, ey) = (d.measured.x - d.truth.x, d.measured.y - d.truth.y);
                        axis_errors.extend([ex, ey]);
                        err_sum += ex.hypot(ey);
                        err_n += 1;
                        Cell::from(j)
                    }
                    None => {
                        false_alarms += 1;
                        Cell::Empty
                    }
                };
                detections.push(vec![
                    d.time.into(),
                    u.into(),
                    target,
                    d.measured.x.into(),
                    d.measured.y.into(),
                    d.truth.x.into(),
                    d.truth.y.into(),
                    d.snr.into(),
                ])?;
            }
            delivered[u] += uev.delivered.len();
            comm_energy[u] += uev.comm_energy;
            let link = &mission.uplinks[u];
            aoi.push(vec![
                ev.time.into(),
                u.into(),
                discipline.as_str().into(),
                link.aoi.inst_age().into(),
                link.aoi.average().into(),
                delivered[u].into(),
                link.queue.dropped().into(),
                comm_energy[u].into(),
            ])?;
        }
        let w = &mission.world;
        let active = w.uavs.iter().filter(|u| u.active).count();
        let avg_aoi = mission.uplinks.iter().map(|l| l.aoi.average()).sum::<f64>() / n as f64;
        steps.push(vec![
            ev.step.into(),
            ev.time.into(),
            emphasis_name(emphasis).into(),
            active.into(),
            err_n.into(),
            false_alarms.into(),
            (seen.iter().filter(|s| **s).count() as f64 / seen.len() as f64).into(),
            (err_n > 0).then(|| err_sum / err_n as f64).into(),
            ev.deliveries().into(),
            ev.drops().into(),
            ev.uavs.iter().map(|u| u.bits).sum::<f64>().into(),
            (battery_before - battery_after).into(),
            avg_aoi.into(),
            (battery_after / n as f64).into(),
        ])?;
        snapshots.push(w.snapshot());
    }
    Ok(SimulationRun {
        steps,
        aoi,
        detections,
        snapshots,
        mission,
        axis_errors,
        step_seconds,
    })
}

pub fn cluster_map_frame(picture: &[adaptnet_core::clustering::ClusterSummary]) -> MetricsFrame {
    let mut m = MetricsFrame::new(&["cluster", "size", "centroid_x", "centroid_y", "medoid"]);
    for c in picture {
        m.push(vec![
            c.cluster.into(),
            c.size.into(),
            c.centroid.x.into(),
            c.centroid.y.into(),
            c.medoid.into(),
        ])
        .expect("fixed width");
    }
    m
}

pub fn window_frame(windows: &[adaptnet_core::trajectory::WindowDistance]) -> MetricsFrame {
    let mut m = MetricsFrame::new(&["start_time", "end_time", "distance"]);
    for w in windows {
        m.push(vec![w.start_time.into(), w.end_time.into(), w.distance.into()])
            .expect("fixed width");
    }
    m
}

pub fn simulate(config: &ScenarioConfig, out: &Path) -> AppResult<SimulationSummary> {
    let run = run_simulation(config)?;
    run.steps.write_csv(&out.join("metrics.csv"))?;
    run.aoi.write_csv(&out.join("aoi.csv"))?;
    run.detections.write_csv(&out.join("detections.csv"))?;
    let mut log = JsonLines::create(&out.join("snapshots.jsonl"))?;
    for (step, snapshot) in run.snapshots.iter().enumerate() {
        log.write(&SnapshotLine { step, snapshot })?;
    }
    log.flush()?;

    let m = &run.mission;
    emit_plot_data(&cluster_map_frame(&m.picture), PlotKind::ClusterMap, out)?;
    let windows = if m.uav_count() >= 2 {
        let (a, b) = (&m.world.uavs[0].history, &m.world.uavs[1].history);
        let w = config.comparison_length.min(a.len().min(b.len())).max(1);
        sliding_window_frechet(a, b, w, (w / 2).max(1))?
    } else {
        Vec::new()
    };
    emit_plot_data(&window_frame(&windows), PlotKind::TrajectoryCompare, out)?;

    let col = |name: &str| run.steps.numbers(name).unwrap_or_default();
    let errs: Vec<f64> = col("mean_error").into_iter().filter(|v| v.is_finite()).collect();
    let detections = run.axis_errors.len() / 2;
    let summary = SimulationSummary {
        seed: config.seed,
        uav_count: config.uav_count,
        target_count: config.target_count,
        steps: config.episode_steps,
        detections,
        deliveries: col("deliveries").iter().sum::<f64>() as usize,
        drops: col("drops").iter().sum::<f64>() as u64,
        bits: col("bits").iter().sum(),
        comm_energy_j: m.uplinks.iter().map(|l| l.stats.energy).sum(),
        mean_error: (!errs.is_empty()).then(|| {
            run.axis_errors.chunks(2).map(|e| e[0].hypot(e[1])).sum::<f64>() / detections as f64
        }),
        avg_aoi: m.uplinks.iter().map(|l| l.aoi.average()).collect(),
        final_emphasis: run
            .steps
            .rows()
            .last()
            .map_or(Emphasis::Sensing, |r| match &r[2] {
                Cell::Text(t) if t == "COMMUNICATION" => Emphasis::Communication,
                _ => Emphasis::Sensing,
            }),
        state_hash: format!("{:016x}", m.world.state_hash()),
    };
    write_json(&out.join("summary.json"), &summary)?;
    Ok(summary)
}

/// One row of the scaling study.
#[derive(Debug, Clone, Serialize)]
pub struct ScalePoint {
    pub uav_count: usize,
    pub target_count: usize,
    pub steps: usize,
    pub detections: usize,
    pub mean_error: Option<f64>,
    /// Root mean square of the per-axis measurement errors.
    pub rms_axis_error: Option<f64>,
    pub sensor_sigma: f64,
    /// Standard deviation of the RMS estimate for this many samples.
    pub standard_error: Option<f64>,
    pub within_tolerance: bool,
    pub detection_rate: f64,
    pub avg_aoi: f64,
    pub energy_j: f64,
    /// Wall time per step; reported, never written to artifacts.
    #[serde(skip)]
    pub step_seconds: f64,
}

pub const SCALE_COLUMNS: &[&str] = &[
    "uav_count",
    "target_count",
    "steps",
    "detections",
    "mean_error",
    "rms_axis_error",
    "sensor_sigma",
    "standard_error",
    "within_tolerance",
    "detection_rate",
    "avg_aoi",
    "energy_j",
];

pub fn scale_point(config: &ScenarioConfig, count: usize) -> AppResult<ScalePoint> {
    let mut c = config.clone();
    c.uav_count = count;
    c.validate()?;
    let run = run_simulation(&c)?;
    let sigma = c.environment.sensor_noise_sigma;
    let samples = run.axis_errors.len();
    let rms = (samples > 0).then(|| (run.axis_errors.iter().map(|e| e * e).sum::<f64>() / samples as f64).sqrt());
    let se = (samples > 0).then(|| sigma / (2.0 * samples as f64).sqrt());
    let within = match (rms, se) {
        (Some(r), Some(s)) => (r - sigma).abs() <= 2.0 * s,
        _ => false,
    };
    let col = |name: &str| run.steps.numbers(name).unwrap_or_default();
    let rates = col("detection_rate");
    Ok(ScalePoint {
        uav_count: count,
        target_count: c.target_count,
        steps: c.episode_steps,
        detections: samples / 2,
        mean_error: (samples > 0)
            .then(|| run.axis_errors.chunks(2).map(|e| e[0].hypot(e[1])).sum::<f64>() / (samples / 2) as f64),
        rms_axis_error: rms,
        sensor_sigma: sigma,
        standard_error: se,
        within_tolerance: within,
        detection_rate: rates.iter().sum::<f64>() / rates.len().max(1) as f64,
        avg_aoi: col("avg_aoi").last().copied().unwrap_or(0.0),
        energy_j: col("energy_j").iter().sum(),
        step_seconds: run.step_seconds / c.episode_steps as f64,
    })
}

/// Evaluates every UAV count in parallel with the target count held fixed.
pub fn scale_sweep(config: &ScenarioConfig) -> AppResult<Vec<ScalePoint>> {
    config
        .scale_counts
        .par_iter()
        .map(|&n| scale_point(config, n))
        .collect()
}

pub fn write_scale_sweep(points: &[ScalePoint], out: &Path) -> AppResult<()> {
    let mut m = MetricsFrame::new(SCALE_COLUMNS);
    for p in points {
        m.push(vec![
            p.uav_count.into(),
            p.target_count.into(),
            p.steps.into(),
            p.detections.into(),
            p.mean_error.into(),
            p.rms_axis_error.into(),
            p.sensor_sigma.into(),
            p.standard_error.into(),
            (if p.within_tolerance { "true" } else { "false" }).into(),
            p.detection_rate.into(),
            p.avg_aoi.into(),
            p.energy_j.into(),
        ])?;
    }
    m.write_csv(&out.join("scale_sweep.csv"))
}
