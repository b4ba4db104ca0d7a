//! Duty-cycled radar detection, nearest-neighbour tracking and relevance
//! ranking of tracks.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::clustering::ClusterSummary;
use crate::config::{RadarConfig, TrackingConfig};
use crate::trajectory::{Point, ReferenceSet, RelevanceScore, Trajectory};
use crate::world::{SensingPath, Uav, World};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadarState {
    /// seconds
    pub pri: f64,
    pub active_fraction: f64,
    /// meters
    pub range_max: f64,
    /// Seconds into the current PRI.
    pub phase: f64,
    /// dB
    pub snr_floor: f64,
    pub false_alarm_rate: f64,
}

impl RadarState {
    pub fn new(cfg: &RadarConfig) -> Self {
        RadarState {
            pri: cfg.pri,
            active_fraction: cfg.active_fraction,
            range_max: cfg.range_max,
            phase: 0.0,
            snr_floor: cfg.snr_floor,
            false_alarm_rate: cfg.false_alarm_rate,
        }
    }

    /// Emitting during the first `active_fraction` of each PRI, silent after.
    pub fn is_active(&self) -> bool {
        self.phase < self.active_fraction * self.pri
    }

    pub fn advance(&mut self, dt: f64) {
        self.phase = libm::fmod(self.phase + dt, self.pri);
    }

    /// Detection-probability multiplier at `snr` dB, 1 at `snr_base`.
    pub fn snr_factor(&self, snr: f64, snr_base: f64) -> f64 {
        ((snr - self.snr_floor) / (snr_base - self.snr_floor)).clamp(0.0, 1.0)
    }
}

/// Quadratic range falloff scaled by the SNR factor.
pub fn detection_probability(range: f64, range_max: f64, snr_factor: f64) -> f64 {
    let q = range / range_max;
    (1.0 - q * q).clamp(0.0, 1.0) * snr_factor
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Detection {
    pub uav_id: usize,
    /// Ground truth for scoring and logs; `None` for a false alarm. Never
    /// part of a policy observation.
    pub target_id: Option<usize>,
    pub measured: Point,
    pub truth: Point,
    /// dB
    pub snr: f64,
    /// seconds
    pub time: f64,
}

/// One scan of the UAV's radar over the current world state.
pub fn radar_scan<R: Rng + ?Sized>(uav: &Uav, world: &World, rng: &mut R) -> Vec<Detection> {
    let mut out = Vec::new();
    if !uav.active || !uav.radar.is_active() {
        return out;
    }
    let radar = &uav.radar;
    let snr = world.snr();
    let factor = radar.snr_factor(snr, world.env.snr_base);
    let sigma = world.env.sensor_noise_sigma;
    let now = world.time;
    for target in &world.targets {
        let range = uav.position.dist(&target.position);
        if range > radar.range_max {
            continue;
        }
        if rng.random::<f64>() < detection_probability(range, radar.range_max, factor) {
            let nx: f64 = StandardNormal.sample(rng);
            let ny: f64 = StandardNormal.sample(rng);
            out.push(Detection {
                uav_id: uav.id,
                target_id: Some(target.id),
                measured: Point::new(target.position.x + sigma * nx, target.position.y + sigma * ny, now),
                truth: target.position,
                snr,
                time: now,
            });
        }
    }
    if radar.false_alarm_rate > 0.0 && rng.random::<f64>() < radar.false_alarm_rate {
        let r = radar.range_max * libm::sqrt(rng.random::<f64>());
        let a = rng.random::<f64>() * core::f64::consts::TAU;
        let arena = world.env.arena;
        let x = (uav.position.x + r * libm::cos(a)).clamp(0.0, arena.width);
        let y = (uav.position.y + r * libm::sin(a)).clamp(0.0, arena.height);
        let p = Point::new(x, y, now);
        out.push(Detection {
            uav_id: uav.id,
            target_id: None,
            measured: p,
            truth: p,
            snr,
            time: now,
        });
    }
    out
}

/// Scans every UAV with its own noise stream.
pub fn scan_all(world: &mut World) -> Vec<Vec<Detection>> {
    let mut rngs = core::mem::take(&mut world.scan_rngs);
    let out = world
        .uavs
        .iter()
        .zip(rngs.iter_mut())
        .map(|(u, r)| radar_scan(u, world, r))
        .collect();
    world.scan_rngs = rngs;
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Track {
    pub track_id: u64,
    pub points: Trajectory,
    /// seconds
    pub last_update: f64,
    pub relevance: Option<RelevanceScore>,
    /// Track length when it was last reported over the uplink.
    pub reported_len: usize,
}

/// Per-UAV track store with nearest-neighbour association.
#[derive(Debug, Clone, Default)]
pub struct TrackStore {
    tracks: Vec<Track>,
    next_id: u64,
}

impl TrackStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Tracks in ascending `track_id` order.
    pub fn tracks(&self) -> &[Track] {
        &self.tracks
    }

    pub fn tracks_mut(&mut self) -> &mut [Track] {
        &mut self.tracks
    }

    pub fn len(&self) -> usize {
        self.tracks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tracks.is_empty()
    }

    /// Associates `detections` in order and then retires stale tracks.
    /// Returns the track id each detection went to.
    pub fn update(&mut self, detections: &[Detection], params: &TrackingConfig, now: f64) -> Vec<u64> {
        let mut assigned = Vec::with_capacity(detections.len());
        for d in detections {
            let mut best: Option<(usize, f64)> = None;
            for (i, tr) in self.tracks.iter().enumerate() {
                // One point per track per scan instant.
                if tr.last_update >= d.time {
                    continue;
                }
                let dist = tr.points.last().dist(&d.measured);
                if dist <= params.gate_radius && best.is_none_or(|(_, b)| dist < b) {
                    best = Some((i, dist));
                }
            }
            match best {
                Some((i, _)) => {
                    let tr = &mut self.tracks[i];
                    tr.points.points_mut().push(d.measured);
                    tr.last_update = d.time;
                    assigned.push(tr.track_id);
                }
                None => {
                    let id = self.next_id;
                    self.next_id += 1;
                    self.tracks.push(Track {
                        track_id: id,
                        points: Trajectory::from_points_unchecked(alloc::vec![d.measured]),
                        last_update: d.time,
                        relevance: None,
                        reported_len: 0,
                    });
                    assigned.push(id);
                }
            }
        }
        self.tracks.retain(|t| now - t.last_update <= params.stale_after);
        assigned
    }
}

/// Functional form of [`TrackStore::update`].
pub fn update_tracks(mut store: TrackStore, detections: &[Detection], params: &TrackingConfig, now: f64) -> TrackStore {
    store.update(detections, params, now);
    store
}

/// Scores every track with at least `min_points` points (using its
/// trailing `window` points) and ranks them most novel first. Entries are
/// indices into `tracks`; equal distances keep ascending track order.
pub fn sensing_pipeline(
    tracks: &[Track],
    references: &ReferenceSet,
    threshold: f64,
    min_points: usize,
    window: usize,
) -> Result<Vec<(usize, RelevanceScore)>> {
    let mut out = Vec::new();
    for (i, tr) in tracks.iter().enumerate() {
        if tr.points.len() < min_points {
            continue;
        }
        let score = if references.is_empty() {
            RelevanceScore::unreferenced()
        } else {
            references.score(&tr.points.tail(window), threshold)?
        };
        out.push((i, score));
    }
    out.sort_by(|a, b| b.1.distance.total_cmp(&a.1.distance).then(a.0.cmp(&b.0)));
    Ok(out)
}

/// Path whose nearest waypoint lies closest to the largest cluster's
/// centroid. The largest cluster is the lowest-numbered among equals and
/// an empty picture falls back to path 0.
pub fn plan_sensing_path(report: &[ClusterSummary], paths: &[SensingPath]) -> usize {
    let Some(largest) = report
        .iter()
        .filter(|c| c.size > 0)
        .fold(None::<&ClusterSummary>, |best, c| match best {
            Some(b) if b.size > c.size || (b.size == c.size && b.cluster <= c.cluster) => Some(b),
            _ => Some(c),
        })
    else {
        return 0;
    };
    let mut best = (0, f64::INFINITY);
    for (p, path) in paths.iter().enumerate() {
        let d = path.nearest_waypoint(largest.centroid.x, largest.centroid.y).1;
        if d < best.1 {
            best = (p, d);
        }
    }
    best.0
}
