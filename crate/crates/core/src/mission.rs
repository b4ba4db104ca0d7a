//! The per-step sensing-to-uplink pipeline shared by every command and
//! both operating modes: move, scan, track, cluster, score, queue, serve.

use alloc::vec::Vec;

use serde::Serialize;

use crate::clustering::{cluster_report, k_medoids, pairwise_frechet, ClusterSummary};
use crate::comms::{Packet, Uplink, WaveformKind};
use crate::config::ScenarioConfig;
use crate::rng::mix_seed;
use crate::sensing::{scan_all, sensing_pipeline, Detection, TrackStore};
use crate::trajectory::{resample_uniform, ReferenceSet, RelevanceScore, Trajectory};
use crate::world::{init_episode, MotionCommand, World};
use crate::{Error, Result};

/// Explicit per-UAV transmission choice, used when a policy drives the link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CommsDecision {
    pub waveform: WaveformKind,
    pub transmit: bool,
    /// Relevance (1) versus freshness (0) ordering of a PRIORITY queue.
    pub priority_weight: f64,
}

#[derive(Debug, Clone, Copy)]
pub enum CommsControl<'a> {
    /// No packets are produced or served.
    Off,
    /// Relevance-gated automatic waveform selection.
    Gated,
    Manual(&'a [CommsDecision]),
}

/// What happened to one UAV during a step.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct UavEvents {
    pub detections: Vec<Detection>,
    pub offered: Vec<Packet>,
    pub delivered: Vec<Packet>,
    pub bits: f64,
    /// Transmission energy, joules.
    pub comm_energy: f64,
    pub dropped: u64,
    /// Mean sink-side age over the step, seconds.
    pub mean_age: f64,
    pub waveform: Option<WaveformKind>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct StepEvents {
    pub step: usize,
    pub time: f64,
    pub uavs: Vec<UavEvents>,
    pub reclustered: bool,
}

impl StepEvents {
    pub fn detections(&self) -> usize {
        self.uavs.iter().map(|u| u.detections.len()).sum()
    }

    pub fn deliveries(&self) -> usize {
        self.uavs.iter().map(|u| u.delivered.len()).sum()
    }

    pub fn drops(&self) -> u64 {
        self.uavs.iter().map(|u| u.dropped).sum()
    }

    pub fn comm_energy(&self) -> f64 {
        self.uavs.iter().map(|u| u.comm_energy).sum()
    }
}

#[derive(Debug, Clone)]
pub struct Mission {
    pub config: ScenarioConfig,
    pub world: World,
    /// One track store per UAV.
    pub tracks: Vec<TrackStore>,
    /// Medoids of the latest clustering pass.
    pub references: ReferenceSet,
    /// Cluster report of the latest clustering pass.
    pub picture: Vec<ClusterSummary>,
    pub uplinks: Vec<Uplink>,
    next_packet_id: u64,
}

impl Mission {
    pub fn new(config: &ScenarioConfig, episode: u64) -> Result<Self> {
        let world = init_episode(config, episode)?;
        let n = world.uavs.len();
        Ok(Mission {
            config: config.clone(),
            world,
            tracks: (0..n).map(|_| TrackStore::new()).collect(),
            references: ReferenceSet::default(),
            picture: Vec::new(),
            uplinks: (0..n).map(|_| Uplink::new(config.discipline, 0.0)).collect(),
            next_packet_id: 0,
        })
    }

    pub fn uav_count(&self) -> usize {
        self.world.uavs.len()
    }

    /// Trailing windows of the most recently updated scoreable tracks.
    fn cluster_inputs(&self) -> Vec<Trajectory> {
        let t = &self.config.tracking;
        let mut eligible: Vec<(f64, usize, u64, &Trajectory)> = self
            .tracks
            .iter()
            .enumerate()
            .flat_map(|(u, store)| {
                store
                    .tracks()
                    .iter()
                    .filter(|tr| tr.points.len() >= t.min_points)
                    .map(move |tr| (tr.last_update, u, tr.track_id, &tr.points))
            })
            .collect();
        eligible.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        eligible.truncate(self.config.max_cluster_tracks);
        eligible.into_iter().map(|e| e.3.tail(t.window_points)).collect()
    }

    /// Clusters the current tracks and replaces the reference patterns with
    /// the medoids. Returns false when there is nothing to cluster.
    pub fn refresh_picture(&mut self) -> Result<bool> {
        let windows = self.cluster_inputs();
        if windows.is_empty() {
            return Ok(false);
        }
        let n = self.config.comparison_length;
        let resampled = windows
            .iter()
            .map(|w| if w.len() >= 2 { resample_uniform(w, n) } else { Ok(w.clone()) })
            .collect::<Result<Vec<_>>>()?;
        let matrix = pairwise_frechet(&resampled)?;
        let k = self.config.cluster_k.min(windows.len());
        let clustering = k_medoids(&matrix, k, mix_seed(self.config.seed, self.world.steps as u64))?;
        self.picture = cluster_report(&clustering, &windows)?;
        let medoids: Vec<Trajectory> = clustering.medoids.iter().map(|&m| resampled[m].clone()).collect();
        self.references = ReferenceSet::new(&medoids, n)?;
        Ok(true)
    }

    fn is_redundant(&self, score: &RelevanceScore) -> bool {
        score.distance <= self.config.rewards.redundant_fraction * self.config.frechet_threshold
    }

    /// Advances the mission by one step.
    pub fn step(&mut self, commands: &[MotionCommand], comms: CommsControl<'_>) -> Result<StepEvents> {
        let n = self.uav_count();
        if let CommsControl::Manual(d) = comms {
            if d.len() != n {
                return Err(Error::InvalidAction(alloc::format!("{} comms decisions for {n} UAVs", d.len())));
            }
        }
        self.world.advance(commands)?;
        let now = self.world.time;
        let dt = self.world.dt;
        let detections = scan_all(&mut self.world);
        for (store, dets) in self.tracks.iter_mut().zip(&detections) {
            store.update(dets, &self.config.tracking, now);
        }
        let due = self.world.steps % self.config.recluster_every == 0;
        let reclustered = if due || self.references.is_empty() {
            self.refresh_picture()?
        } else {
            false
        };

        let mut events = StepEvents {
            step: self.world.steps,
            time: now,
            uavs: detections
                .into_iter()
                .map(|d| UavEvents {
                    detections: d,
                    ..UavEvents::default()
                })
                .collect(),
            reclustered,
        };
        if matches!(comms, CommsControl::Off) {
            return Ok(events);
        }

        let cfg = &self.config;
        let theta = cfg.frechet_threshold;
        for u in 0..n {
            let store = &mut self.tracks[u];
            let ranked = sensing_pipeline(
                store.tracks(),
                &self.references,
                theta,
                cfg.tracking.min_points,
                cfg.tracking.window_points,
            )?;
            for (i, score) in ranked {
                let tr = &mut store.tracks_mut()[i];
                tr.relevance = Some(score);
                if tr.points.len() >= tr.reported_len + cfg.comms.report_every {
                    tr.reported_len = tr.points.len();
                    events.uavs[u].offered.push(Packet {
                        id: self.next_packet_id,
                        source_uav: u,
                        gen_time: now,
                        size_bits: cfg.comms.packet_bits,
                        relevance: score,
                    });
                    self.next_packet_id += 1;
                }
            }
        }

        let snr = self.world.snr();
        for u in 0..n {
            let active = self.world.uavs[u].active;
            let link = &mut self.uplinks[u];
            let dropped_before = link.queue.dropped();
            let age_before = link.aoi.age_integral();
            let ev = &mut events.uavs[u];
            let manual = match comms {
                CommsControl::Manual(d) => Some(d[u]),
                _ => None,
            };
            for p in &ev.offered {
                link.offer(*p, manual.is_none() && self.config.comms.gating, now);
            }
            let outcome = match manual {
                None if active => {
                    let (o, kind) = link.step_gated(&self.config.comms, snr, theta, dt, now)?;
                    ev.waveform = kind;
                    o
                }
                _ => {
                    let d = manual.unwrap_or(CommsDecision {
                        waveform: WaveformKind::EnergySaving,
                        transmit: false,
                        priority_weight: 1.0,
                    });
                    link.queue.set_priority_weight(d.priority_weight);
                    let transmit = d.transmit && active && !link.queue.is_empty();
                    if transmit {
                        ev.waveform = Some(d.waveform);
                    }
                    let floor = self.config.rewards.redundant_fraction * theta;
                    link.step_manual(d.waveform, transmit, &self.config.comms, snr, dt, now, |p| {
                        p.relevance.distance > floor
                    })?
                }
            };
            ev.delivered = outcome.delivered;
            ev.bits = outcome.bits;
            ev.comm_energy = outcome.energy;
            ev.dropped = link.queue.dropped() - dropped_before;
            ev.mean_age = (link.aoi.age_integral() - age_before) / dt;
            self.world.drain(u, outcome.energy);
        }
        Ok(events)
    }

    /// True when a delivered packet carries data the sink already has.
    pub fn redundant(&self, p: &Packet) -> bool {
        self.is_redundant(&p.relevance)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn follow(m: &Mission) -> Vec<MotionCommand> {
        m.world.uavs.iter().map(|u| MotionCommand::FollowPath(u.assigned_path)).collect()
    }

    #[test]
    fn gated_mission_produces_traffic_and_references() {
        let mut m = Mission::new(&ScenarioConfig::default(), 0).unwrap();
        let (mut dets, mut offered, mut delivered) = (0, 0, 0);
        for _ in 0..120 {
            let c = follow(&m);
            let e = m.step(&c, CommsControl::Gated).unwrap();
            dets += e.detections();
            offered += e.uavs.iter().map(|u| u.offered.len()).sum::<usize>();
            delivered += e.deliveries();
        }
        assert!(dets > 0 && offered > 0 && delivered > 0, "{dets} {offered} {delivered}");
        assert!(!m.references.is_empty());
        assert!(!m.picture.is_empty());
    }

    #[test]
    fn identical_missions_replay_identically() {
        let run = || {
            let mut m = Mission::new(&ScenarioConfig::default(), 3).unwrap();
            let mut trace = Vec::new();
            for _ in 0..60 {
                let c = follow(&m);
                trace.push(m.step(&c, CommsControl::Gated).unwrap());
            }
            (trace, m.world.state_hash())
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn manual_hold_never_transmits() {
        let mut m = Mission::new(&ScenarioConfig::default(), 0).unwrap();
        let hold = vec![
            CommsDecision {
                waveform: WaveformKind::HighThroughput,
                transmit: false,
                priority_weight: 1.0,
            };
            3
        ];
        for _ in 0..40 {
            let c = follow(&m);
            let e = m.step(&c, CommsControl::Manual(&hold)).unwrap();
            assert_eq!(e.deliveries(), 0);
            assert_eq!(e.comm_energy(), 0.0);
        }
        assert!(m.step(&follow(&m), CommsControl::Manual(&hold[..1])).is_err());
    }
}
