use alloc::vec::Vec;

use serde::Serialize;

use super::{aoi_update, select_waveform, serve_step, success_factor, AoiTracker, Packet, PacketQueue, QueueDiscipline, ServeOutcome, Waveform, WaveformKind};
use crate::config::CommsConfig;
use crate::trajectory::RelevanceScore;
use crate::Result;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct UplinkStats {
    pub delivered: u64,
    pub bits: f64,
    /// joules
    pub energy: f64,
    pub deferred: u64,
    pub summaries: u64,
    /// Sub-threshold packets served while the high-throughput waveform was on.
    pub high_throughput_subthreshold: u64,
}

/// One UAV's link to the ground sink: the transmit queue, a deferred store
/// for sub-threshold data, and the sink-side age tracker.
#[derive(Debug, Clone)]
pub struct Uplink {
    pub queue: PacketQueue,
    deferred: Vec<Packet>,
    pub aoi: AoiTracker,
    pub stats: UplinkStats,
}

impl Uplink {
    pub fn new(discipline: QueueDiscipline, start: f64) -> Self {
        Uplink {
            queue: PacketQueue::new(discipline),
            deferred: Vec::new(),
            aoi: AoiTracker::new(start),
            stats: UplinkStats::default(),
        }
    }

    pub fn deferred_len(&self) -> usize {
        self.deferred.len()
    }

    /// Hands a packet to the link. With gating on, sub-threshold packets go
    /// to the deferred store instead of the queue.
    pub fn offer(&mut self, packet: Packet, gating: bool, now: f64) {
        if gating && !packet.relevance.is_novel {
            self.deferred.push(packet);
            self.stats.deferred += 1;
        } else {
            self.queue.enqueue(packet, now);
        }
    }

    /// Once the channel is idle and a full batch is waiting, the deferred
    /// packets are compressed into one summary packet and queued.
    fn flush_deferred(&mut self, cfg: &CommsConfig, now: f64) {
        if !self.queue.is_empty() || self.deferred.len() < cfg.deferred_batch {
            return;
        }
        let batch: Vec<Packet> = self.deferred.drain(..cfg.deferred_batch).collect();
        let newest = batch.iter().map(|p| p.gen_time).fold(f64::NEG_INFINITY, f64::max);
        let most_relevant = batch
            .iter()
            .map(|p| p.relevance)
            .fold(batch[0].relevance, |a, b| if b.distance > a.distance { b } else { a });
        let summary = Packet {
            id: batch[0].id,
            source_uav: batch[0].source_uav,
            gen_time: newest,
            size_bits: cfg.summary_bits,
            relevance: RelevanceScore {
                distance: most_relevant.distance,
                is_novel: false,
            },
        };
        self.stats.summaries += 1;
        self.queue.enqueue(summary, now);
    }

    /// Relevance-gated service: the waveform follows the head-of-line
    /// packet's score, and within a step only packets that select the same
    /// waveform share the capacity.
    pub fn step_gated(&mut self, cfg: &CommsConfig, snr: f64, threshold: f64, dt: f64, now: f64) -> Result<(ServeOutcome, Option<WaveformKind>)> {
        self.flush_deferred(cfg, now);
        let mut outcome = ServeOutcome::default();
        let mut used = None;
        if let Some(head) = self.queue.head().copied() {
            let kind = select_waveform(&head.relevance, threshold);
            let wf = Waveform::from_config(kind, cfg);
            if kind == WaveformKind::HighThroughput && head.relevance.distance <= threshold {
                self.stats.high_throughput_subthreshold += 1;
            }
            let capacity = wf.rate * dt * success_factor(snr, cfg.snr_floor, cfg.snr_ref);
            let (delivered, bits) = self
                .queue
                .serve_bits(capacity, now, |p| select_waveform(&p.relevance, threshold) == kind);
            outcome = ServeOutcome {
                delivered,
                energy: wf.power * dt,
                bits,
            };
            used = Some(kind);
        }
        self.record(&outcome);
        aoi_update(&mut self.aoi, &outcome.delivered, now, dt)?;
        Ok((outcome, used))
    }

    /// Policy-driven service with an explicit waveform and transmit gate.
    /// Only deliveries accepted by `refreshes` update the age tracker.
    pub fn step_manual(
        &mut self,
        kind: WaveformKind,
        transmit: bool,
        cfg: &CommsConfig,
        snr: f64,
        dt: f64,
        now: f64,
        refreshes: impl Fn(&Packet) -> bool,
    ) -> Result<ServeOutcome> {
        let outcome = if transmit {
            let wf = Waveform::from_config(kind, cfg);
            serve_step(&mut self.queue, &wf, snr, cfg.snr_floor, cfg.snr_ref, dt, now)
        } else {
            ServeOutcome::default()
        };
        self.record(&outcome);
        let fresh: Vec<Packet> = outcome.delivered.iter().copied().filter(|p| refreshes(p)).collect();
        aoi_update(&mut self.aoi, &fresh, now, dt)?;
        Ok(outcome)
    }

    fn record(&mut self, o: &ServeOutcome) {
        self.stats.delivered += o.delivered.len() as u64;
        self.stats.bits += o.bits;
        self.stats.energy += o.energy;
    }
}

/// One sensed-data report in a recorded stream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StreamItem {
    pub source_uav: usize,
    pub gen_time: f64,
    /// Fréchet distance to the closest reference, meters.
    pub distance: f64,
    pub size_bits: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct GatingReport {
    pub threshold: f64,
    pub transmitted_bits: f64,
    pub delivered: u64,
    pub novel_offered: u64,
    pub deferred_offered: u64,
    pub high_throughput_subthreshold: u64,
    /// joules
    pub energy: f64,
}

/// Replays a recorded stream (one entry per step, stamped with the step
/// time) through gated uplinks at `threshold`, then keeps serving for up to
/// `drain_steps` empty steps.
pub fn replay_gated_stream(
    steps: &[(f64, Vec<StreamItem>)],
    sources: usize,
    threshold: f64,
    cfg: &CommsConfig,
    discipline: QueueDiscipline,
    snr: f64,
    dt: f64,
    drain_steps: usize,
) -> Result<GatingReport> {
    let start = steps.first().map_or(0.0, |s| s.0 - dt).max(0.0);
    let mut links: Vec<Uplink> = (0..sources).map(|_| Uplink::new(discipline, start)).collect();
    let mut report = GatingReport {
        threshold,
        ..GatingReport::default()
    };
    let mut next_id = 0u64;
    let mut now = start;
    for (time, items) in steps {
        now = *time;
        for item in items {
            let relevance = RelevanceScore::classify(item.distance, threshold);
            if relevance.is_novel {
                report.novel_offered += 1;
            } else {
                report.deferred_offered += 1;
            }
            let packet = Packet {
                id: next_id,
                source_uav: item.source_uav,
                gen_time: item.gen_time,
                size_bits: item.size_bits,
                relevance,
            };
            next_id += 1;
            links[item.source_uav].offer(packet, true, now);
        }
        for link in &mut links {
            link.step_gated(cfg, snr, threshold, dt, now)?;
        }
    }
    for _ in 0..drain_steps {
        if links
            .iter()
            .all(|l| l.queue.is_empty() && l.deferred_len() < cfg.deferred_batch)
        {
            break;
        }
        now += dt;
        for link in &mut links {
            link.step_gated(cfg, snr, threshold, dt, now)?;
        }
    }
    for link in &links {
        report.transmitted_bits += link.stats.bits;
        report.delivered += link.stats.delivered;
        report.high_throughput_subthreshold += link.stats.high_throughput_subthreshold;
        report.energy += link.stats.energy;
    }
    Ok(report)
}
