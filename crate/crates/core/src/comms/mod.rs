//! Packet queuing, waveform selection, transmission service and
//! Age-of-Information accounting.

mod aoi;
pub mod bench;
mod queue;
mod uplink;

pub use aoi::{aoi_update, AoiTracker};
pub use queue::{serve_step, PacketQueue, ServeOutcome};
pub use uplink::{replay_gated_stream, GatingReport, StreamItem, Uplink, UplinkStats};

use serde::{Deserialize, Serialize};

use crate::config::CommsConfig;
use crate::trajectory::RelevanceScore;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Packet {
    pub id: u64,
    pub source_uav: usize,
    /// seconds
    pub gen_time: f64,
    pub size_bits: f64,
    pub relevance: RelevanceScore,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum QueueDiscipline {
    Fcfs,
    /// Last-come-first-served, a newcomer preempts the packet in service.
    LcfsS,
    /// Last-come-first-served, a newcomer only replaces the waiting packet.
    LcfsW,
    /// Waiting packets ordered by descending relevance distance.
    Priority,
}

impl QueueDiscipline {
    pub const ALL: [QueueDiscipline; 4] = [
        QueueDiscipline::Fcfs,
        QueueDiscipline::LcfsS,
        QueueDiscipline::LcfsW,
        QueueDiscipline::Priority,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            QueueDiscipline::Fcfs => "FCFS",
            QueueDiscipline::LcfsS => "LCFS_S",
            QueueDiscipline::LcfsW => "LCFS_W",
            QueueDiscipline::Priority => "PRIORITY",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum WaveformKind {
    HighThroughput,
    EnergySaving,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Waveform {
    pub kind: WaveformKind,
    /// bits/s
    pub rate: f64,
    /// watts
    pub power: f64,
}

impl Waveform {
    pub fn from_config(kind: WaveformKind, cfg: &CommsConfig) -> Self {
        let spec = match kind {
            WaveformKind::HighThroughput => cfg.high_throughput,
            WaveformKind::EnergySaving => cfg.energy_saving,
        };
        Waveform {
            kind,
            rate: spec.rate,
            power: spec.power,
        }
    }
}

/// High-throughput only when the data exceeds the novelty threshold.
pub fn select_waveform(score: &RelevanceScore, threshold: f64) -> WaveformKind {
    if score.distance > threshold {
        WaveformKind::HighThroughput
    } else {
        WaveformKind::EnergySaving
    }
}

/// Fraction of the nominal rate delivered at `snr` dB, linear between the
/// floor and the reference SNR.
pub fn success_factor(snr: f64, snr_floor: f64, snr_ref: f64) -> f64 {
    ((snr - snr_floor) / (snr_ref - snr_floor)).clamp(0.0, 1.0)
}
