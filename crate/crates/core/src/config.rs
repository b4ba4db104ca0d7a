//! Declarative experiment description.
//!
//! Every section rejects unknown keys so a misspelled field fails before a
//! run starts. Defaults reproduce the reference setting: 3 UAVs, 2000
//! episodes of 200 steps, hidden layers 128-256-128, learning rates
//! 0.01 / 0.001 and discounts 0.95 / 0.99.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::comms::QueueDiscipline;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub uav_count: usize,
    pub target_count: usize,
    /// Relative weights of the target classes.
    pub target_mix: TargetMix,
    /// Number of spatial concentrations targets are spawned around.
    pub target_groups: usize,
    /// Standard deviation of spawn positions around a group center, meters.
    pub group_spread: f64,
    pub arena: Arena,
    /// Seconds per step.
    pub dt: f64,
    pub episode_steps: usize,
    pub episodes: usize,
    /// Fréchet novelty threshold, meters.
    pub frechet_threshold: f64,
    pub comparison_length: usize,
    pub cluster_k: usize,
    /// Steps between clustering passes that refresh reference patterns.
    pub recluster_every: usize,
    /// Most recently updated tracks fed to a clustering pass.
    pub max_cluster_tracks: usize,
    pub discipline: QueueDiscipline,
    pub motion: MotionConfig,
    pub uav: UavConfig,
    pub radar: RadarConfig,
    pub environment: EnvironmentConfig,
    pub tracking: TrackingConfig,
    pub comms: CommsConfig,
    pub rewards: RewardConfig,
    pub learning: LearningConfig,
    pub controller: ControllerConfig,
    pub aoi_bench: AoiBenchConfig,
    /// UAV counts visited by the scaling study.
    pub scale_counts: Vec<usize>,
    /// Every n-th training episode is written to the step log.
    pub episode_log_every: usize,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            seed: 7,
            uav_count: 3,
            target_count: 12,
            target_mix: TargetMix::default(),
            target_groups: 3,
            group_spread: 60.0,
            arena: Arena::default(),
            dt: 0.5,
            episode_steps: 200,
            episodes: 2000,
            frechet_threshold: 20.0,
            comparison_length: crate::trajectory::DEFAULT_COMPARISON_LENGTH,
            cluster_k: 3,
            recluster_every: 20,
            max_cluster_tracks: 48,
            discipline: QueueDiscipline::Priority,
            motion: MotionConfig::default(),
            uav: UavConfig::default(),
            radar: RadarConfig::default(),
            environment: EnvironmentConfig::default(),
            tracking: TrackingConfig::default(),
            comms: CommsConfig::default(),
            rewards: RewardConfig::default(),
            learning: LearningConfig::default(),
            controller: ControllerConfig::default(),
            aoi_bench: AoiBenchConfig::default(),
            scale_counts: vec![3, 10, 20, 30],
            episode_log_every: 100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TargetMix {
    pub slow: f64,
    pub fast: f64,
    pub erratic: f64,
}

impl Default for TargetMix {
    fn default() -> Self {
        TargetMix {
            slow: 0.3,
            fast: 0.5,
            erratic: 0.2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Arena {
    pub width: f64,
    pub height: f64,
}

impl Default for Arena {
    fn default() -> Self {
        Arena {
            width: 1000.0,
            height: 1000.0,
        }
    }
}

/// Per-class target dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassMotion {
    /// Per-step, per-axis velocity perturbation, m/s.
    pub sigma: f64,
    /// m/s
    pub speed_cap: f64,
    /// Probability per step of drawing a fresh heading.
    pub heading_resample: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MotionConfig {
    pub slow: ClassMotion,
    pub fast: ClassMotion,
    pub erratic: ClassMotion,
}

impl Default for MotionConfig {
    fn default() -> Self {
        MotionConfig {
            slow: ClassMotion {
                sigma: 0.1,
                speed_cap: 2.0,
                heading_resample: 0.0,
            },
            fast: ClassMotion {
                sigma: 0.5,
                speed_cap: 12.0,
                heading_resample: 0.0,
            },
            erratic: ClassMotion {
                sigma: 0.3,
                speed_cap: 8.0,
                heading_resample: 0.1,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UavConfig {
    /// m/s
    pub cruise_speed: f64,
    /// joules
    pub battery: f64,
    /// watts
    pub idle_power: f64,
    pub cruise_power: f64,
    pub radar_power: f64,
}

impl Default for UavConfig {
    fn default() -> Self {
        UavConfig {
            cruise_speed: 15.0,
            battery: 20_000.0,
            idle_power: 5.0,
            cruise_power: 120.0,
            radar_power: 30.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RadarConfig {
    /// Pulse repetition interval, seconds.
    pub pri: f64,
    /// Fraction of each PRI spent emitting.
    pub active_fraction: f64,
    /// meters
    pub range_max: f64,
    /// SNR at which detection becomes impossible, dB.
    pub snr_floor: f64,
    /// Probability per active scan of a spurious detection.
    pub false_alarm_rate: f64,
}

impl Default for RadarConfig {
    fn default() -> Self {
        RadarConfig {
            pri: 2.0,
            active_fraction: 0.75,
            range_max: 200.0,
            snr_floor: 0.0,
            false_alarm_rate: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnvironmentConfig {
    /// Per-axis measurement noise, meters.
    pub sensor_noise_sigma: f64,
    /// dB
    pub snr_base: f64,
    /// SNR loss from adverse weather, dB.
    pub snr_weather_penalty: f64,
}

impl Default for EnvironmentConfig {
    fn default() -> Self {
        EnvironmentConfig {
            sensor_noise_sigma: 3.0,
            snr_base: 20.0,
            snr_weather_penalty: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrackingConfig {
    /// Association gate, meters.
    pub gate_radius: f64,
    /// Tracks without updates for longer than this are retired, seconds.
    pub stale_after: f64,
    /// Tracks shorter than this are not scored.
    pub min_points: usize,
    /// Trailing points of a track used for clustering and scoring.
    pub window_points: usize,
}

impl Default for TrackingConfig {
    fn default() -> Self {
        TrackingConfig {
            gate_radius: 25.0,
            stale_after: 5.0,
            min_points: 4,
            window_points: 16,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveformSpec {
    /// bits/s
    pub rate: f64,
    /// watts
    pub power: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CommsConfig {
    pub high_throughput: WaveformSpec,
    pub energy_saving: WaveformSpec,
    /// dB
    pub snr_floor: f64,
    pub snr_ref: f64,
    /// Size of one sensed-data packet, bits.
    pub packet_bits: f64,
    /// Steps between packet reports per track.
    pub report_every: usize,
    /// Defer sub-threshold packets instead of queueing them directly.
    pub gating: bool,
    /// Deferred packets are flushed once this many accumulate.
    pub deferred_batch: usize,
    /// Size of the summary packet a deferred batch is compressed into, bits.
    pub summary_bits: f64,
}

impl Default for CommsConfig {
    fn default() -> Self {
        CommsConfig {
            high_throughput: WaveformSpec {
                rate: 10.0e6,
                power: 15.0,
            },
            energy_saving: WaveformSpec {
                rate: 2.0e6,
                power: 4.0,
            },
            snr_floor: 0.0,
            snr_ref: 20.0,
            packet_bits: 2.0e6,
            report_every: 2,
            gating: true,
            deferred_batch: 4,
            summary_bits: 1.0e6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RewardConfig {
    /// Detection latency budget, steps.
    pub latency_steps: usize,
    /// An owned target not re-detected by its owner for this many steps
    /// can be acquired again.
    pub reacquire_steps: usize,
    pub duplicate_penalty: f64,
    pub time_cost: f64,
    /// Weight of the team-mean reward added in the cooperative variant.
    pub coop_blend: f64,
    pub first_detection: f64,
    pub novel_delivery: f64,
    pub subthreshold_delivery: f64,
    pub redundant_penalty: f64,
    /// Packets with distance <= this fraction of the threshold are redundant.
    pub redundant_fraction: f64,
    /// joules
    pub energy_norm: f64,
    /// seconds
    pub aoi_norm: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        RewardConfig {
            latency_steps: 10,
            reacquire_steps: 20,
            duplicate_penalty: 0.1,
            time_cost: 0.01,
            coop_blend: 0.5,
            first_detection: 1.0,
            novel_delivery: 1.0,
            subthreshold_delivery: 0.2,
            redundant_penalty: 0.5,
            redundant_fraction: 0.25,
            energy_norm: 50.0,
            aoi_norm: 20.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LearningConfig {
    pub hidden: Vec<usize>,
    pub lr_dqn: f64,
    pub lr_maddpg: f64,
    pub gamma_dqn: f64,
    pub gamma_maddpg: f64,
    pub replay_capacity: usize,
    pub batch_size: usize,
    /// Environment steps between gradient updates.
    pub train_every: usize,
    /// DQN updates between hard target syncs.
    pub dqn_target_sync: usize,
    pub tau: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Fraction of the episodes over which epsilon decays linearly.
    pub epsilon_decay_fraction: f64,
    pub noise_sigma: f64,
    /// Per-episode multiplicative decay of the exploration noise.
    pub noise_decay: f64,
    /// Past actions included in the communication-mode observation.
    pub action_history: usize,
}

impl Default for LearningConfig {
    fn default() -> Self {
        LearningConfig {
            hidden: vec![128, 256, 128],
            lr_dqn: 0.01,
            lr_maddpg: 0.001,
            gamma_dqn: 0.95,
            gamma_maddpg: 0.99,
            replay_capacity: 50_000,
            batch_size: 64,
            train_every: 1,
            dqn_target_sync: 100,
            tau: 0.01,
            epsilon_start: 1.0,
            epsilon_end: 0.05,
            epsilon_decay_fraction: 0.5,
            noise_sigma: 0.2,
            noise_decay: 0.999,
            action_history: 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControllerConfig {
    pub window: usize,
    pub redundancy_threshold: f64,
    pub hysteresis: f64,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        ControllerConfig {
            window: 20,
            redundancy_threshold: 0.5,
            hysteresis: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AoiBenchConfig {
    /// Arrival rates swept by the benchmark, 1/s.
    pub lambdas: Vec<f64>,
    /// Service rate, 1/s.
    pub mu: f64,
    /// Simulated seconds per point.
    pub horizon: f64,
}

impl Default for AoiBenchConfig {
    fn default() -> Self {
        AoiBenchConfig {
            lambdas: vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9],
            mu: 1.0,
            horizon: 1.0e6,
        }
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::config(field, "must be positive and finite"))
    }
}

fn non_negative(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::config(field, "must be non-negative and finite"))
    }
}

fn fraction(field: &str, v: f64, lo_open: bool, hi_closed: bool) -> Result<()> {
    let lo_ok = if lo_open { v > 0.0 } else { v >= 0.0 };
    let hi_ok = if hi_closed { v <= 1.0 } else { v < 1.0 };
    if v.is_finite() && lo_ok && hi_ok {
        Ok(())
    } else {
        Err(Error::config(field, "is outside its allowed unit interval"))
    }
}

fn at_least(field: &str, v: usize, min: usize) -> Result<()> {
    if v >= min {
        Ok(())
    } else {
        Err(Error::config(field, alloc::format!("must be at least {min}")))
    }
}

impl ScenarioConfig {
    /// Checks every constraint, naming the first offending field.
    pub fn validate(&self) -> Result<()> {
        at_least("uav_count", self.uav_count, 1)?;
        at_least("target_count", self.target_count, 1)?;
        let mix = self.target_mix;
        for (name, w) in [
            ("target_mix.slow", mix.slow),
            ("target_mix.fast", mix.fast),
            ("target_mix.erratic", mix.erratic),
        ] {
            non_negative(name, w)?;
        }
        if mix.slow + mix.fast + mix.erratic <= 0.0 {
            return Err(Error::config("target_mix", "weights must not all be zero"));
        }
        at_least("target_groups", self.target_groups, 1)?;
        non_negative("group_spread", self.group_spread)?;
        positive("arena.width", self.arena.width)?;
        positive("arena.height", self.arena.height)?;
        positive("dt", self.dt)?;
        at_least("episode_steps", self.episode_steps, 1)?;
        at_least("episodes", self.episodes, 1)?;
        positive("frechet_threshold", self.frechet_threshold)?;
        at_least("comparison_length", self.comparison_length, 2)?;
        at_least("cluster_k", self.cluster_k, 1)?;
        at_least("recluster_every", self.recluster_every, 1)?;
        at_least("max_cluster_tracks", self.max_cluster_tracks, 1)?;
        for (name, m) in [
            ("motion.slow", self.motion.slow),
            ("motion.fast", self.motion.fast),
            ("motion.erratic", self.motion.erratic),
        ] {
            non_negative(&alloc::format!("{name}.sigma"), m.sigma)?;
            non_negative(&alloc::format!("{name}.speed_cap"), m.speed_cap)?;
            fraction(&alloc::format!("{name}.heading_resample"), m.heading_resample, false, true)?;
        }
        let u = &self.uav;
        positive("uav.cruise_speed", u.cruise_speed)?;
        positive("uav.battery", u.battery)?;
        non_negative("uav.idle_power", u.idle_power)?;
        non_negative("uav.cruise_power", u.cruise_power)?;
        non_negative("uav.radar_power", u.radar_power)?;
        let r = &self.radar;
        positive("radar.pri", r.pri)?;
        fraction("radar.active_fraction", r.active_fraction, true, true)?;
        positive("radar.range_max", r.range_max)?;
        if !r.snr_floor.is_finite() || r.snr_floor >= self.environment.snr_base {
            return Err(Error::config("radar.snr_floor", "must be below environment.snr_base"));
        }
        fraction("radar.false_alarm_rate", r.false_alarm_rate, false, true)?;
        let e = &self.environment;
        non_negative("environment.sensor_noise_sigma", e.sensor_noise_sigma)?;
        if !e.snr_base.is_finite() {
            return Err(Error::config("environment.snr_base", "must be finite"));
        }
        non_negative("environment.snr_weather_penalty", e.snr_weather_penalty)?;
        let t = &self.tracking;
        positive("tracking.gate_radius", t.gate_radius)?;
        positive("tracking.stale_after", t.stale_after)?;
        at_least("tracking.min_points", t.min_points, 1)?;
        at_least("tracking.window_points", t.window_points, 2)?;
        let c = &self.comms;
        positive("comms.high_throughput.rate", c.high_throughput.rate)?;
        positive("comms.high_throughput.power", c.high_throughput.power)?;
        positive("comms.energy_saving.rate", c.energy_saving.rate)?;
        positive("comms.energy_saving.power", c.energy_saving.power)?;
        if c.high_throughput.rate <= c.energy_saving.rate {
            return Err(Error::config(
                "comms.high_throughput.rate",
                "must exceed comms.energy_saving.rate",
            ));
        }
        if c.high_throughput.power <= c.energy_saving.power {
            return Err(Error::config(
                "comms.high_throughput.power",
                "must exceed comms.energy_saving.power",
            ));
        }
        if !(c.snr_ref.is_finite() && c.snr_floor.is_finite() && c.snr_ref > c.snr_floor) {
            return Err(Error::config("comms.snr_ref", "must exceed comms.snr_floor"));
        }
        positive("comms.packet_bits", c.packet_bits)?;
        at_least("comms.report_every", c.report_every, 1)?;
        at_least("comms.deferred_batch", c.deferred_batch, 1)?;
        positive("comms.summary_bits", c.summary_bits)?;
        let w = &self.rewards;
        at_least("rewards.latency_steps", w.latency_steps, 1)?;
        at_least("rewards.reacquire_steps", w.reacquire_steps, 1)?;
        non_negative("rewards.duplicate_penalty", w.duplicate_penalty)?;
        non_negative("rewards.time_cost", w.time_cost)?;
        non_negative("rewards.coop_blend", w.coop_blend)?;
        non_negative("rewards.first_detection", w.first_detection)?;
        non_negative("rewards.novel_delivery", w.novel_delivery)?;
        non_negative("rewards.subthreshold_delivery", w.subthreshold_delivery)?;
        non_negative("rewards.redundant_penalty", w.redundant_penalty)?;
        fraction("rewards.redundant_fraction", w.redundant_fraction, false, true)?;
        positive("rewards.energy_norm", w.energy_norm)?;
        positive("rewards.aoi_norm", w.aoi_norm)?;
        let l = &self.learning;
        if l.hidden.is_empty() || l.hidden.contains(&0) {
            return Err(Error::config("learning.hidden", "needs at least one non-empty layer"));
        }
        positive("learning.lr_dqn", l.lr_dqn)?;
        positive("learning.lr_maddpg", l.lr_maddpg)?;
        fraction("learning.gamma_dqn", l.gamma_dqn, false, false)?;
        fraction("learning.gamma_maddpg", l.gamma_maddpg, false, false)?;
        at_least("learning.batch_size", l.batch_size, 1)?;
        at_least("learning.replay_capacity", l.replay_capacity, l.batch_size)?;
        at_least("learning.train_every", l.train_every, 1)?;
        at_least("learning.dqn_target_sync", l.dqn_target_sync, 1)?;
        fraction("learning.tau", l.tau, true, true)?;
        fraction("learning.epsilon_start", l.epsilon_start, false, true)?;
        fraction("learning.epsilon_end", l.epsilon_end, false, true)?;
        if l.epsilon_end > l.epsilon_start {
            return Err(Error::config("learning.epsilon_end", "must not exceed epsilon_start"));
        }
        fraction("learning.epsilon_decay_fraction", l.epsilon_decay_fraction, true, true)?;
        non_negative("learning.noise_sigma", l.noise_sigma)?;
        fraction("learning.noise_decay", l.noise_decay, true, true)?;
        let k = &self.controller;
        at_least("controller.window", k.window, 1)?;
        fraction("controller.redundancy_threshold", k.redundancy_threshold, true, false)?;
        non_negative("controller.hysteresis", k.hysteresis)?;
        let b = &self.aoi_bench;
        if b.lambdas.is_empty() {
            return Err(Error::config("aoi_bench.lambdas", "must not be empty"));
        }
        for &l in &b.lambdas {
            positive("aoi_bench.lambdas", l)?;
        }
        positive("aoi_bench.mu", b.mu)?;
        positive("aoi_bench.horizon", b.horizon)?;
        if self.scale_counts.is_empty() || self.scale_counts.contains(&0) {
            return Err(Error::config("scale_counts", "must be a non-empty list of positive counts"));
        }
        at_least("episode_log_every", self.episode_log_every, 1)?;
        Ok(())
    }

    /// Small two-UAV, six-target scenario the learning checks run on.
    ///
    /// Hidden widths and episode length are reduced so ten-seed studies fit
    /// a single-core desk budget; rates and discounts keep their defaults.
    pub fn reference_learning() -> Self {
        let mut c = ScenarioConfig {
            uav_count: 2,
            target_count: 6,
            target_groups: 2,
            group_spread: 40.0,
            arena: Arena {
                width: 400.0,
                height: 400.0,
            },
            episode_steps: 50,
            ..ScenarioConfig::default()
        };
        c.learning.hidden = vec![16, 32, 16];
        c.learning.batch_size = 32;
        c.learning.train_every = 2;
        c.learning.replay_capacity = 20_000;
        c
    }

    /// Name of the scenario's queue discipline as written in configs and CSVs.
    pub fn discipline_name(&self) -> String {
        String::from(self.discipline.name())
    }
}
