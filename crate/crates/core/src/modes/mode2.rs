//! Communication-prioritized mode: UAVs fly scripted patrols while each
//! agent controls its waveform, transmit gate and queue ordering.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use serde::Serialize;

use super::clip_unit;
use crate::comms::WaveformKind;
use crate::config::ScenarioConfig;
use crate::mission::{CommsControl, CommsDecision, Mission, StepEvents};
use crate::world::MotionCommand;
use crate::{Error, Result};

pub const ACTION_DIM: usize = 3;

/// Continuous action read out by sign: waveform (> 0 high throughput),
/// gate (> 0 transmit) and PRIORITY blend weight `(w + 1) / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Mode2Action {
    pub waveform: f64,
    pub gate: f64,
    pub weight: f64,
}

impl Mode2Action {
    pub fn from_slice(a: &[f64]) -> Result<Self> {
        if a.len() != ACTION_DIM {
            return Err(Error::InvalidAction(alloc::format!("expected {ACTION_DIM} action values, got {}", a.len())));
        }
        let c = |v: f64| v.clamp(-1.0, 1.0);
        Ok(Mode2Action {
            waveform: c(a[0]),
            gate: c(a[1]),
            weight: c(a[2]),
        })
    }

    pub fn to_array(&self) -> [f64; ACTION_DIM] {
        [self.waveform, self.gate, self.weight]
    }

    pub fn decision(&self) -> CommsDecision {
        CommsDecision {
            waveform: if self.waveform > 0.0 {
                WaveformKind::HighThroughput
            } else {
                WaveformKind::EnergySaving
            },
            transmit: self.gate > 0.0,
            priority_weight: (self.weight + 1.0) / 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Mode2Counters {
    pub novel: usize,
    pub subthreshold: usize,
    pub redundant: usize,
    /// joules
    pub energy: f64,
    /// seconds
    pub mean_age: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mode2Step {
    pub observations: Vec<Vec<f64>>,
    pub rewards: Vec<f64>,
    pub counters: Vec<Mode2Counters>,
    pub events: StepEvents,
    pub done: bool,
}

#[derive(Debug, Clone)]
pub struct Mode2Env {
    pub mission: Mission,
    history: Vec<VecDeque<[f64; ACTION_DIM]>>,
    /// Patrol each UAV keeps for the whole episode.
    patrol: Vec<usize>,
}

impl Mode2Env {
    pub fn new(config: &ScenarioConfig, episode: u64) -> Result<Self> {
        let mission = Mission::new(config, episode)?;
        let h = config.learning.action_history;
        let patrol = mission.world.uavs.iter().map(|u| u.assigned_path).collect();
        let history = (0..mission.uav_count())
            .map(|_| core::iter::repeat_n([0.0; ACTION_DIM], h).collect())
            .collect();
        Ok(Mode2Env { mission, history, patrol })
    }

    pub fn obs_dim(config: &ScenarioConfig) -> usize {
        4 + ACTION_DIM * config.learning.action_history + 4
    }

    pub fn observations(&self) -> Vec<Vec<f64>> {
        let m = &self.mission;
        let w = &m.world;
        let (aw, ah) = (w.env.arena.width, w.env.arena.height);
        let r = m.config.rewards;
        let theta = m.config.frechet_threshold;
        w.uavs
            .iter()
            .enumerate()
            .map(|(i, u)| {
                let mut o = Vec::with_capacity(Self::obs_dim(&m.config));
                let (x, y) = (u.position.x, u.position.y);
                o.extend_from_slice(&[x / aw, (aw - x) / aw, y / ah, (ah - y) / ah]);
                for a in &self.history[i] {
                    o.extend_from_slice(a);
                }
                let link = &m.uplinks[i];
                o.push(link.queue.len() as f64 / 8.0);
                o.push(link.aoi.inst_age() / r.aoi_norm);
                o.push(u.battery / m.config.uav.battery);
                o.push(link.queue.head().map_or(0.0, |p| p.relevance.distance / (2.0 * theta)));
                clip_unit(&mut o);
                o
            })
            .collect()
    }

    /// Applies one action per UAV and advances one step.
    pub fn step(&mut self, actions: &[Mode2Action]) -> Result<Mode2Step> {
        let n = self.mission.uav_count();
        if actions.len() != n {
            return Err(Error::InvalidAction(alloc::format!("{} actions for {n} UAVs", actions.len())));
        }
        let decisions: Vec<CommsDecision> = actions.iter().map(|a| a.decision()).collect();
        let commands: Vec<MotionCommand> = self.patrol.iter().map(|&p| MotionCommand::FollowPath(p)).collect();
        let events = self.mission.step(&commands, CommsControl::Manual(&decisions))?;
        for (h, a) in self.history.iter_mut().zip(actions) {
            if h.pop_front().is_some() {
                h.push_back(a.to_array());
            }
        }
        let r = self.mission.config.rewards;
        let mut counters = vec![Mode2Counters::default(); n];
        let mut rewards = vec![0.0; n];
        for (i, ev) in events.uavs.iter().enumerate() {
            let k = &mut counters[i];
            for p in &ev.delivered {
                if self.mission.redundant(p) {
                    k.redundant += 1;
                } else if p.relevance.is_novel {
                    k.novel += 1;
                } else {
                    k.subthreshold += 1;
                }
            }
            k.energy = ev.comm_energy;
            k.mean_age = ev.mean_age;
            rewards[i] = reward(k, &r);
        }
        Ok(Mode2Step {
            observations: self.observations(),
            rewards,
            counters,
            done: self.mission.world.steps >= self.mission.config.episode_steps,
            events,
        })
    }
}

/// Per-step reward from the event counters.
pub fn reward(k: &Mode2Counters, r: &crate::config::RewardConfig) -> f64 {
    r.novel_delivery * k.novel as f64 + r.subthreshold_delivery * k.subthreshold as f64
        - r.redundant_penalty * k.redundant as f64
        - k.energy / r.energy_norm
        - k.mean_age / r.aoi_norm
}
