//! Sensing-prioritized mode: each UAV picks one of the predefined sensing
//! paths and is rewarded for prompt first detections.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::clip_unit;
use crate::config::ScenarioConfig;
use crate::mission::{CommsControl, Mission, StepEvents};
use crate::world::{MotionCommand, PATH_COUNT};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode1Variant {
    /// Each agent also receives a share of the team-mean reward.
    Cooperative,
    Independent,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Mode1Counters {
    pub first_detections: usize,
    pub duplicates: usize,
    pub detections: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mode1Step {
    pub observations: Vec<Vec<f64>>,
    /// Training rewards, shaped by the variant.
    pub rewards: Vec<f64>,
    /// Unshaped per-agent rewards.
    pub raw_rewards: Vec<f64>,
    /// Per-agent event counters behind `raw_rewards`.
    pub counters: Vec<Mode1Counters>,
    pub events: StepEvents,
    pub done: bool,
}

#[derive(Debug, Clone, Copy, Default)]
struct Ownership {
    owner: Option<usize>,
    last_seen: usize,
}

#[derive(Debug, Clone)]
pub struct Mode1Env {
    pub mission: Mission,
    variant: Mode1Variant,
    owners: Vec<Ownership>,
    /// Step at which each target last came within range of any active UAV.
    in_range_since: Vec<Option<usize>>,
}

impl Mode1Env {
    pub fn new(config: &ScenarioConfig, variant: Mode1Variant, episode: u64) -> Result<Self> {
        let mission = Mission::new(config, episode)?;
        let targets = mission.world.targets.len();
        let mut env = Mode1Env {
            mission,
            variant,
            owners: vec![Ownership::default(); targets],
            in_range_since: vec![None; targets],
        };
        env.update_ranges();
        Ok(env)
    }

    pub const fn n_actions() -> usize {
        PATH_COUNT
    }

    pub fn obs_dim(config: &ScenarioConfig) -> usize {
        2 + PATH_COUNT + 3 * config.cluster_k + 2 * (config.uav_count - 1)
    }

    pub fn step_index(&self) -> usize {
        self.mission.world.steps
    }

    fn update_ranges(&mut self) {
        let w = &self.mission.world;
        let step = w.steps;
        for (j, t) in w.targets.iter().enumerate() {
            let seen = w
                .uavs
                .iter()
                .any(|u| u.active && u.position.dist(&t.position) <= u.radar.range_max);
            self.in_range_since[j] = match (seen, self.in_range_since[j]) {
                (true, Some(s)) => Some(s),
                (true, None) => Some(step),
                (false, _) => None,
            };
        }
    }

    pub fn observations(&self) -> Vec<Vec<f64>> {
        let w = &self.mission.world;
        let (aw, ah) = (w.env.arena.width, w.env.arena.height);
        let k = self.mission.config.cluster_k;
        let total: usize = self.mission.picture.iter().map(|c| c.size).sum();
        w.uavs
            .iter()
            .map(|u| {
                let mut o = Vec::with_capacity(Self::obs_dim(&self.mission.config));
                o.push(2.0 * u.position.x / aw - 1.0);
                o.push(2.0 * u.position.y / ah - 1.0);
                for p in 0..PATH_COUNT {
                    o.push(if u.assigned_path == p { 1.0 } else { 0.0 });
                }
                for c in 0..k {
                    match self.mission.picture.get(c) {
                        Some(s) if total > 0 => {
                            o.push((s.centroid.x - u.position.x) / aw);
                            o.push((s.centroid.y - u.position.y) / ah);
                            o.push(s.size as f64 / total as f64);
                        }
                        _ => o.extend_from_slice(&[0.0, 0.0, 0.0]),
                    }
                }
                for v in w.uavs.iter().filter(|v| v.id != u.id) {
                    o.push(2.0 * v.position.x / aw - 1.0);
                    o.push(2.0 * v.position.y / ah - 1.0);
                }
                clip_unit(&mut o);
                o
            })
            .collect()
    }

    /// Advances one step with each UAV flying its chosen path.
    pub fn step(&mut self, actions: &[usize]) -> Result<Mode1Step> {
        let n = self.mission.uav_count();
        if actions.len() != n {
            return Err(Error::InvalidAction(alloc::format!("{} actions for {n} UAVs", actions.len())));
        }
        let commands: Vec<MotionCommand> = actions.iter().map(|&a| MotionCommand::FollowPath(a)).collect();
        let events = self.mission.step(&commands, CommsControl::Off)?;
        self.update_ranges();
        let step = self.step_index();
        let r = self.mission.config.rewards;

        let mut counters = vec![Mode1Counters::default(); n];
        let mut raw = vec![-r.time_cost; n];
        for (i, ev) in events.uavs.iter().enumerate() {
            for d in &ev.detections {
                let Some(j) = d.target_id else { continue };
                counters[i].detections += 1;
                let own = &mut self.owners[j];
                let lapsed = own.owner.is_none() || step - own.last_seen > r.reacquire_steps;
                if lapsed {
                    own.owner = Some(i);
                    own.last_seen = step;
                    if self.in_range_since[j].is_some_and(|s| step - s <= r.latency_steps) {
                        raw[i] += r.first_detection;
                        counters[i].first_detections += 1;
                    }
                } else if own.owner == Some(i) {
                    own.last_seen = step;
                } else {
                    raw[i] -= r.duplicate_penalty;
                    counters[i].duplicates += 1;
                }
            }
        }
        let rewards = match self.variant {
            Mode1Variant::Independent => raw.clone(),
            Mode1Variant::Cooperative => {
                let mean = raw.iter().sum::<f64>() / n as f64;
                raw.iter().map(|x| x + r.coop_blend * mean).collect()
            }
        };
        Ok(Mode1Step {
            observations: self.observations(),
            rewards,
            raw_rewards: raw,
            counters,
            events,
            done: step >= self.mission.config.episode_steps,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn observations_are_bounded_and_sized() {
        let c = ScenarioConfig::default();
        let mut env = Mode1Env::new(&c, Mode1Variant::Cooperative, 0).unwrap();
        for s in 0..30 {
            let st = env.step(&[s % 3, 1, 2]).unwrap();
            for o in &st.observations {
                assert_eq!(o.len(), Mode1Env::obs_dim(&c));
                assert!(o.iter().all(|v| (-1.0..=1.0).contains(v)));
            }
        }
        assert!(env.step(&[0]).is_err());
        assert!(env.step(&[0, 1, 9]).is_err());
    }

    #[test]
    fn empty_sky_costs_time_only() {
        let mut c = ScenarioConfig::reference_learning();
        c.radar.range_max = 1e-6;
        let mut env = Mode1Env::new(&c, Mode1Variant::Independent, 0).unwrap();
        loop {
            let st = env.step(&[0, 2]).unwrap();
            assert_eq!(st.raw_rewards, vec![-0.01, -0.01]);
            if st.done {
                break;
            }
        }
        assert_eq!(env.step_index(), 50);
    }

    #[test]
    fn raw_rewards_reconstruct_from_counters() {
        let c = ScenarioConfig::reference_learning();
        let mut env = Mode1Env::new(&c, Mode1Variant::Cooperative, 1).unwrap();
        let r = c.rewards;
        loop {
            let st = env.step(&[0, 2]).unwrap();
            let mean: f64 = st.raw_rewards.iter().sum::<f64>() / 2.0;
            for (i, k) in st.counters.iter().enumerate() {
                let expect = -r.time_cost + r.first_detection * k.first_detections as f64
                    - r.duplicate_penalty * k.duplicates as f64;
                assert!((st.raw_rewards[i] - expect).abs() < 1e-12);
                assert!((st.rewards[i] - (expect + 0.5 * mean)).abs() < 1e-12);
            }
            if st.done {
                break;
            }
        }
    }
}
