//! Training loops for both modes and the two-agent coordination game.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::ControlFlow;

use serde::Serialize;

use super::mode1::{Mode1Env, Mode1Variant};
use super::mode2::{Mode2Action, Mode2Env, ACTION_DIM};
use crate::config::ScenarioConfig;
use crate::learning::{maddpg_update, DqnAgent, DqnParams, JointTransition, MaddpgAgent, MaddpgParams, ReplayBuffer, Transition};
use crate::mission::StepEvents;
use crate::rng::{self, mix_seed, SimRng};
use crate::Result;

const AGENT_STREAM: u64 = 0xA6E;
const REPLAY_STREAM: u64 = 0x5EED;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpisodeRecord {
    pub episode: usize,
    pub steps: usize,
    /// Unshaped team reward summed over agents and steps.
    pub team_reward: f64,
    /// Unshaped cumulative reward per agent.
    pub agent_rewards: Vec<f64>,
    /// Mean training loss per agent over the episode (critic loss for
    /// actor-critic agents); zero when no update ran.
    pub losses: Vec<f64>,
}

/// Hooks into a training run. Returning `Break` from `on_episode` stops
/// training after that episode.
pub trait TrainingObserver {
    fn on_step(&mut self, _episode: usize, _step: usize, _rewards: &[f64], _events: &StepEvents) {}
    fn on_episode(&mut self, _record: &EpisodeRecord) -> ControlFlow<()> {
        ControlFlow::Continue(())
    }
}

/// Observer that ignores everything.
pub struct Quiet;

impl TrainingObserver for Quiet {}

pub fn epsilon_at(config: &ScenarioConfig, episode: usize) -> f64 {
    let l = &config.learning;
    let span = (l.epsilon_decay_fraction * config.episodes as f64).max(1.0);
    let f = episode as f64 / span;
    if f >= 1.0 {
        return l.epsilon_end;
    }
    l.epsilon_start + (l.epsilon_end - l.epsilon_start) * f
}

pub fn noise_at(config: &ScenarioConfig, episode: usize) -> f64 {
    config.learning.noise_sigma * libm::pow(config.learning.noise_decay, episode as f64)
}

#[derive(Debug, Clone)]
pub struct Mode1Training {
    pub agents: Vec<DqnAgent>,
    pub records: Vec<EpisodeRecord>,
    /// Seeded streams at the end of training, one per agent.
    pub rngs: Vec<SimRng>,
    pub completed: bool,
}

fn agent_rngs(seed: u64, tag: u64, n: usize) -> Vec<SimRng> {
    (0..n).map(|i| rng::substream(mix_seed(seed, tag), i as u64)).collect()
}

/// Independent DQN learners, one per UAV, with reward sharing in the
/// cooperative variant.
pub fn train_mode1(config: &ScenarioConfig, variant: Mode1Variant, observer: &mut dyn TrainingObserver) -> Result<Mode1Training> {
    config.validate()?;
    let n = config.uav_count;
    let l = &config.learning;
    let params = DqnParams {
        gamma: l.gamma_dqn,
        lr: l.lr_dqn,
        target_sync: l.dqn_target_sync as u64,
        epsilon_min: l.epsilon_end,
    };
    let obs_dim = Mode1Env::obs_dim(config);
    let mut rngs = agent_rngs(config.seed, AGENT_STREAM, n);
    let mut agents = rngs
        .iter_mut()
        .map(|r| DqnAgent::new(obs_dim, Mode1Env::n_actions(), &l.hidden, params, r))
        .collect::<Result<Vec<_>>>()?;
    let mut replays: Vec<ReplayBuffer<Transition>> = (0..n).map(|_| ReplayBuffer::new(l.replay_capacity)).collect();
    let mut replay_rngs = agent_rngs(config.seed, REPLAY_STREAM, n);
    let mut records = Vec::with_capacity(config.episodes);
    let mut total_steps = 0usize;

    for episode in 0..config.episodes {
        let eps = epsilon_at(config, episode);
        agents.iter_mut().for_each(|a| a.set_epsilon(eps));
        let mut env = Mode1Env::new(config, variant, episode as u64)?;
        let mut obs = env.observations();
        let mut rec = EpisodeRecord {
            episode,
            steps: 0,
            team_reward: 0.0,
            agent_rewards: vec![0.0; n],
            losses: vec![0.0; n],
        };
        let mut updates = vec![0usize; n];
        loop {
            let actions = agents
                .iter()
                .zip(rngs.iter_mut())
                .zip(&obs)
                .map(|((a, r), o)| a.act(o, true, r))
                .collect::<Result<Vec<_>>>()?;
            let st = env.step(&actions)?;
            total_steps += 1;
            rec.steps += 1;
            for i in 0..n {
                replays[i].push(Transition {
                    obs: obs[i].clone(),
                    action: actions[i],
                    reward: st.rewards[i],
                    next_obs: st.observations[i].clone(),
                    done: st.done,
                });
                rec.agent_rewards[i] += st.raw_rewards[i];
            }
            rec.team_reward += st.raw_rewards.iter().sum::<f64>();
            observer.on_step(episode, rec.steps, &st.raw_rewards, &st.events);
            if total_steps % l.train_every == 0 {
                for i in 0..n {
                    if replays[i].len() >= l.batch_size {
                        let batch = replays[i].sample(l.batch_size, &mut replay_rngs[i]);
                        rec.losses[i] += agents[i].update(&batch)?;
                        updates[i] += 1;
                    }
                }
            }
            obs = st.observations;
            if st.done {
                break;
            }
        }
        for i in 0..n {
            if updates[i] > 0 {
                rec.losses[i] /= updates[i] as f64;
            }
        }
        let flow = observer.on_episode(&rec);
        records.push(rec);
        if flow.is_break() {
            return Ok(Mode1Training {
                agents,
                records,
                rngs,
                completed: false,
            });
        }
    }
    Ok(Mode1Training {
        agents,
        records,
        rngs,
        completed: true,
    })
}

#[derive(Debug, Clone)]
pub struct Mode2Training {
    pub agents: Vec<MaddpgAgent>,
    pub records: Vec<EpisodeRecord>,
    pub rngs: Vec<SimRng>,
    pub completed: bool,
}

fn maddpg_agents(n: usize, obs_dim: usize, act_dim: usize, hidden: &[usize], params: MaddpgParams, rngs: &mut [SimRng]) -> Result<Vec<MaddpgAgent>> {
    rngs.iter_mut()
        .take(n)
        .map(|r| MaddpgAgent::new(obs_dim, act_dim, n * obs_dim, n * act_dim, hidden, params, r))
        .collect()
}

/// MADDPG over the communication mode with one shared joint replay.
pub fn train_mode2(config: &ScenarioConfig, observer: &mut dyn TrainingObserver) -> Result<Mode2Training> {
    config.validate()?;
    let n = config.uav_count;
    let l = &config.learning;
    let params = MaddpgParams {
        gamma: l.gamma_maddpg,
        lr: l.lr_maddpg,
        tau: l.tau,
    };
    let obs_dim = Mode2Env::obs_dim(config);
    let mut rngs = agent_rngs(config.seed, AGENT_STREAM + 1, n);
    let mut agents = maddpg_agents(n, obs_dim, ACTION_DIM, &l.hidden, params, &mut rngs)?;
    let mut replay: ReplayBuffer<JointTransition> = ReplayBuffer::new(l.replay_capacity);
    let mut replay_rng = rng::substream(mix_seed(config.seed, REPLAY_STREAM), 1);
    let mut records = Vec::with_capacity(config.episodes);
    let mut total_steps = 0usize;

    for episode in 0..config.episodes {
        let noise = noise_at(config, episode);
        let mut env = Mode2Env::new(config, episode as u64)?;
        let mut obs = env.observations();
        let mut rec = EpisodeRecord {
            episode,
            steps: 0,
            team_reward: 0.0,
            agent_rewards: vec![0.0; n],
            losses: vec![0.0; n],
        };
        let mut updates = 0usize;
        loop {
            let raw = agents
                .iter()
                .zip(rngs.iter_mut())
                .zip(&obs)
                .map(|((a, r), o)| a.act(o, true, noise, r))
                .collect::<Result<Vec<_>>>()?;
            let actions = raw.iter().map(|a| Mode2Action::from_slice(a)).collect::<Result<Vec<_>>>()?;
            let st = env.step(&actions)?;
            total_steps += 1;
            rec.steps += 1;
            for i in 0..n {
                rec.agent_rewards[i] += st.rewards[i];
            }
            rec.team_reward += st.rewards.iter().sum::<f64>();
            observer.on_step(episode, rec.steps, &st.rewards, &st.events);
            replay.push(JointTransition {
                obs: obs.clone(),
                actions: raw,
                rewards: st.rewards.clone(),
                next_obs: st.observations.clone(),
                done: st.done,
            });
            if total_steps % l.train_every == 0 && replay.len() >= l.batch_size {
                let batch = replay.sample(l.batch_size, &mut replay_rng);
                let stats = maddpg_update(&mut agents, &batch)?;
                for (i, s) in stats.iter().enumerate() {
                    rec.losses[i] += s.critic_loss;
                }
                updates += 1;
            }
            obs = st.observations;
            if st.done {
                break;
            }
        }
        if updates > 0 {
            rec.losses.iter_mut().for_each(|x| *x /= updates as f64);
        }
        let flow = observer.on_episode(&rec);
        records.push(rec);
        if flow.is_break() {
            return Ok(Mode2Training {
                agents,
                records,
                rngs,
                completed: false,
            });
        }
    }
    Ok(Mode2Training {
        agents,
        records,
        rngs,
        completed: true,
    })
}

/// Mean team reward of the first and last `fraction` of the episodes.
pub fn decile_means(records: &[EpisodeRecord], fraction: f64) -> (f64, f64) {
    let k = ((records.len() as f64 * fraction) as usize).max(1).min(records.len());
    let mean = |r: &[EpisodeRecord]| r.iter().map(|e| e.team_reward).sum::<f64>() / r.len().max(1) as f64;
    (mean(&records[..k]), mean(&records[records.len() - k..]))
}

/// Payoff of the two-agent coordination game: both agents earn 1 when
/// their actions share a sign and 0 otherwise.
pub fn matching_payoff(a: f64, b: f64) -> f64 {
    if (a > 0.0) == (b > 0.0) {
        1.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatrixGameOutcome {
    /// Final deterministic actions of the two agents.
    pub actions: [f64; 2],
    pub payoff: f64,
}

/// Trains two MADDPG agents on the one-shot coordination game with a
/// constant observation.
pub fn matrix_game_trial(seed: u64, episodes: usize, hidden: &[usize], params: MaddpgParams, noise: f64, batch: usize) -> Result<MatrixGameOutcome> {
    let mut rngs = agent_rngs(seed, AGENT_STREAM + 2, 2);
    let mut agents = maddpg_agents(2, 1, 1, hidden, params, &mut rngs)?;
    let mut replay: ReplayBuffer<JointTransition> = ReplayBuffer::new(episodes.max(1));
    let mut replay_rng = rng::substream(mix_seed(seed, REPLAY_STREAM), 2);
    let obs = vec![vec![1.0], vec![1.0]];
    for _ in 0..episodes {
        let a0 = agents[0].act(&obs[0], true, noise, &mut rngs[0])?;
        let a1 = agents[1].act(&obs[1], true, noise, &mut rngs[1])?;
        let r = matching_payoff(a0[0], a1[0]);
        replay.push(JointTransition {
            obs: obs.clone(),
            actions: vec![a0, a1],
            rewards: vec![r, r],
            next_obs: obs.clone(),
            done: true,
        });
        if replay.len() >= batch {
            let b = replay.sample(batch, &mut replay_rng);
            maddpg_update(&mut agents, &b)?;
        }
    }
    let a = [agents[0].act(&obs[0], false, 0.0, &mut rngs[0])?[0], agents[1].act(&obs[1], false, 0.0, &mut rngs[1])?[0]];
    Ok(MatrixGameOutcome {
        actions: a,
        payoff: matching_payoff(a[0], a[1]),
    })
}
