//! Multi-agent deterministic actor-critic with centralized critics.
//!
//! Each critic sees every agent's observation and action; each actor acts
//! on its own observation only.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::mlp::{Gradients, Mlp, OutputActivation};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct JointTransition {
    pub obs: Vec<Vec<f64>>,
    pub actions: Vec<Vec<f64>>,
    pub rewards: Vec<f64>,
    pub next_obs: Vec<Vec<f64>>,
    pub done: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaddpgParams {
    pub gamma: f64,
    pub lr: f64,
    pub tau: f64,
}

impl Default for MaddpgParams {
    fn default() -> Self {
        MaddpgParams {
            gamma: 0.99,
            lr: 0.001,
            tau: 0.01,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MaddpgAgent {
    pub actor: Mlp,
    pub critic: Mlp,
    pub target_actor: Mlp,
    pub target_critic: Mlp,
    pub params: MaddpgParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaddpgStats {
    /// Mean squared TD error before the critic step.
    pub critic_loss: f64,
    /// Mean critic value of the actor's own actions before the actor step.
    pub actor_objective: f64,
}

impl MaddpgAgent {
    /// `joint_obs` and `joint_act` are the summed dimensions over all agents.
    pub fn new<R: Rng + ?Sized>(
        obs_dim: usize,
        act_dim: usize,
        joint_obs: usize,
        joint_act: usize,
        hidden: &[usize],
        params: MaddpgParams,
        rng: &mut R,
    ) -> Result<Self> {
        let mut a = vec![obs_dim];
        a.extend_from_slice(hidden);
        a.push(act_dim);
        let mut c = vec![joint_obs + joint_act];
        c.extend_from_slice(hidden);
        c.push(1);
        let actor = Mlp::new(&a, OutputActivation::Tanh, rng)?;
        let critic = Mlp::new(&c, OutputActivation::Linear, rng)?;
        Ok(Self::from_networks(actor, critic, params))
    }

    pub fn from_networks(actor: Mlp, critic: Mlp, params: MaddpgParams) -> Self {
        MaddpgAgent {
            target_actor: actor.clone(),
            target_critic: critic.clone(),
            actor,
            critic,
            params,
        }
    }

    pub fn obs_dim(&self) -> usize {
        self.actor.input_dim()
    }

    pub fn act_dim(&self) -> usize {
        self.actor.output_dim()
    }

    /// Actor output, plus clipped Gaussian noise of std `noise` when exploring.
    pub fn act<R: Rng + ?Sized>(&self, obs: &[f64], explore: bool, noise: f64, rng: &mut R) -> Result<Vec<f64>> {
        let mut a = self.actor.forward(obs)?;
        if explore && noise > 0.0 {
            let n = Normal::new(0.0, noise).map_err(|_| Error::invalid("bad exploration noise"))?;
            for v in &mut a {
                *v = (*v + n.sample(rng)).clamp(-1.0, 1.0);
            }
        }
        Ok(a)
    }
}

fn concat(parts: &[Vec<f64>]) -> Vec<f64> {
    parts.iter().flat_map(|p| p.iter().copied()).collect()
}

fn check_batch(agents: &[MaddpgAgent], batch: &[&JointTransition]) -> Result<()> {
    if batch.is_empty() {
        return Err(Error::invalid("MADDPG update needs a non-empty batch"));
    }
    let n = agents.len();
    for t in batch {
        if t.obs.len() != n || t.actions.len() != n || t.rewards.len() != n || t.next_obs.len() != n {
            return Err(Error::invalid(alloc::format!(
                "joint transition does not cover {n} agents"
            )));
        }
        for (i, a) in agents.iter().enumerate() {
            if t.obs[i].len() != a.obs_dim() || t.next_obs[i].len() != a.obs_dim() || t.actions[i].len() != a.act_dim() {
                return Err(Error::invalid(alloc::format!("agent {i} dimensions do not match the batch")));
            }
        }
    }
    Ok(())
}

/// One centralized-critic update for every agent followed by soft target
/// updates.
pub fn maddpg_update(agents: &mut [MaddpgAgent], batch: &[&JointTransition]) -> Result<Vec<MaddpgStats>> {
    check_batch(agents, batch)?;
    let n = agents.len();
    let joint_obs: usize = agents.iter().map(|a| a.obs_dim()).sum();
    let mut act_offset = Vec::with_capacity(n);
    let mut off = joint_obs;
    for a in agents.iter() {
        act_offset.push(off);
        off += a.act_dim();
    }
    let b = batch.len() as f64;

    // Target-actor actions for every next observation, shared by all critics.
    let next_inputs = batch
        .iter()
        .map(|t| {
            let next_actions = agents
                .iter()
                .zip(&t.next_obs)
                .map(|(a, o)| a.target_actor.forward(o))
                .collect::<Result<Vec<_>>>()?;
            let mut x = concat(&t.next_obs);
            x.extend(concat(&next_actions));
            Ok(x)
        })
        .collect::<Result<Vec<_>>>()?;
    let inputs: Vec<Vec<f64>> = batch
        .iter()
        .map(|t| {
            let mut x = concat(&t.obs);
            x.extend(concat(&t.actions));
            x
        })
        .collect();

    let mut stats = Vec::with_capacity(n);
    for i in 0..n {
        let agent = &mut agents[i];
        let gamma = agent.params.gamma;
        let lr = agent.params.lr;

        let mut critic_grads = Gradients::zeros_like(&agent.critic);
        let mut critic_loss = 0.0;
        for (k, t) in batch.iter().enumerate() {
            let q_next = agent.target_critic.forward(&next_inputs[k])?[0];
            let y = t.rewards[i] + if t.done { 0.0 } else { gamma * q_next };
            let cache = agent.critic.forward_cached(&inputs[k])?;
            let err = cache.output()[0] - y;
            critic_loss += err * err;
            agent
                .critic
                .backward_accumulate(&cache, &[2.0 * err / b], &mut critic_grads)?;
        }
        agent.critic.apply_sgd(&critic_grads, lr);

        let mut actor_grads = Gradients::zeros_like(&agent.actor);
        let mut objective = 0.0;
        let span = act_offset[i]..act_offset[i] + agent.act_dim();
        for (k, t) in batch.iter().enumerate() {
            let actor_cache = agent.actor.forward_cached(&t.obs[i])?;
            let mut x = inputs[k].clone();
            x[span.clone()].copy_from_slice(actor_cache.output());
            let critic_cache = agent.critic.forward_cached(&x)?;
            objective += critic_cache.output()[0];
            let dq_dx = agent.critic.input_gradient(&critic_cache, &[1.0 / b])?;
            let ascend: Vec<f64> = dq_dx[span.clone()].iter().map(|g| -g).collect();
            agent.actor.backward_accumulate(&actor_cache, &ascend, &mut actor_grads)?;
        }
        agent.actor.apply_sgd(&actor_grads, lr);
        stats.push(MaddpgStats {
            critic_loss: critic_loss / b,
            actor_objective: objective / b,
        });
    }

    for agent in agents.iter_mut() {
        let tau = agent.params.tau;
        agent.target_actor.soft_update_from(&agent.actor, tau);
        agent.target_critic.soft_update_from(&agent.critic, tau);
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learning::mlp::Layer;
    use crate::rng;

    fn agent(seed: u64, tau: f64) -> MaddpgAgent {
        let mut r = rng::seeded(seed);
        MaddpgAgent::new(2, 1, 4, 2, &[6, 6], MaddpgParams { tau, ..MaddpgParams::default() }, &mut r).unwrap()
    }

    fn transition() -> JointTransition {
        JointTransition {
            obs: vec![vec![0.1, 0.2], vec![-0.3, 0.4]],
            actions: vec![vec![0.5], vec![-0.5]],
            rewards: vec![1.0, 0.5],
            next_obs: vec![vec![0.2, 0.1], vec![0.0, -0.1]],
            done: false,
        }
    }

    #[test]
    fn tau_one_copies_online_into_targets() {
        let mut agents = vec![agent(1, 1.0), agent(2, 1.0)];
        let t = transition();
        maddpg_update(&mut agents, &[&t, &t]).unwrap();
        for a in &agents {
            assert_eq!(a.target_actor, a.actor);
            assert_eq!(a.target_critic, a.critic);
        }
    }

    #[test]
    fn agent_count_mismatch_is_rejected() {
        let mut agents = vec![agent(1, 0.01)];
        let t = transition();
        assert!(maddpg_update(&mut agents, &[&t]).is_err());
    }

    #[test]
    fn actions_stay_bounded() {
        let a = agent(3, 0.01);
        let mut r = rng::seeded(9);
        for k in 0..500 {
            let obs = [k as f64 * 0.37 - 90.0, 40.0 - k as f64 * 0.11];
            for explore in [false, true] {
                let act = a.act(&obs, explore, 0.8, &mut r).unwrap();
                assert!(act.iter().all(|v| (-1.0..=1.0).contains(v)));
            }
        }
        let x = a.act(&[0.1, 0.1], false, 0.2, &mut r).unwrap();
        let y = a.act(&[0.1, 0.1], false, 0.2, &mut r).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn single_agent_ddpg_step_by_hand() {
        // actor: a = tanh(w_a * o), critic: Q = w_o * o + w_q * a (+ 0 bias)
        let actor = Mlp::from_layers(
            vec![Layer { inputs: 1, outputs: 1, weights: vec![0.5], biases: vec![0.0] }],
            OutputActivation::Tanh,
        )
        .unwrap();
        let critic = Mlp::from_layers(
            vec![Layer { inputs: 2, outputs: 1, weights: vec![1.0, 2.0], biases: vec![0.0] }],
            OutputActivation::Linear,
        )
        .unwrap();
        let params = MaddpgParams { gamma: 0.9, lr: 0.1, tau: 0.5 };
        let mut agents = vec![MaddpgAgent::from_networks(actor, critic, params)];
        let t = JointTransition {
            obs: vec![vec![1.0]],
            actions: vec![vec![0.2]],
            rewards: vec![1.0],
            next_obs: vec![vec![2.0]],
            done: false,
        };
        let stats = maddpg_update(&mut agents, &[&t]).unwrap();

        let a_next = libm::tanh(1.0);
        let y = 1.0 + 0.9 * (2.0 + 2.0 * a_next);
        let q = 1.0 + 2.0 * 0.2;
        let err = q - y;
        assert!((stats[0].critic_loss - err * err).abs() < 1e-12);
        let c = &agents[0].critic.layers()[0];
        let w_o = 1.0 - 0.1 * 2.0 * err * 1.0;
        let w_q = 2.0 - 0.1 * 2.0 * err * 0.2;
        let b_c = -0.1 * 2.0 * err;
        assert!((c.weights[0] - w_o).abs() < 1e-12);
        assert!((c.weights[1] - w_q).abs() < 1e-12);
        assert!((c.biases[0] - b_c).abs() < 1e-12);

        // actor ascends dQ/da * da/dw with the updated critic
        let a = libm::tanh(0.5);
        assert!((stats[0].actor_objective - (w_o + w_q * a + b_c)).abs() < 1e-12);
        let dw = w_q * (1.0 - a * a) * 1.0;
        let w_a = 0.5 + 0.1 * dw;
        assert!((agents[0].actor.layers()[0].weights[0] - w_a).abs() < 1e-12);
        // soft update halfway
        assert!((agents[0].target_actor.layers()[0].weights[0] - (0.5 + w_a) / 2.0).abs() < 1e-12);
    }
}
