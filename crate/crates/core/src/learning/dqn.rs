use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::mlp::{Gradients, Mlp, OutputActivation};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub obs: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    pub next_obs: Vec<f64>,
    pub done: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DqnParams {
    pub gamma: f64,
    pub lr: f64,
    /// Updates between hard copies of the online network into the target.
    pub target_sync: u64,
    pub epsilon_min: f64,
}

impl Default for DqnParams {
    fn default() -> Self {
        DqnParams {
            gamma: 0.95,
            lr: 0.01,
            target_sync: 100,
            epsilon_min: 0.05,
        }
    }
}

/// Value-based agent with a periodically synced target network.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DqnAgent {
    pub online: Mlp,
    pub target: Mlp,
    epsilon: f64,
    pub params: DqnParams,
    updates: u64,
}

impl DqnAgent {
    pub fn new<R: Rng + ?Sized>(
        obs_dim: usize,
        n_actions: usize,
        hidden: &[usize],
        params: DqnParams,
        rng: &mut R,
    ) -> Result<Self> {
        let mut sizes = vec![obs_dim];
        sizes.extend_from_slice(hidden);
        sizes.push(n_actions);
        let online = Mlp::new(&sizes, OutputActivation::Linear, rng)?;
        Ok(Self::from_network(online, params))
    }

    pub fn from_network(online: Mlp, params: DqnParams) -> Self {
        DqnAgent {
            target: online.clone(),
            online,
            epsilon: 1.0,
            params,
            updates: 0,
        }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn set_epsilon(&mut self, eps: f64) {
        self.epsilon = eps.clamp(self.params.epsilon_min.min(1.0), 1.0);
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    pub fn n_actions(&self) -> usize {
        self.online.output_dim()
    }

    pub fn q_values(&self, obs: &[f64]) -> Result<Vec<f64>> {
        self.online.forward(obs)
    }

    /// Epsilon-greedy when `explore`, otherwise greedy; ties go to the
    /// lowest action index.
    pub fn act<R: Rng + ?Sized>(&self, obs: &[f64], explore: bool, rng: &mut R) -> Result<usize> {
        let q = self.online.forward(obs)?;
        if explore && rng.random::<f64>() < self.epsilon {
            return Ok(rng.random_range(0..q.len()));
        }
        Ok(argmax(&q))
    }

    /// One SGD step on the mean squared TD error; returns the loss of the
    /// batch evaluated after the step.
    pub fn update(&mut self, batch: &[&Transition]) -> Result<f64> {
        if batch.is_empty() {
            return Err(Error::invalid("DQN update needs a non-empty batch"));
        }
        let n_actions = self.n_actions();
        let targets = batch
            .iter()
            .map(|t| {
                if t.action >= n_actions {
                    return Err(Error::InvalidAction(alloc::format!("action {} out of range", t.action)));
                }
                Ok(if t.done {
                    t.reward
                } else {
                    let next = self.target.forward(&t.next_obs)?;
                    t.reward + self.params.gamma * next.iter().copied().fold(f64::NEG_INFINITY, f64::max)
                })
            })
            .collect::<Result<Vec<f64>>>()?;

        let scale = 2.0 / batch.len() as f64;
        let mut grads = Gradients::zeros_like(&self.online);
        let mut grad_out = vec![0.0; n_actions];
        for (t, y) in batch.iter().zip(&targets) {
            let cache = self.online.forward_cached(&t.obs)?;
            grad_out.iter_mut().for_each(|g| *g = 0.0);
            grad_out[t.action] = scale * (cache.output()[t.action] - y);
            self.online.backward_accumulate(&cache, &grad_out, &mut grads)?;
        }
        self.online.apply_sgd(&grads, self.params.lr);
        self.updates += 1;
        if self.updates % self.params.target_sync.max(1) == 0 {
            self.target.copy_from(&self.online);
        }

        let mut loss = 0.0;
        for (t, y) in batch.iter().zip(&targets) {
            let q = self.online.forward(&t.obs)?[t.action];
            loss += (q - y) * (q - y);
        }
        Ok(loss / batch.len() as f64)
    }

    /// TD target `r + (1 − done)·γ·max_a' Q_target(s', a')`.
    pub fn td_target(&self, t: &Transition) -> Result<f64> {
        if t.done {
            return Ok(t.reward);
        }
        let next = self.target.forward(&t.next_obs)?;
        Ok(t.reward + self.params.gamma * next.iter().copied().fold(f64::NEG_INFINITY, f64::max))
    }
}

/// Index of the largest value, lowest index on ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learning::mlp::Layer;
    use crate::rng;

    #[test]
    fn argmax_ties_go_low() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0]), 1);
        assert_eq!(argmax(&[0.0, 0.0]), 0);
    }

    #[test]
    fn terminal_zero_batch_leaves_zero_net_untouched() {
        let net = Mlp::zeros(&[3, 8, 8, 8, 2], OutputActivation::Linear).unwrap();
        let mut agent = DqnAgent::from_network(net.clone(), DqnParams::default());
        let t = Transition {
            obs: vec![0.3, -0.2, 0.9],
            action: 1,
            reward: 0.0,
            next_obs: vec![0.0; 3],
            done: true,
        };
        let loss = agent.update(&[&t, &t]).unwrap();
        assert_eq!(loss, 0.0);
        assert_eq!(agent.online, net);
    }

    #[test]
    fn td_target_by_hand() {
        // Q(s) = W s with W = [[1, 2], [3, -1]]; next state (0.5, 1.0)
        // Q(s') = (2.5, 0.5), target = 1 + 0.95 * 2.5 = 3.375
        let layer = Layer {
            inputs: 2,
            outputs: 2,
            weights: vec![1.0, 2.0, 3.0, -1.0],
            biases: vec![0.0, 0.0],
        };
        let net = Mlp::from_layers(vec![layer], OutputActivation::Linear).unwrap();
        let agent = DqnAgent::from_network(net, DqnParams::default());
        let t = Transition {
            obs: vec![1.0, 0.0],
            action: 0,
            reward: 1.0,
            next_obs: vec![0.5, 1.0],
            done: false,
        };
        assert!((agent.td_target(&t).unwrap() - 3.375).abs() < 1e-12);
        let terminal = Transition { done: true, ..t };
        assert_eq!(agent.td_target(&terminal).unwrap(), 1.0);
    }

    #[test]
    fn single_step_matches_hand_sgd() {
        // linear Q, one transition: grad of (Q(s,a)-y)^2 wrt row a is 2 (Q - y) s
        let layer = Layer {
            inputs: 2,
            outputs: 2,
            weights: vec![1.0, 2.0, 3.0, -1.0],
            biases: vec![0.0, 0.0],
        };
        let net = Mlp::from_layers(vec![layer], OutputActivation::Linear).unwrap();
        let mut agent = DqnAgent::from_network(net, DqnParams::default());
        let t = Transition {
            obs: vec![1.0, 0.0],
            action: 0,
            reward: 1.0,
            next_obs: vec![0.5, 1.0],
            done: false,
        };
        // Q(s,0) = 1, y = 3.375, error = -2.375
        agent.update(&[&t]).unwrap();
        let w = &agent.online.layers()[0];
        assert!((w.weights[0] - (1.0 + 0.01 * 2.0 * 2.375)).abs() < 1e-12);
        assert_eq!(w.weights[1], 2.0);
        assert!((w.biases[0] - 0.01 * 2.0 * 2.375).abs() < 1e-12);
        assert_eq!(&w.weights[2..], &[3.0, -1.0]);
    }

    #[test]
    fn greedy_and_uniform_action_selection() {
        let layer = Layer {
            inputs: 1,
            outputs: 3,
            weights: vec![0.0, 1.0, 1.0],
            biases: vec![0.0, 0.0, 0.0],
        };
        let net = Mlp::from_layers(vec![layer], OutputActivation::Linear).unwrap();
        let mut agent = DqnAgent::from_network(net, DqnParams { epsilon_min: 0.0, ..DqnParams::default() });
        let mut r = rng::seeded(5);
        agent.set_epsilon(0.0);
        for _ in 0..50 {
            assert_eq!(agent.act(&[1.0], true, &mut r).unwrap(), 1);
        }
        agent.set_epsilon(1.0);
        // chi-squared, 2 dof, 0.999 quantile 13.82
        let n = 10_000;
        let mut counts = [0usize; 3];
        for _ in 0..n {
            counts[agent.act(&[1.0], true, &mut r).unwrap()] += 1;
        }
        let e = n as f64 / 3.0;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
        assert!(chi2 < 13.82, "{counts:?}");
        assert!(agent.act(&[1.0, 2.0], false, &mut r).is_err());
    }

    #[test]
    fn target_syncs_on_schedule() {
        let mut r = rng::seeded(6);
        let params = DqnParams {
            target_sync: 3,
            ..DqnParams::default()
        };
        let mut agent = DqnAgent::new(2, 2, &[4], params, &mut r).unwrap();
        let t = Transition {
            obs: vec![0.5, -0.5],
            action: 0,
            reward: 1.0,
            next_obs: vec![0.1, 0.1],
            done: false,
        };
        let initial = agent.target.clone();
        agent.update(&[&t]).unwrap();
        agent.update(&[&t]).unwrap();
        assert_eq!(agent.target, initial);
        agent.update(&[&t]).unwrap();
        assert_eq!(agent.target, agent.online);
    }
}
