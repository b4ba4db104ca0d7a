//! DQN on a five-state chain against value iteration.
//!
//! Action 0 moves left (staying put in state 0 pays 0.2), action 1 moves
//! right, and reaching state 4 pays 2.5 and ends the episode. With γ = 0.9
//! the optimal policy idles in state 0 and heads right everywhere else.

use adaptnet_core::learning::{argmax, DqnAgent, DqnParams, Transition};
use adaptnet_core::rng::seeded;
use rand::Rng;

const STATES: usize = 5;
const GAMMA: f64 = 0.9;

fn model(s: usize, a: usize) -> (usize, f64, bool) {
    match (s, a) {
        (0, 0) => (0, 0.2, false),
        (_, 0) => (s - 1, 0.0, false),
        (3, 1) => (4, 2.5, true),
        _ => (s + 1, 0.0, false),
    }
}

fn value_iteration() -> [[f64; 2]; STATES - 1] {
    let mut q = [[0.0f64; 2]; STATES - 1];
    for _ in 0..2000 {
        let v: Vec<f64> = q.iter().map(|r| r[0].max(r[1])).collect();
        for (s, row) in q.iter_mut().enumerate() {
            for (a, cell) in row.iter_mut().enumerate() {
                let (n, r, done) = model(s, a);
                *cell = r + if done { 0.0 } else { GAMMA * v[n] };
            }
        }
    }
    q
}

fn one_hot(s: usize) -> Vec<f64> {
    let mut v = vec![0.0; STATES];
    v[s] = 1.0;
    v
}

#[test]
fn oracle_policy_is_mixed() {
    let q = value_iteration();
    assert!(q[0][0] > q[0][1]);
    assert!((1..4).all(|s| q[s][1] > q[s][0]));
    assert!((q[0][0] - 2.0).abs() < 1e-9);
    assert!((q[3][1] - 2.5).abs() < 1e-12);
}

#[test]
fn learns_the_value_iteration_policy() {
    let oracle = value_iteration();
    let params = DqnParams {
        gamma: GAMMA,
        lr: 0.01,
        target_sync: 50,
        epsilon_min: 0.0,
    };
    let mut rng = seeded(21);
    let mut agent = DqnAgent::new(STATES, 2, &[24], params, &mut rng).unwrap();
    let transitions: Vec<Transition> = (0..STATES - 1)
        .flat_map(|s| (0..2).map(move |a| (s, a)))
        .map(|(s, a)| {
            let (n, r, done) = model(s, a);
            Transition {
                obs: one_hot(s),
                action: a,
                reward: r,
                next_obs: one_hot(n),
                done,
            }
        })
        .collect();
    for _ in 0..20_000 {
        let batch: Vec<&Transition> = (0..16).map(|_| &transitions[rng.random_range(0..transitions.len())]).collect();
        agent.update(&batch).unwrap();
    }
    for (s, row) in oracle.iter().enumerate() {
        let q = agent.q_values(&one_hot(s)).unwrap();
        assert_eq!(argmax(&q), argmax(row), "state {s}: {q:?} vs {row:?}");
        for a in 0..2 {
            assert!((q[a] - row[a]).abs() < 0.1, "state {s} action {a}: {} vs {}", q[a], row[a]);
        }
    }
}

#[test]
fn td_target_uses_the_frozen_network() {
    let mut rng = seeded(2);
    let params = DqnParams {
        target_sync: 1_000_000,
        ..DqnParams::default()
    };
    let mut agent = DqnAgent::new(STATES, 2, &[8], params, &mut rng).unwrap();
    let t = Transition {
        obs: one_hot(1),
        action: 1,
        reward: 0.5,
        next_obs: one_hot(2),
        done: false,
    };
    let before = agent.td_target(&t).unwrap();
    let frozen = agent.target.forward(&one_hot(2)).unwrap();
    assert_eq!(before, 0.5 + params.gamma * frozen[0].max(frozen[1]));
    for _ in 0..10 {
        agent.update(&[&t]).unwrap();
    }
    assert_eq!(agent.td_target(&t).unwrap(), before);
    let done = Transition { done: true, ..t };
    assert_eq!(agent.td_target(&done).unwrap(), 0.5);
}
