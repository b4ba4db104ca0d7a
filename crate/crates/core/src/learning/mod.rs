//! Neural substrate and the two learners built on it.
//!
//! Networks are trained with plain SGD at the configured learning rates.

pub mod dqn;
pub mod maddpg;
pub mod mlp;
pub mod replay;

pub use dqn::{argmax, DqnAgent, DqnParams, Transition};
pub use maddpg::{maddpg_update, JointTransition, MaddpgAgent, MaddpgParams, MaddpgStats};
pub use mlp::{ForwardCache, Gradients, Layer, Mlp, OutputActivation};
pub use replay::ReplayBuffer;
