//! Versioned JSON checkpoints of trained agents.

use std::path::Path;

use adaptnet_core::learning::{DqnAgent, MaddpgAgent};
use adaptnet_core::modes::Mode1Variant;
use adaptnet_core::rng::RngState;
use adaptnet_core::ScenarioConfig;
use serde::{Deserialize, Serialize};

use crate::error::{AppError, AppResult};
use crate::io::write_json;

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Agents {
    Mode1 { variant: Mode1Variant, agents: Vec<DqnAgent> },
    Mode2 { agents: Vec<MaddpgAgent> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub episodes_completed: usize,
    /// False when training stopped early.
    pub complete: bool,
    pub config: ScenarioConfig,
    pub agents: Agents,
    /// Per-agent exploration streams, so a resumed run continues them.
    pub rngs: Vec<RngState>,
}

impl Checkpoint {
    pub fn save(&self, path: &Path) -> AppResult<()> {
        write_json(path, self)
    }

    pub fn load(path: &Path) -> AppResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        let cp: Checkpoint = serde_json::from_str(&text).map_err(|e| AppError::json(path, e))?;
        if cp.version != CHECKPOINT_VERSION {
            return Err(AppError::Input(format!(
                "{}: checkpoint version {} is not supported",
                path.display(),
                cp.version
            )));
        }
        Ok(cp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use adaptnet_core::learning::DqnParams;
    use adaptnet_core::rng::seeded;

    #[test]
    fn round_trip_preserves_networks_and_streams() {
        let mut rng = seeded(3);
        let params = DqnParams {
            gamma: 0.95,
            lr: 0.01,
            target_sync: 10,
            epsilon_min: 0.05,
        };
        let agent = DqnAgent::new(4, 3, &[5], params, &mut rng).unwrap();
        let cp = Checkpoint {
            version: CHECKPOINT_VERSION,
            episodes_completed: 7,
            complete: false,
            config: ScenarioConfig::default(),
            agents: Agents::Mode1 {
                variant: Mode1Variant::Cooperative,
                agents: vec![agent.clone()],
            },
            rngs: vec![RngState::capture(&rng)],
        };
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("cp.json");
        cp.save(&p).unwrap();
        let back = Checkpoint::load(&p).unwrap();
        let Agents::Mode1 { agents, .. } = &back.agents else { panic!() };
        let obs = [0.1, -0.2, 0.3, 0.0];
        assert_eq!(agents[0].q_values(&obs).unwrap(), agent.q_values(&obs).unwrap());
        let restored = back.rngs[0].restore().unwrap();
        assert_eq!(
            serde_json::to_string(&RngState::capture(&restored)).unwrap(),
            serde_json::to_string(&RngState::capture(&rng)).unwrap()
        );
    }
}
