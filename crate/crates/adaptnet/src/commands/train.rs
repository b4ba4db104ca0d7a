//! Training runs with streaming logs, curves and checkpoints.

use std::ops::ControlFlow;
use std::path::Path;
use std::sync::atomic::{AtomicBool, Ordering};

use adaptnet_core::mission::StepEvents;
use adaptnet_core::modes::training::{decile_means, train_mode1, train_mode2, EpisodeRecord, TrainingObserver};
use adaptnet_core::modes::Mode1Variant;
use adaptnet_core::rng::RngState;
use adaptnet_core::ScenarioConfig;
use serde::Serialize;

use crate::checkpoint::{Agents, Checkpoint, CHECKPOINT_VERSION};
use crate::error::{AppError, AppResult};
use crate::io::{write_json, JsonLines};
use crate::metrics::{emit_plot_data, MetricsFrame, PlotKind};

#[derive(Serialize)]
struct StepLine<'a> {
    episode: usize,
    step: usize,
    mode: &'a str,
    rewards: &'a [f64],
    events: EventCounts,
}

#[derive(Serialize)]
struct EventCounts {
    detections: usize,
    deliveries: usize,
    drops: u64,
    energy: f64,
}

#[derive(Serialize)]
struct TruncationLine {
    truncated: bool,
    episodes_completed: usize,
}

struct TrainLog<'a> {
    mode: &'static str,
    log_every: usize,
    steps: JsonLines,
    curves: MetricsFrame,
    episodes: MetricsFrame,
    stop: &'a AtomicBool,
    error: Option<AppError>,
}

impl TrainLog<'_> {
    fn keep(&mut self, r: AppResult<()>) {
        if let Err(e) = r {
            self.error.get_or_insert(e);
        }
    }
}

impl TrainingObserver for TrainLog<'_> {
    fn on_step(&mut self, episode: usize, step: usize, rewards: &[f64], events: &StepEvents) {
        if episode % self.log_every != 0 || self.error.is_some() {
            return;
        }
        let line = StepLine {
            episode,
            step,
            mode: self.mode,
            rewards,
            events: EventCounts {
                detections: events.detections(),
                deliveries: events.deliveries(),
                drops: events.drops(),
                energy: events.comm_energy(),
            },
        };
        let r = self.steps.write(&line);
        self.keep(r);
    }

    fn on_episode(&mut self, rec: &EpisodeRecord) -> ControlFlow<()> {
        for (agent, (&reward, &loss)) in rec.agent_rewards.iter().zip(&rec.losses).enumerate() {
            let r = self
                .curves
                .push(vec![rec.episode.into(), agent.into(), reward.into(), loss.into()]);
            self.keep(r);
        }
        let r = self
            .episodes
            .push(vec![rec.episode.into(), rec.steps.into(), rec.team_reward.into()]);
        self.keep(r);
        if rec.episode % self.log_every == 0 {
            log::info!("{} episode {}: team reward {:.3}", self.mode, rec.episode, rec.team_reward);
            let r = self.steps.flush();
            self.keep(r);
        }
        if self.error.is_some() || self.stop.load(Ordering::Relaxed) {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TrainingSummary {
    pub mode: String,
    pub variant: Option<Mode1Variant>,
    pub episodes_completed: usize,
    pub truncated: bool,
    pub first_decile_reward: f64,
    pub last_decile_reward: f64,
}

enum Which {
    Mode1(Mode1Variant),
    Mode2,
}

fn train(config: &ScenarioConfig, which: Which, out: &Path, stop: &AtomicBool) -> AppResult<TrainingSummary> {
    let mode = match which {
        Which::Mode1(_) => "mode1",
        Which::Mode2 => "mode2",
    };
    let mut log = TrainLog {
        mode,
        log_every: config.episode_log_every,
        steps: JsonLines::create(&out.join("episodes.jsonl"))?,
        curves: MetricsFrame::new(&["episode", "agent", "cum_reward", "loss"]),
        episodes: MetricsFrame::new(&["episode", "steps", "team_reward"]),
        stop,
        error: None,
    };
    let (records, agents, rngs, completed) = match which {
        Which::Mode1(variant) => {
            let t = train_mode1(config, variant, &mut log)?;
            (t.records, Agents::Mode1 { variant, agents: t.agents }, t.rngs, t.completed)
        }
        Which::Mode2 => {
            let t = train_mode2(config, &mut log)?;
            (t.records, Agents::Mode2 { agents: t.agents }, t.rngs, t.completed)
        }
    };
    if let Some(e) = log.error.take() {
        return Err(e);
    }
    if !completed {
        log.steps.write(&TruncationLine {
            truncated: true,
            episodes_completed: records.len(),
        })?;
    }
    log.steps.flush()?;
    log.curves.write_csv(&out.join("training_log.csv"))?;
    log.episodes.write_csv(&out.join("episodes.csv"))?;
    emit_plot_data(&log.curves, PlotKind::TrainingCurves, out)?;

    let variant = match &agents {
        Agents::Mode1 { variant, .. } => Some(*variant),
        Agents::Mode2 { .. } => None,
    };
    Checkpoint {
        version: CHECKPOINT_VERSION,
        episodes_completed: records.len(),
        complete: completed,
        config: config.clone(),
        agents,
        rngs: rngs.iter().map(RngState::capture).collect(),
    }
    .save(&out.join("checkpoint.json"))?;

    let (first, last) = decile_means(&records, 0.1);
    let summary = TrainingSummary {
        mode: mode.to_string(),
        variant,
        episodes_completed: records.len(),
        truncated: !completed,
        first_decile_reward: first,
        last_decile_reward: last,
    };
    write_json(&out.join("summary.json"), &summary)?;
    Ok(summary)
}

pub fn train_mode1_cmd(
    config: &ScenarioConfig,
    variant: Mode1Variant,
    out: &Path,
    stop: &AtomicBool,
) -> AppResult<TrainingSummary> {
    train(config, Which::Mode1(variant), out, stop)
}

pub fn train_mode2_cmd(config: &ScenarioConfig, out: &Path, stop: &AtomicBool) -> AppResult<TrainingSummary> {
    train(config, Which::Mode2, out, stop)
}
