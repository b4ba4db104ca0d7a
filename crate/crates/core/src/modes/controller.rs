use alloc::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::config::ControllerConfig;
use crate::trajectory::RelevanceScore;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Emphasis {
    Sensing,
    Communication,
}

/// Tracks the share of redundant data among recent relevance evaluations
/// and shifts emphasis towards sensing when too much of it is redundant.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeController {
    window: usize,
    threshold: f64,
    hysteresis: f64,
    recent: VecDeque<bool>,
    emphasis: Emphasis,
}

impl ModeController {
    pub fn new(cfg: &ControllerConfig) -> Self {
        ModeController {
            window: cfg.window.max(1),
            threshold: cfg.redundancy_threshold,
            hysteresis: cfg.hysteresis,
            recent: VecDeque::with_capacity(cfg.window),
            emphasis: Emphasis::Sensing,
        }
    }

    pub fn emphasis(&self) -> Emphasis {
        self.emphasis
    }

    /// Redundant share of the window, `None` until the window is full.
    pub fn redundant_fraction(&self) -> Option<f64> {
        (self.recent.len() == self.window)
            .then(|| self.recent.iter().filter(|n| !**n).count() as f64 / self.window as f64)
    }

    /// Records `scores` and re-evaluates the emphasis.
    pub fn observe(&mut self, scores: &[RelevanceScore]) -> Emphasis {
        for s in scores {
            if self.recent.len() == self.window {
                self.recent.pop_front();
            }
            self.recent.push_back(s.is_novel);
        }
        if let Some(f) = self.redundant_fraction() {
            if f > self.threshold + self.hysteresis {
                self.emphasis = Emphasis::Sensing;
            } else if f < self.threshold - self.hysteresis {
                self.emphasis = Emphasis::Communication;
            }
        }
        self.emphasis
    }
}

/// Functional form of [`ModeController::observe`].
pub fn mode_switch(mut controller: ModeController, scores: &[RelevanceScore]) -> ModeController {
    controller.observe(scores);
    controller
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    fn scores(novel: usize, redundant: usize) -> Vec<RelevanceScore> {
        let mut v: Vec<_> = (0..novel).map(|_| RelevanceScore::classify(50.0, 20.0)).collect();
        v.extend((0..redundant).map(|_| RelevanceScore::classify(1.0, 20.0)));
        v
    }

    #[test]
    fn extremes_pick_the_obvious_emphasis() {
        let c = ModeController::new(&ControllerConfig::default());
        assert_eq!(mode_switch(c.clone(), &scores(20, 0)).emphasis(), Emphasis::Communication);
        assert_eq!(mode_switch(c, &scores(0, 20)).emphasis(), Emphasis::Sensing);
    }

    #[test]
    fn hysteresis_band_holds_state() {
        let c = mode_switch(ModeController::new(&ControllerConfig::default()), &scores(20, 0));
        // 0.5 + 0.05 is inside the band.
        let c = mode_switch(c, &scores(9, 11));
        assert_eq!(c.redundant_fraction(), Some(0.55));
        assert_eq!(c.emphasis(), Emphasis::Communication);
        let c = mode_switch(c, &scores(0, 2));
        assert_eq!(c.emphasis(), Emphasis::Sensing);
    }

    #[test]
    fn partial_window_changes_nothing() {
        let c = mode_switch(ModeController::new(&ControllerConfig::default()), &scores(5, 0));
        assert_eq!(c.redundant_fraction(), None);
        assert_eq!(c.emphasis(), Emphasis::Sensing);
    }
}
