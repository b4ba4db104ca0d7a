//! The two operating modes as multi-agent environments over a [`Mission`],
//! their training loops, and the redundancy-driven emphasis switch.
//!
//! [`Mission`]: crate::mission::Mission

mod controller;
pub mod mode1;
pub mod mode2;
pub mod training;

pub use controller::{mode_switch, Emphasis, ModeController};
pub use mode1::{Mode1Env, Mode1Variant};
pub use mode2::{Mode2Action, Mode2Env};

/// Clips every feature into [-1, 1].
pub(crate) fn clip_unit(v: &mut [f64]) {
    for x in v {
        *x = x.clamp(-1.0, 1.0);
    }
}
