//! Deterministic multi-UAV sensing and communication simulator core.
//!
//! Everything in this crate is a pure function of its inputs and an explicit
//! seeded random stream, and builds without `std`. File formats, the CLI and
//! parallel sweeps live in the `adaptnet` companion crate.

#![no_std]
#![allow(clippy::needless_range_loop)]
#![allow(clippy::too_many_arguments)]
// `!(x >= 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![cfg_attr(test, allow(clippy::field_reassign_with_default))]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod clustering;
pub mod comms;
pub mod config;
pub mod error;
pub mod learning;
pub mod mission;
pub mod modes;
pub mod rng;
pub mod sensing;
pub mod trajectory;
pub mod world;

pub use config::ScenarioConfig;
pub use error::{Error, Result};
pub use rng::SimRng;
pub use trajectory::{Point, Trajectory};
