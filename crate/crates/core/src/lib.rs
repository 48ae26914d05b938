//! Compute-and-forward two-way relaying with relay selection.
//!
//! Two users exchange messages through `M` relays over block Rayleigh fading.
//! Each relay decodes an integer combination of the two codewords, the best
//! relay broadcasts it, and each user strips its own message. The crate
//! covers the per-relay rate computation ([`cmf`]), the feedback-based power
//! alignment ([`power`]), the end-to-end protocols and their AF/DF baselines
//! ([`schemes`]), closed-form bounds ([`analysis`]) and a reproducible Monte
//! Carlo engine with figure presets ([`sim`]).

pub mod analysis;
pub mod cmf;
pub mod error;
pub mod fading;
pub mod oracle;
pub mod power;
pub mod schemes;
pub mod sim;
pub mod special;
pub mod verify;

pub use error::{Error, Result};
