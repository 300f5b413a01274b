//! Self-calibrating PIN entry.
//!
//! The terminal shows each digit in yellow or grey and the user answers with
//! any button they like, as long as they keep using each button for one
//! color. The engine works out both the digit and the user's private
//! button colors by discarding every digit under which some button would
//! have been used for both colors.
//!
//! - [`model`]: digits, colors, colorings, button mappings, transcripts
//! - [`engine`]: per-hypothesis histories and the consistency test
//! - [`planner`]: choosing the next balanced coloring
//! - [`session`]: multi-digit entry with calibration carried forward
//! - [`simulator`]: simulated users and Monte Carlo sweeps
//! - [`attacker`]: decoding a recorded entry as an observer
//! - [`format`], [`protocol`]: transcript files and the client protocol

pub mod attacker;
pub mod engine;
pub mod format;
pub mod model;
pub mod planner;
pub mod protocol;
pub mod session;
pub mod simulator;

pub use engine::{EpisodeState, EpisodeStatus, HistoryPerDigit};
pub use model::{
    coloring_is_balanced, enumerate_valid_mappings, ButtonId, ButtonMapping, Color, Coloring, Digit,
    DigitSet, Episode, PressEvent, Transcript,
};
pub use planner::{choose_coloring, score_coloring, PlannerConfig, Strategy};
pub use session::{Phase, Session, SessionConfig, SessionSnapshot};
