//! Multi-pair two-way decode-and-forward massive-MIMO relaying over Rician
//! fading with imperfect CSI.
//!
//! The crate evaluates the achievable spectral efficiency three ways:
//!
//! * [`exact`]: Monte-Carlo over channel realizations,
//! * [`closed_form`]: large-`M` closed-form approximations,
//! * [`asymptotics`]: limits under power scaling `p = E / M^x`,
//!
//! and [`experiment`] ties them together into sweeps, CSV artifacts and a
//! self-check.

pub mod asymptotics;
pub mod channel;
pub mod check;
pub mod closed_form;
pub mod config;
pub mod config_file;
pub mod exact;
pub mod experiment;
pub mod moments;
pub mod report;

pub use config::{
    db_to_linear, derive_stats, validate, ChannelStats, ConfigError, LinkParams, LinkSide,
    LinkStats, Side, SystemConfig, Validated,
};
pub use report::{PairSe, SeReport};
