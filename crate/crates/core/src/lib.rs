//! Semantic and bit users sharing a wireless channel.
//!
//! * [`rates`]: semantic-rate and Shannon bit-rate models, and the conversion
//!   between them.
//! * [`channel`]: link gains, noise, SINR and Rayleigh fading ensembles.
//! * [`access`]: downlink OMA, NOMA and semi-NOMA rate evaluation.
//! * [`region`]: rate-region sweeps, Pareto frontiers and region containment.
//! * [`opportunistic`]: uplink NOMA where the secondary user switches between
//!   semantic and bit transmission per fading state.
//! * [`experiment`]: config-driven experiment runs writing CSVs, manifests and
//!   gnuplot scripts.

pub mod access;
pub mod channel;
pub mod error;
pub mod experiment;
pub mod opportunistic;
pub mod rates;
pub mod region;

pub use error::{Error, Result};
