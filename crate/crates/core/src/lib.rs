//! Simulation and verification toolkit for a content-creator competition game
//! in which a platform ranks content by engagement, quality, or at random.
//!
//! Creators choose content `(w_costly, w_cheap)`; users of a finite set of types
//! consume the top-ranked item only if it beats their outside option. The crate
//! provides closed-form equilibrium samplers, Monte Carlo estimators of
//! downstream metrics, a numerical best-response verifier and a small
//! empirical pipeline for feed data.

pub mod empirics;
pub mod equilibrium;
pub mod error;
pub mod game;
pub mod metrics;
pub mod model;
pub mod numeric;
pub mod parallel;
pub mod stats;
pub mod verify;

pub use equilibrium::{Component, Construction, MixedStrategy};
pub use error::{Error, Result};
pub use game::{Metric, RoundOutcome};
pub use model::{Content, Family, LinearityParams, ModelConfig, ModelInstance, TypeSpace};
pub use stats::{MetricEstimate, RunningStats};
pub use verify::BestResponseReport;
