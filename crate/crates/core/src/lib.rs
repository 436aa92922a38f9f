//! Latency-aware quality routing over pools of interchangeable providers.
//!
//! A *pool* is a set of providers that can all serve the same query but
//! differ in answer quality, latency, and cost. Round by round, a routing
//! policy picks one provider, observes a judged quality score and a latency
//! sample, and updates its estimates. The crate bundles:
//!
//! - [`scoring`]: the rate scoring kernel (quality per unit of normalized
//!   round-trip time) and the additive composite it is compared against.
//! - [`estimators`]: windowed ridge regression heads with incremental
//!   inverse maintenance, and EMA / windowed scalar trackers.
//! - [`routers`]: the full policy zoo, from static pinning to contextual
//!   rate-scored routing, behind one [`routers::Policy`] trait.
//! - [`simenv`]: a deterministic, seedable simulation environment with
//!   parametric or bootstrap latency models, load schedules, and judges.
//! - [`harness`]: episode runner, metrics, aggregation, sweeps, and
//!   result writers.
//! - [`verify`]: independent brute-force oracles and differential checks
//!   that gate the production code paths.
//!
//! Everything is deterministic given a seed: two runs with the same config
//! and seed produce byte-identical result files.

#![forbid(unsafe_code)]

pub mod domain;
pub mod estimators;
pub mod harness;
pub mod routers;
pub mod scoring;
pub mod simenv;
pub mod verify;

mod error;
mod linalg;
mod rng;

pub use error::Error;

/// Crate version string embedded in result files for provenance.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
