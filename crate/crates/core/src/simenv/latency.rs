//! Latency models: parametric lognormal fitted to (median, p95), or
//! empirical pools resampled with replacement.
//!
//! The lognormal fit anchors the two published quantiles: mu = ln(median)
//! and sigma = ln(p95 / median) / 1.645. Gradual severities interpolate
//! (mu, sigma) linearly, which is log-linear in latency; empirical pools
//! have no interpolation axis, so severities quantize to their nearest
//! discrete state.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::domain::{LatencyStateSpec, PoolConfig};

use super::schedule::{LoadLevel, LoadState};

/// Normal quantile at 0.95 used by the two-point lognormal fit.
const Z95: f64 = 1.645;

#[derive(Debug, Clone, PartialEq)]
enum StateDist {
    LogNormal { mu: f64, sigma: f64 },
    Empirical { pool: Vec<f64> },
}

impl StateDist {
    fn from_spec(spec: &LatencyStateSpec) -> Self {
        match spec {
            LatencyStateSpec::Parametric { median_ms, p95_ms } => {
                assert!(*median_ms > 0.0, "median_ms must be positive");
                assert!(p95_ms >= median_ms, "p95_ms must be at least median_ms");
                StateDist::LogNormal {
                    mu: median_ms.ln(),
                    sigma: (p95_ms / median_ms).ln() / Z95,
                }
            }
            LatencyStateSpec::Empirical { pool } => {
                assert!(!pool.is_empty(), "empirical pool must not be empty");
                StateDist::Empirical { pool: pool.clone() }
            }
        }
    }

    fn mean(&self) -> f64 {
        match self {
            StateDist::LogNormal { mu, sigma } => (mu + sigma * sigma / 2.0).exp(),
            StateDist::Empirical { pool } => pool.iter().sum::<f64>() / pool.len() as f64,
        }
    }

    fn sample(&self, rng: &mut impl Rng) -> f64 {
        match self {
            StateDist::LogNormal { mu, sigma } => {
                let z: f64 = rng.sample(StandardNormal);
                (mu + sigma * z).exp()
            }
            StateDist::Empirical { pool } => pool[rng.random_range(0..pool.len())],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct ProviderDists {
    idle: StateDist,
    moderate: StateDist,
    stressed: StateDist,
}

impl ProviderDists {
    fn for_state(&self, state: LoadState) -> &StateDist {
        match state {
            LoadState::Idle => &self.idle,
            LoadState::Moderate => &self.moderate,
            LoadState::Stressed => &self.stressed,
        }
    }
}

/// Pool-wide latency model, indexed by provider position.
#[derive(Debug, Clone, PartialEq)]
pub struct LatencyModel {
    providers: Vec<ProviderDists>,
}

impl LatencyModel {
    /// Builds from a validated config; every provider must have a model.
    pub fn from_config(config: &PoolConfig) -> Self {
        let providers = config
            .providers
            .iter()
            .map(|p| {
                let spec = config
                    .latency_models
                    .get(&p.name)
                    .unwrap_or_else(|| panic!("missing latency model for '{}'", p.name));
                ProviderDists {
                    idle: StateDist::from_spec(&spec.idle),
                    moderate: StateDist::from_spec(&spec.moderate),
                    stressed: StateDist::from_spec(&spec.stressed),
                }
            })
            .collect();
        LatencyModel { providers }
    }

    pub fn num_providers(&self) -> usize {
        self.providers.len()
    }

    /// One latency draw (ms, positive) for a provider under a load level.
    pub fn sample(&self, provider: usize, level: &LoadLevel, rng: &mut impl Rng) -> f64 {
        match self.resolve(provider, level) {
            Resolved::Dist(d) => d.sample(rng),
            Resolved::Interpolated { mu, sigma } => {
                let z: f64 = rng.sample(StandardNormal);
                (mu + sigma * z).exp()
            }
        }
    }

    /// True expected latency (ms) under a load level; oracle-side only.
    pub fn expected_ms(&self, provider: usize, level: &LoadLevel) -> f64 {
        match self.resolve(provider, level) {
            Resolved::Dist(d) => d.mean(),
            Resolved::Interpolated { mu, sigma } => (mu + sigma * sigma / 2.0).exp(),
        }
    }

    fn resolve(&self, provider: usize, level: &LoadLevel) -> Resolved<'_> {
        let dists = &self.providers[provider];
        match level {
            LoadLevel::State(state) => Resolved::Dist(dists.for_state(*state)),
            LoadLevel::Severity(s) => {
                assert!((0.0..=1.0).contains(s), "severity must lie in [0, 1]");
                match (&dists.idle, &dists.stressed) {
                    (
                        StateDist::LogNormal { mu: mu0, sigma: s0 },
                        StateDist::LogNormal { mu: mu1, sigma: s1 },
                    ) => Resolved::Interpolated {
                        mu: (1.0 - s) * mu0 + s * mu1,
                        sigma: (1.0 - s) * s0 + s * s1,
                    },
                    _ => Resolved::Dist(dists.for_state(level.quantized())),
                }
            }
        }
    }
}

enum Resolved<'a> {
    Dist(&'a StateDist),
    Interpolated { mu: f64, sigma: f64 },
}
