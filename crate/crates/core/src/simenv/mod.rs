//! Simulated serving environment: replayed response tables, load-driven
//! latency draws, judge feedback, and query feature streams.
//!
//! The split is immutable vs. per-episode state. [`EnvCore`] bundles
//! everything that is fixed once a pool is loaded (config, resolved table,
//! latency model, feature source, judge). [`Environment`] adds one
//! episode's realized load schedule, query stream, and RNG streams; each
//! (policy, pattern, seed) cell gets a fresh one. All randomness comes
//! from tagged streams of the episode seed, so runs are reproducible and
//! policies compared at the same seed face identical draws while their
//! decisions coincide.

mod features;
mod judge;
mod latency;
mod schedule;
mod synth;
mod tableio;

pub use features::{hashed_features, FeatureSource};
pub use judge::JudgeModel;
pub use latency::LatencyModel;
pub use schedule::{LoadLevel, LoadState, RealizedSchedule};
pub use synth::{make_synthetic_pool, QualityKind, SynthPoolSpec};
pub use tableio::{
    read_feature_file, read_latency_profile, read_table_file, write_latency_profile,
    write_table_file,
};

use std::path::Path;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::domain::{
    validate_pool_config, ConfigViolation, FeatureSourceSpec, LoadPattern, Observation,
    PoolConfig, QueryContext, QueryStreamSpec, ResponseTable, RoutingDecision,
};
use crate::rng;
use crate::Error;

/// Immutable environment ingredients shared by every episode on a pool.
#[derive(Debug)]
pub struct EnvCore {
    pub config: PoolConfig,
    pub table: ResponseTable,
    pub latency: LatencyModel,
    pub features: FeatureSource,
    pub judge: JudgeModel,
}

impl EnvCore {
    /// Validates the config, loads the feature file when one is
    /// configured (relative to `base_dir`), and checks that map-backed
    /// feature sources cover every table query.
    pub fn assemble(
        config: PoolConfig,
        table: ResponseTable,
        base_dir: &Path,
    ) -> Result<Arc<EnvCore>, Error> {
        let violations = validate_pool_config(&config, None);
        if !violations.is_empty() {
            return Err(Error::InvalidConfig(violations));
        }

        let loaded_file = match &config.feature_source {
            FeatureSourceSpec::File { path } => Some(read_feature_file(
                &base_dir.join(path),
                config.feature_dim,
            )?),
            _ => None,
        };

        let mut coverage = Vec::new();
        match (&config.feature_source, &loaded_file) {
            (FeatureSourceSpec::File { path }, Some(map)) => {
                for query in table.query_ids() {
                    if !map.contains_key(query) {
                        coverage.push(ConfigViolation {
                            field: "feature_source.path".into(),
                            message: format!("{path} has no vector for table query '{query}'"),
                        });
                    }
                }
            }
            (FeatureSourceSpec::ClusterOnehot { assignments }, _) => {
                for query in table.query_ids() {
                    if !assignments.contains_key(query) {
                        coverage.push(ConfigViolation {
                            field: "feature_source.assignments".into(),
                            message: format!("table query '{query}' has no cluster"),
                        });
                    }
                }
            }
            _ => {}
        }
        if !coverage.is_empty() {
            return Err(Error::InvalidConfig(coverage));
        }

        let latency = LatencyModel::from_config(&config);
        let features = FeatureSource::from_spec(&config.feature_source, config.feature_dim, loaded_file);
        let judge = JudgeModel::from_spec(&config.judge);
        Ok(Arc::new(EnvCore {
            config,
            table,
            latency,
            features,
            judge,
        }))
    }

    pub fn num_providers(&self) -> usize {
        self.config.num_providers()
    }

    /// Builds a sibling core sharing this table under a reparameterized
    /// config. Used by parameter sweeps; the provider list and feature
    /// setup must stay identical so the loaded table stays valid.
    pub fn with_config(&self, config: PoolConfig) -> Result<Arc<EnvCore>, Error> {
        assert_eq!(
            config.providers, self.config.providers,
            "sibling core must keep the provider list"
        );
        assert_eq!(
            config.feature_source, self.config.feature_source,
            "sibling core must keep the feature source"
        );
        assert_eq!(config.feature_dim, self.config.feature_dim);
        let violations = validate_pool_config(&config, None);
        if !violations.is_empty() {
            return Err(Error::InvalidConfig(violations));
        }
        let latency = LatencyModel::from_config(&config);
        let features = self.features.clone();
        let judge = JudgeModel::from_spec(&config.judge);
        Ok(Arc::new(EnvCore {
            config,
            table: self.table.clone(),
            latency,
            features,
            judge,
        }))
    }
}

/// Reads a config file, the response table it points to, validates both,
/// and assembles the shared core. Relative paths inside the config are
/// resolved against the config file's directory.
pub fn load_pool(config_path: &Path) -> Result<Arc<EnvCore>, Error> {
    let config = PoolConfig::from_path(config_path)?;
    let base_dir = config_path.parent().unwrap_or_else(|| Path::new("."));
    if config.response_table.is_empty() {
        return Err(Error::InvalidConfig(vec![ConfigViolation {
            field: "response_table".into(),
            message: "path must not be empty".into(),
        }]));
    }
    let raw = read_table_file(&base_dir.join(&config.response_table))?;
    let violations = validate_pool_config(&config, Some(&raw));
    if !violations.is_empty() {
        return Err(Error::InvalidConfig(violations));
    }
    let table = ResponseTable::resolve(&config, &raw);
    EnvCore::assemble(config, table, base_dir)
}

/// Result of routing one query: what the policy observes, plus the true
/// table quality that metrics are computed on.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub observation: Observation,
    pub true_quality: f64,
}

/// One episode: a realized load schedule and query stream over a shared
/// core, plus the latency and judge RNG streams.
#[derive(Debug)]
pub struct Environment {
    core: Arc<EnvCore>,
    schedule: Arc<RealizedSchedule>,
    contexts: Vec<QueryContext>,
    rng_latency: ChaCha8Rng,
    rng_judge: ChaCha8Rng,
    seed: u64,
}

impl Environment {
    /// Realizes an episode. `pattern` overrides the config's schedule
    /// pattern (the grid axis); its target/spike knobs still apply.
    pub fn new(
        core: Arc<EnvCore>,
        pattern: LoadPattern,
        rounds: usize,
        seed: u64,
    ) -> Result<Environment, Error> {
        assert!(rounds >= 1, "episode needs at least one round");
        let mut spec = core.config.load_schedule.clone();
        spec.pattern = pattern;
        let schedule = Arc::new(RealizedSchedule::realize(
            &spec,
            rounds,
            core.num_providers(),
            seed,
        ));

        let ids = realize_query_stream(&core.config.query_stream, &core.table, rounds, seed)?;
        let mut contexts = Vec::with_capacity(rounds);
        for query_id in ids {
            let features = core.features.features(&query_id, None)?;
            contexts.push(QueryContext {
                query_id,
                features,
                text: None,
            });
        }

        Ok(Environment {
            core,
            schedule,
            contexts,
            rng_latency: rng::stream(seed, rng::TAG_LATENCY),
            rng_judge: rng::stream(seed, rng::TAG_JUDGE),
            seed,
        })
    }

    pub fn rounds(&self) -> usize {
        self.contexts.len()
    }

    pub fn num_providers(&self) -> usize {
        self.core.num_providers()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn core(&self) -> &Arc<EnvCore> {
        &self.core
    }

    pub fn schedule(&self) -> &RealizedSchedule {
        &self.schedule
    }

    /// Query context of a 1-based round.
    pub fn context(&self, round: u64) -> &QueryContext {
        &self.contexts[(round - 1) as usize]
    }

    /// Per-provider load levels at a 1-based round.
    pub fn load_levels(&self, round: u64) -> Vec<LoadLevel> {
        self.schedule.load_row(round)
    }

    /// Read-only oracle view over the episode (true table, expected
    /// latencies under the realized schedule).
    pub fn view(&self) -> EnvView {
        EnvView {
            core: Arc::clone(&self.core),
            schedule: Arc::clone(&self.schedule),
        }
    }

    /// Executes a decision: samples latency under the chosen provider's
    /// current load, looks up true quality, and judges it.
    pub fn step(&mut self, decision: &RoutingDecision) -> StepOutcome {
        let round = decision.round;
        debug_assert!(round >= 1 && round as usize <= self.rounds());
        let provider = decision.chosen;
        let level = self.schedule.load_at(round, provider);
        let latency_ms = self
            .core
            .latency
            .sample(provider, &level, &mut self.rng_latency);
        let query_id = &self.contexts[(round - 1) as usize].query_id;
        let true_quality = self
            .core
            .table
            .qualities(query_id)
            .unwrap_or_else(|| panic!("query '{query_id}' missing from table"))[provider];
        let quality = self.core.judge.score(true_quality, &mut self.rng_judge);
        StepOutcome {
            observation: Observation {
                provider,
                latency_ms,
                quality,
                round,
            },
            true_quality,
        }
    }
}

/// What oracle baselines may consult: the true table and the realized
/// schedule, but none of the episode's future random draws.
#[derive(Debug, Clone)]
pub struct EnvView {
    core: Arc<EnvCore>,
    schedule: Arc<RealizedSchedule>,
}

impl EnvView {
    pub fn num_providers(&self) -> usize {
        self.core.num_providers()
    }

    pub fn config(&self) -> &PoolConfig {
        &self.core.config
    }

    pub fn true_qualities(&self, query_id: &str) -> Option<&[f64]> {
        self.core.table.qualities(query_id)
    }

    pub fn costs(&self) -> Option<&[f64]> {
        self.core.table.costs()
    }

    /// Mean latency of a provider under its load at a 1-based round.
    pub fn expected_latency_ms(&self, round: u64, provider: usize) -> f64 {
        let level = self.schedule.load_at(round, provider);
        self.core.latency.expected_ms(provider, &level)
    }

    /// Mean latency of a provider when idle, regardless of schedule.
    pub fn expected_idle_latency_ms(&self, provider: usize) -> f64 {
        self.core
            .latency
            .expected_ms(provider, &LoadLevel::State(LoadState::Idle))
    }
}

/// Materializes the per-round query ids for an episode.
fn realize_query_stream(
    spec: &QueryStreamSpec,
    table: &ResponseTable,
    rounds: usize,
    seed: u64,
) -> Result<Vec<String>, Error> {
    match spec {
        QueryStreamSpec::Uniform => {
            let ids = table.query_ids();
            assert!(!ids.is_empty(), "resolved table is never empty");
            let mut rng = rng::stream(seed, rng::TAG_QUERY_STREAM);
            Ok((0..rounds)
                .map(|_| ids[rng.random_range(0..ids.len())].clone())
                .collect())
        }
        QueryStreamSpec::Fixed { ids } => {
            if ids.len() < rounds {
                return Err(Error::InvalidRequest(format!(
                    "fixed query stream has {} ids but the episode needs {rounds}",
                    ids.len()
                )));
            }
            for id in &ids[..rounds] {
                if !table.contains(id) {
                    return Err(Error::InvalidRequest(format!(
                        "fixed query stream id '{id}' is not in the response table"
                    )));
                }
            }
            Ok(ids[..rounds].to_vec())
        }
    }
}
